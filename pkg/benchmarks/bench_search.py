"""Compare the compiled and pure-Python Omega-search kernels.

Usage::

    python benchmarks/bench_search.py [--restarts 8] [--repeat 3]

Runs search_omega on fixed coherent-state tasks (N = 2, 3, 4) with each
available backend and reports the best wall time, the speedup and whether
the two backends reached the same verdict.
"""

import argparse
import time

import numpy as np

from ampforge import _backend
from ampforge.feasibility import search_omega
from ampforge.states import gram_matrix, make_coherent_state


def coherent_task(n, gain, radius=0.4, dim=24):
    alphas = [radius * np.exp(2j * np.pi * k / n) for k in range(n)]
    inputs = [make_coherent_state(a, dim) for a in alphas]
    targets = [make_coherent_state(gain * a, dim) for a in alphas]
    return gram_matrix(inputs), gram_matrix(targets)


def time_backend(kernels, g_pi, g_xi, p, restarts, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = search_omega(g_pi, g_xi, p, seeds=restarts, seed=0, kernels=kernels)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--restarts", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    backends = _backend.available_backends()
    print(f"backends: {', '.join(sorted(backends))} (default {_backend.BACKEND})")
    header = f"{'case':<22}" + "".join(f"{name:>12}" for name in sorted(backends)) + f"{'speedup':>10}  verdicts"
    print(header)
    cases = [(2, 2.0, 0.1), (3, 1.5, 0.1), (3, 2.0, 1.0), (4, 1.5, 0.05)]
    for n, gain, prob in cases:
        g_pi, g_xi = coherent_task(n, gain)
        p = np.full(n, prob)
        times = {}
        verdicts = {}
        for name in sorted(backends):
            times[name], res = time_backend(backends[name], g_pi, g_xi, p, args.restarts, args.repeat)
            verdicts[name] = res.feasible
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        row = f"N={n} g={gain:<4} p={prob:<6}" + "".join(f"{times[k]:>11.3f}s" for k in sorted(times))
        agree = "agree" if len(set(verdicts.values())) == 1 else "DIFFER"
        print(f"{row}{speed:>9.1f}x  {agree} {verdicts}")


if __name__ == "__main__":
    main()
