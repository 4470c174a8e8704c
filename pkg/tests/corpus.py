"""Shared generators for the test corpus."""

import numpy as np

from ampforge.feasibility import OmegaMatrix
from ampforge.states import PureState, make_coherent_state

DELTAS = [round(0.1 * k, 1) for k in range(1, 11)]
GAINS = [1.5, 2.0, 3.0]


def coherent_pair(delta, gain, dim=None):
    """Inputs {0, delta}, noiseless targets {0, gain * delta}."""
    dim = dim or max(20, int(np.ceil((gain * delta) ** 2 + 6 * gain * delta + 10)))
    inputs = [make_coherent_state(0.0, dim), make_coherent_state(delta, dim)]
    targets = [make_coherent_state(0.0, dim), make_coherent_state(gain * delta, dim)]
    return inputs, targets


def random_unit(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_correlation(rng, n, rank=None):
    """Random PSD matrix with unit diagonal."""
    rank = rank or n
    a = rng.normal(size=(rank, n)) + 1j * rng.normal(size=(rank, n))
    a /= np.linalg.norm(a, axis=0)
    return a.conj().T @ a


def states_from_gram(rng, gram, dim):
    """Pure states whose Gram matrix ``<psi_j|psi_i>`` equals ``gram``."""
    n = gram.shape[0]
    # columns V satisfy V^T conj(V) = gram, i.e. V^dag V = conj(gram)
    w, u = np.linalg.eigh(np.conj(gram))
    root = (u * np.sqrt(np.clip(w, 0, None))) @ u.conj().T
    q, _ = np.linalg.qr(rng.normal(size=(dim, n)) + 1j * rng.normal(size=(dim, n)))
    vecs = q @ root
    return [PureState.normalized(vecs[:, i]) for i in range(n)]


def random_feasible_spec(rng, n, dim, deterministic=False):
    """Inputs, targets, probs and a known certificate Omega.

    Targets are random; Omega is a random correlation matrix scaled by p;
    the inputs realize ``G_in = G_out o Omega + K`` with ``K`` PSD and
    ``K_ii = 1 - p_i``.
    """
    targets = [PureState(random_unit(rng, dim)) for _ in range(n)]
    g_xi = np.array([[np.vdot(targets[j].amplitudes, targets[i].amplitudes) for j in range(n)]
                     for i in range(n)])
    if deterministic:
        p = np.ones(n)
    else:
        p = rng.uniform(0.2, 0.8, size=n)
    corr = random_correlation(rng, n)
    sq = np.sqrt(p)
    omega = sq[:, None] * corr * sq[None, :]
    k = np.zeros((n, n), dtype=complex)
    if not deterministic:
        sk = np.sqrt(1 - p)
        k = sk[:, None] * random_correlation(rng, n) * sk[None, :]
    g_pi = g_xi * omega + k
    inputs = states_from_gram(rng, g_pi, dim)
    return inputs, targets, p, OmegaMatrix(omega, p)
