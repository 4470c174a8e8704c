"""Balanced homodyne phase estimation: closed-form statistics and a seeded simulator.

The signal ``|b>`` (real amplitude) and the local oscillator ``|c>`` with
``c = |c| e^{i delta}`` meet on a balanced splitter. The outputs are coherent
with amplitudes ``(c + i b)/sqrt(2)`` and ``(c - i b)/sqrt(2)``, so the count
difference has mean ``2|b||c| sin(delta)`` and variance ``|b|^2 + |c|^2``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import DivergentSensitivity, InsufficientTrials, InvalidParameters, ZeroSignal

BLOCK = 65536
MIN_TRIALS = 1000
COS_EPS = 1e-12

CSV_COLUMNS = ("b", "c", "delta", "mean", "std", "sensitivity", "emp_mean", "emp_std", "trials", "seed")


@dataclass(frozen=True)
class HomodyneSetup:
    b_mag: float
    c_mag: float
    delta: float

    def __post_init__(self):
        if self.b_mag < 0:
            raise InvalidParameters(f"|b| must be non-negative, got {self.b_mag}")
        if self.c_mag <= 0:
            raise InvalidParameters(f"|c| must be positive, got {self.c_mag}")

    def amplified(self, g: float) -> "HomodyneSetup":
        """Noiseless pre-amplification of the signal: ``|b| -> g|b|``."""
        return HomodyneSetup(g * self.b_mag, self.c_mag, self.delta)


@dataclass(frozen=True)
class HomodyneStats:
    mean: float
    std: float
    sensitivity: float


@dataclass(frozen=True)
class SimulationResult:
    emp_mean: float
    emp_std: float
    trials: int
    seed: int


def signal_mean(s: HomodyneSetup) -> float:
    return 2.0 * s.b_mag * s.c_mag * math.sin(s.delta)


def signal_std(s: HomodyneSetup) -> float:
    return math.hypot(s.b_mag, s.c_mag)


def sensitivity(s: HomodyneSetup) -> float:
    """Error-propagated phase uncertainty ``sqrt(1 + (|c|/|b|)^2) / (2|c||cos delta|)``.

    Raises:
        ZeroSignal: if ``|b| = 0``.
        DivergentSensitivity: if ``|cos delta| <= 1e-12``.
    """
    if s.b_mag == 0:
        raise ZeroSignal("phase sensitivity needs a non-zero signal")
    cos_d = abs(math.cos(s.delta))
    if cos_d <= COS_EPS:
        raise DivergentSensitivity("sensitivity diverges at delta = +-pi/2")
    return math.sqrt(1.0 + (s.c_mag / s.b_mag) ** 2) / (2.0 * s.c_mag * cos_d)


def homodyne_stats(s: HomodyneSetup) -> HomodyneStats:
    return HomodyneStats(signal_mean(s), signal_std(s), sensitivity(s))


def output_intensities(s: HomodyneSetup) -> tuple:
    """Mean photon numbers at the two splitter ports."""
    c = s.c_mag * complex(math.cos(s.delta), math.sin(s.delta))
    b = complex(0.0, s.b_mag)
    return abs(c + b) ** 2 / 2.0, abs(c - b) ** 2 / 2.0


def _block_sums(lam1: float, lam2: float, seed: int, block: int, size: int) -> tuple:
    rng = np.random.default_rng(np.random.SeedSequence([seed, block]))
    diff = rng.poisson(lam1, size).astype(np.int64) - rng.poisson(lam2, size).astype(np.int64)
    return int(diff.sum()), int((diff * diff).sum())


def simulate_homodyne(s: HomodyneSetup, trials: int, seed: int, shards: int = 1) -> SimulationResult:
    """Monte Carlo estimate of the count-difference mean and standard deviation.

    Trials are cut into fixed blocks of 65536, each seeded by
    ``(seed, block index)``; shards only decide which thread runs which
    blocks. Sums are exact integers, so the result is bit-identical for any
    shard count.

    Raises:
        InsufficientTrials: if ``trials < 1000``.
    """
    if trials < MIN_TRIALS:
        raise InsufficientTrials(f"need at least {MIN_TRIALS} trials, got {trials}")
    if shards < 1:
        raise InvalidParameters("shards must be positive")
    lam1, lam2 = output_intensities(s)
    nblocks = -(-trials // BLOCK)
    sizes = [min(BLOCK, trials - k * BLOCK) for k in range(nblocks)]
    groups = [range(k, nblocks, shards) for k in range(min(shards, nblocks))]

    def run(group):
        return [_block_sums(lam1, lam2, seed, k, sizes[k]) for k in group]

    if len(groups) > 1:
        with ThreadPoolExecutor(max_workers=len(groups)) as pool:
            parts = list(pool.map(run, groups))
    else:
        parts = [run(g) for g in groups]
    s1 = sum(a for part in parts for a, _ in part)
    s2 = sum(b for part in parts for _, b in part)
    mean = s1 / trials
    # exact integer numerator before the single float division
    var = (s2 * trials - s1 * s1) / (trials * (trials - 1))
    return SimulationResult(mean, math.sqrt(max(var, 0.0)), trials, seed)


def sweep(b_values: Sequence[float], c_mag: float, deltas: Sequence[float], trials: int,
          seed: int, shards: int = 1, simulate: bool = True) -> List[dict]:
    """Analytic and empirical statistics over a (|b|, delta) grid.

    Every grid point reuses ``seed`` (common random numbers). Undefined
    sensitivities are left as None.
    """
    rows = []
    for b in b_values:
        for delta in deltas:
            setup = HomodyneSetup(float(b), float(c_mag), float(delta))
            try:
                sens: Optional[float] = sensitivity(setup)
            except (ZeroSignal, DivergentSensitivity):
                sens = None
            row = {
                "b": setup.b_mag, "c": setup.c_mag, "delta": setup.delta,
                "mean": signal_mean(setup), "std": signal_std(setup), "sensitivity": sens,
                "emp_mean": None, "emp_std": None, "trials": trials if simulate else 0, "seed": seed,
            }
            if simulate:
                sim = simulate_homodyne(setup, trials, seed, shards)
                row["emp_mean"], row["emp_std"] = sim.emp_mean, sim.emp_std
            rows.append(row)
    return rows


def write_csv(rows: Iterable[dict], path, columns: Sequence[str] = CSV_COLUMNS) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                             for c in columns])
