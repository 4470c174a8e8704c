"""Gram-matrix realizability of an amplification task.

A map sending pure inputs ``psi_i`` to targets ``phi_i`` with success
probabilities ``p_i`` exists iff some Hermitian ``Omega`` satisfies

    Omega >= 0,   diag(Omega) = p,   K = G_in - G_out o Omega >= 0,

with ``o`` the entrywise product. For two states with a common probability
the question has a closed form; for larger sets a multi-start Nelder-Mead
search over the off-diagonal entries of ``Omega`` looks for a certificate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import _backend
from .errors import DimensionMismatch, InvalidOverlap, InvalidProbability, InvalidState, NTooLarge
from .states import HERMITIAN_TOL, GramMatrix

DEFAULT_TOL = 1e-9
FOUND_PENALTY = 1e-12
MAX_SEARCH_N = 8
METHODS = ("analytic-two-state", "penalty-search", "user-supplied")


@dataclass(frozen=True, eq=False)
class OmegaMatrix:
    """Ancilla overlap matrix ``Omega_ij = sqrt(p_i p_j) <mu_j|mu_i>``.

    Positivity is not enforced here: infeasible candidates are valid values
    and their defect is recorded on the certificate.
    """

    entries: np.ndarray
    prob_diag: np.ndarray

    def __post_init__(self):
        om = np.array(self.entries, dtype=complex)
        p = np.array(self.prob_diag, dtype=float).reshape(-1)
        if om.ndim != 2 or om.shape != (p.size, p.size):
            raise DimensionMismatch(f"Omega shape {om.shape} does not match {p.size} probabilities")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise InvalidProbability(f"probabilities must lie in [0, 1], got {p}")
        if np.max(np.abs(om - om.conj().T)) > HERMITIAN_TOL:
            raise InvalidState("Omega is not Hermitian")
        if np.max(np.abs(np.diag(om).real - p)) > 1e-10 or np.max(np.abs(np.diag(om).imag)) > 1e-10:
            raise InvalidState("diag(Omega) must equal the success probabilities")
        om = (om + om.conj().T) / 2
        om.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "entries", om)
        object.__setattr__(self, "prob_diag", p)

    @classmethod
    def all_ones(cls, n: int) -> "OmegaMatrix":
        return cls(np.ones((n, n), dtype=complex), np.ones(n))

    @classmethod
    def zeros(cls, n: int) -> "OmegaMatrix":
        return cls(np.zeros((n, n), dtype=complex), np.zeros(n))

    @property
    def n(self) -> int:
        return self.prob_diag.size

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])


@dataclass(frozen=True, eq=False)
class FeasibilityCertificate:
    omega: OmegaMatrix
    residual_K: np.ndarray
    min_eig_omega: float
    min_eig_K: float
    feasible: bool
    method: str
    tol: float = DEFAULT_TOL
    penalty: float = 0.0
    notes: str = ""

    @property
    def diag_ok(self) -> bool:
        return bool(np.allclose(np.diag(self.omega.entries).real, self.omega.prob_diag, atol=1e-10, rtol=0))


@dataclass(frozen=True, eq=False)
class NotFound:
    """Search failure. Evidence of infeasibility, not a proof."""

    best_penalty: float
    best_omega: OmegaMatrix
    min_eig_omega: float
    min_eig_K: float
    restarts: int
    notes: str = "no certificate found; failure of a heuristic search does not prove infeasibility"

    feasible = False


SearchResult = Union[FeasibilityCertificate, NotFound]


def _as_gram(g) -> GramMatrix:
    return g if isinstance(g, GramMatrix) else GramMatrix(np.asarray(g, dtype=complex))


def residual_K(g_pi, g_xi, omega: OmegaMatrix) -> np.ndarray:
    """``G_in - G_out o Omega`` (entrywise product)."""
    g_pi, g_xi = _as_gram(g_pi), _as_gram(g_xi)
    if not (g_pi.n == g_xi.n == omega.n):
        raise DimensionMismatch(f"sizes differ: G_in {g_pi.n}, G_out {g_xi.n}, Omega {omega.n}")
    k = g_pi.entries - g_xi.entries * omega.entries
    return (k + k.conj().T) / 2


def _scaled_tol(g_pi: GramMatrix, tol: float) -> float:
    return tol * max(1.0, float(np.trace(g_pi.entries).real))


def check_feasibility(g_pi, g_xi, omega: OmegaMatrix, tol: float = DEFAULT_TOL,
                      method: str = "user-supplied") -> FeasibilityCertificate:
    """Evaluate the three Omega conditions for a given candidate.

    The PSD tolerance is ``tol`` relative to ``Tr(G_in)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    g_pi, g_xi = _as_gram(g_pi), _as_gram(g_xi)
    k = residual_K(g_pi, g_xi, omega)
    lam_o = omega.min_eigenvalue
    lam_k = float(np.linalg.eigvalsh(k)[0])
    eff = _scaled_tol(g_pi, tol)
    diag_ok = bool(np.allclose(np.diag(omega.entries).real, omega.prob_diag, atol=1e-10, rtol=0))
    feasible = lam_o >= -eff and lam_k >= -eff and diag_ok
    pen = max(0.0, -lam_o) ** 2 + max(0.0, -lam_k) ** 2
    return FeasibilityCertificate(omega, k, lam_o, lam_k, bool(feasible), method, tol, pen)


def _phase(z: complex) -> complex:
    return z / abs(z) if abs(z) > 0 else 1.0 + 0j


def _check_overlap(name: str, z: complex) -> complex:
    z = complex(z)
    if abs(z) > 1 + 1e-12:
        raise InvalidOverlap(f"|{name}| = {abs(z):.6g} exceeds 1")
    return z


def solve_two_state(s: complex, t: complex, p: float, tol: float = DEFAULT_TOL) -> FeasibilityCertificate:
    """Closed-form feasibility for two states with a common probability ``p``.

    Args:
        s: Input overlap ``<psi_2|psi_1>``.
        t: Target overlap ``<phi_2|phi_1>``.
        p: Success probability shared by both inputs.

    Feasible iff ``max(|s| - |t| p, 0) <= 1 - p``. The returned Omega uses the
    off-diagonal ``p * min(1, |s|/(|t| p)) * phase(s/t)``, which minimizes
    ``|s - t Omega_12|`` over the allowed disc.
    """
    s = _check_overlap("s", s)
    t = _check_overlap("t", t)
    if not 0.0 <= p <= 1.0:
        raise InvalidProbability(f"p must lie in [0, 1], got {p}")
    if p == 0.0:
        w = 0j
    elif abs(t) == 0.0:
        w = p * _phase(s)
    else:
        # min(p, |s|/|t|) without forming |s|/(|t| p), which overflows for tiny |t| p
        mag = p if abs(t) * p <= abs(s) else abs(s) / abs(t)
        w = mag * _phase(s) * _phase(t).conjugate()
    omega = OmegaMatrix(np.array([[p, w], [w.conjugate(), p]]), np.array([p, p]))
    g_pi = GramMatrix(np.array([[1, s], [s.conjugate(), 1]]))
    g_xi = GramMatrix(np.array([[1, t], [t.conjugate(), 1]]))
    cert = check_feasibility(g_pi, g_xi, omega, tol, method="analytic-two-state")
    analytic = max(abs(s) - abs(t) * p, 0.0) <= (1.0 - p) + 1e-12
    note = "" if analytic == cert.feasible else "analytic and eigenvalue verdicts differ within tolerance"
    return FeasibilityCertificate(cert.omega, cert.residual_K, cert.min_eig_omega, cert.min_eig_K,
                                  cert.feasible, cert.method, tol, cert.penalty, note)


def max_success_probability(s: complex, t: complex) -> float:
    """Largest common success probability for a two-state transformation.

    ``min(1, (1 - |s|)/(1 - |t|))``, and 1 whenever ``|s| <= |t|``.
    """
    s = _check_overlap("s", s)
    t = _check_overlap("t", t)
    if abs(s) <= abs(t):
        return 1.0
    # here |t| < |s| <= 1, so 1 - |t| > 0
    return min(1.0, (1.0 - abs(s)) / (1.0 - abs(t)))


def two_state_threshold(g_pi, g_xi) -> float:
    """:func:`max_success_probability` read off two 2x2 Gram matrices."""
    g_pi, g_xi = _as_gram(g_pi), _as_gram(g_xi)
    if g_pi.n != 2 or g_xi.n != 2:
        raise DimensionMismatch("two-state threshold needs 2x2 Gram matrices")
    return max_success_probability(g_pi.entries[0, 1], g_xi.entries[0, 1])


def pack_omega(omega: np.ndarray) -> np.ndarray:
    """Real parameter vector (Re, Im of the strict upper triangle, row-major)."""
    n = omega.shape[0]
    iu = np.triu_indices(n, 1)
    vals = omega[iu]
    x = np.empty(2 * vals.size)
    x[0::2] = vals.real
    x[1::2] = vals.imag
    return x


def unpack_omega(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    n = p.size
    om = np.diag(p.astype(complex))
    iu = np.triu_indices(n, 1)
    om[iu] = x[0::2] + 1j * x[1::2]
    om[(iu[1], iu[0])] = x[0::2] - 1j * x[1::2]
    return om


def _aligned_start(g_pi: np.ndarray, g_xi: np.ndarray, p: np.ndarray) -> np.ndarray:
    # pairwise analogue of the two-state optimum
    n = p.size
    om = np.diag(p.astype(complex))
    for i in range(n):
        for j in range(i + 1, n):
            cap = math.sqrt(p[i] * p[j])
            s, t = g_pi[i, j], g_xi[i, j]
            if cap == 0:
                continue
            if abs(t) == 0:
                w = cap * _phase(s)
            else:
                w = cap * min(1.0, abs(s) / (abs(t) * cap)) * _phase(s / t)
            om[i, j] = w
            om[j, i] = w.conjugate()
    return om


def _random_start(rng: np.random.Generator, p: np.ndarray) -> np.ndarray:
    n = p.size
    vecs = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    gram = vecs.conj() @ vecs.T
    root = np.sqrt(p)
    return root[:, None] * gram * root[None, :]


@dataclass
class SearchSettings:
    restarts: int = 64
    seed: int = 0
    margin: float = 1e-10
    step: float = 0.05
    maxfev_per_param: int = 400
    xatol: float = 1e-13
    fatol: float = 1e-30
    inner_restarts: int = 2
    workers: int = 1
    kernels: Optional[object] = field(default=None, repr=False)


def _run_restart(index: int, g_pi: np.ndarray, g_xi: np.ndarray, p: np.ndarray,
                 cfg: SearchSettings, kernels) -> tuple:
    if index == 0:
        start = _aligned_start(g_pi, g_xi, p)
    else:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, index]))
        start = _random_start(rng, p)
    x = pack_omega(start)
    if x.size == 0:
        return x, 0.0
    args = (g_pi.real.copy(), g_pi.imag.copy(), g_xi.real.copy(), g_xi.imag.copy(), p)
    maxfev = cfg.maxfev_per_param * x.size
    # interior pass with a small eigenvalue margin, then a polish on the true penalty
    x, _, _ = kernels.nelder_mead_penalty(x, cfg.step, *args, cfg.margin, maxfev,
                                          cfg.xatol, cfg.fatol, cfg.inner_restarts)
    x, f, _ = kernels.nelder_mead_penalty(x, cfg.step * 1e-3, *args, 0.0, maxfev,
                                          cfg.xatol, cfg.fatol, cfg.inner_restarts)
    return x, float(f)


def search_omega(g_pi, g_xi, p: Sequence[float], seeds: int = 64, seed: int = 0,
                 tol: float = DEFAULT_TOL, workers: int = 1, kernels=None,
                 **settings) -> SearchResult:
    """Multi-start derivative-free search for a feasibility certificate.

    Minimizes ``max(0, -lmin(Omega))^2 + max(0, -lmin(K))^2`` over Hermitian
    Omega with the diagonal pinned to ``p``. Restart 0 starts from the
    pairwise phase-aligned guess, the others from random Gram matrices seeded
    by ``(seed, restart index)``. The lowest penalty wins, ties going to the
    smallest Frobenius norm, so the result does not depend on ``workers``.

    Returns:
        A :class:`FeasibilityCertificate` if the best penalty is below 1e-12
        and the certificate checks out at ``tol``, else :class:`NotFound`.
    """
    g_pi, g_xi = _as_gram(g_pi), _as_gram(g_xi)
    p = np.asarray(p, dtype=float).reshape(-1)
    n = p.size
    if not (g_pi.n == g_xi.n == n):
        raise DimensionMismatch(f"sizes differ: G_in {g_pi.n}, G_out {g_xi.n}, p {n}")
    if n > MAX_SEARCH_N:
        raise NTooLarge(f"search supports N <= {MAX_SEARCH_N}, got {n}")
    if np.any(p < 0) or np.any(p > 1):
        raise InvalidProbability(f"probabilities must lie in [0, 1], got {p}")
    if seeds < 1:
        raise ValueError("at least one restart is required")
    cfg = SearchSettings(restarts=seeds, seed=seed, workers=workers, **settings)
    kernels = kernels if kernels is not None else _backend.kernels

    def job(i):
        return _run_restart(i, g_pi.entries, g_xi.entries, p, cfg, kernels)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(seeds)))
    else:
        results = [job(i) for i in range(seeds)]

    def rank(item):
        i, (x, f) = item
        return (f, float(np.linalg.norm(unpack_omega(x, p))), i)

    best_i, (best_x, _) = min(enumerate(results), key=rank)
    omega = OmegaMatrix(unpack_omega(best_x, p), p)
    cert = check_feasibility(g_pi, g_xi, omega, tol, method="penalty-search")
    if cert.penalty < FOUND_PENALTY and cert.feasible:
        return FeasibilityCertificate(cert.omega, cert.residual_K, cert.min_eig_omega, cert.min_eig_K,
                                      True, cert.method, tol, cert.penalty,
                                      f"best of {seeds} restarts (restart {best_i})")
    return NotFound(cert.penalty, omega, cert.min_eig_omega, cert.min_eig_K, seeds)


def decide(g_pi, g_xi, p: Sequence[float], tol: float = DEFAULT_TOL, seeds: int = 64,
           seed: int = 0, workers: int = 1) -> SearchResult:
    """Analytic route for two states with a common probability, search otherwise."""
    g_pi, g_xi = _as_gram(g_pi), _as_gram(g_xi)
    p = np.asarray(p, dtype=float).reshape(-1)
    if g_pi.n == 2 and p.size == 2 and p[0] == p[1]:
        return solve_two_state(g_pi.entries[0, 1], g_xi.entries[0, 1], float(p[0]), tol)
    return search_omega(g_pi, g_xi, p, seeds=seeds, seed=seed, tol=tol, workers=workers)
