"""Single-mode Gaussian states in phase space.

First moments ``d = (<Q>, <P>)`` and covariance ``gamma_ij = <{X_i, X_j}> - 2 d_i d_j``
under the hbar = 1 quadrature convention (vacuum: ``d = 0``, ``gamma = I``;
coherent ``|alpha>``: ``d = sqrt(2) (Re alpha, Im alpha)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateModel,
    InvalidGain,
    InvalidParameters,
    InvalidState,
    SingularCovariance,
    TargetAmplitudeMismatch,
    TruncationBoundary,
    UndefinedPhase,
)
from .states import State, as_matrix, quadrature_p, quadrature_q

PHASE_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class GaussianState:
    d: np.ndarray
    gamma: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        d = np.array(self.d, dtype=float).reshape(-1)
        g = np.array(self.gamma, dtype=float)
        if d.shape != (2,) or g.shape != (2, 2):
            raise InvalidState("single-mode Gaussian state needs d of length 2 and a 2x2 gamma")
        if abs(g[0, 1] - g[1, 0]) > 1e-12:
            raise InvalidState("covariance matrix must be symmetric")
        if np.linalg.det(g) < 1 - 1e-9 or g[0, 0] <= 0:
            raise InvalidState(f"covariance violates the uncertainty bound (det {np.linalg.det(g):.6g} < 1)")
        d.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "gamma", g)

    @classmethod
    def vacuum(cls) -> "GaussianState":
        return cls(np.zeros(2), np.eye(2), "vacuum")

    @classmethod
    def coherent(cls, alpha: complex) -> "GaussianState":
        alpha = complex(alpha)
        return cls(math.sqrt(2) * np.array([alpha.real, alpha.imag]), np.eye(2), f"alpha={alpha:.6g}")

    @classmethod
    def thermal(cls, nbar: float, alpha: complex = 0j) -> "GaussianState":
        alpha = complex(alpha)
        return cls(math.sqrt(2) * np.array([alpha.real, alpha.imag]), (2 * nbar + 1) * np.eye(2),
                   f"thermal nbar={nbar:g}")

    @classmethod
    def from_polar(cls, r: float, theta: float, gamma=None) -> "GaussianState":
        return cls(r * np.array([math.cos(theta), math.sin(theta)]),
                   np.eye(2) if gamma is None else gamma)

    def scaled(self, g: float) -> "GaussianState":
        """Noiseless phase-preserving image: ``d -> g d``, covariance unchanged."""
        return GaussianState(g * self.d, self.gamma, self.label)

    @property
    def amplitude(self) -> float:
        return float(np.hypot(*self.d))


@dataclass(frozen=True)
class PhasePoint:
    r: float
    theta: float


@dataclass(frozen=True)
class GainProbabilityModel:
    """Constants of ``f(g) = C p^2 + V (1 - p)^2`` for a pair at distance ``D``.

    Args:
        C: Overlap of the success-branch ancilla states.
        V: Failure-branch ancilla overlap divided by the target overlap.
        D: Phase-space distance of the input pair.
    """

    C: float
    V: float
    D: float

    def __post_init__(self):
        # C is an overlap in physical use, but only C >= 0 is needed by the algebra
        if self.C < 0 or self.V < 0 or self.D < 0:
            raise InvalidParameters(f"need C >= 0, V >= 0, D >= 0; got {self}")


def moments_from_fock(rho: State, boundary_tol: float = 1e-8) -> GaussianState:
    """First and second moments of a truncated Fock-space state.

    Raises:
        TruncationBoundary: if the two highest Fock levels carry at least
            ``boundary_tol`` of the population.
    """
    m = as_matrix(rho)
    dim = m.shape[0]
    if dim < 3:
        raise TruncationBoundary("need at least three Fock levels")
    edge = float(np.real(m[-1, -1] + m[-2, -2]))
    if edge >= boundary_tol:
        raise TruncationBoundary(f"population {edge:.3e} on the top two Fock levels")
    qs = (quadrature_q(dim).matrix, quadrature_p(dim).matrix)
    d = np.array([np.real(np.trace(x @ m)) for x in qs])
    gamma = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            anti = qs[i] @ qs[j] + qs[j] @ qs[i]
            gamma[i, j] = np.real(np.trace(anti @ m)) - 2 * d[i] * d[j]
    gamma = (gamma + gamma.T) / 2
    return GaussianState(d, gamma, getattr(rho, "label", None))


def _inv_det(gamma: np.ndarray):
    det = float(np.linalg.det(gamma))
    if det <= 0:
        raise SingularCovariance(f"covariance determinant {det:.3e} is not positive")
    return np.linalg.inv(gamma), det


def wigner(g: GaussianState, q, p):
    """Gaussian Wigner function ``exp(-(x-d)^T gamma^-1 (x-d)) / (pi sqrt(det gamma))``.

    ``q`` and ``p`` broadcast like numpy arrays.
    """
    inv, det = _inv_det(g.gamma)
    dq = np.asarray(q, dtype=float) - g.d[0]
    dp = np.asarray(p, dtype=float) - g.d[1]
    quad = inv[0, 0] * dq * dq + 2 * inv[0, 1] * dq * dp + inv[1, 1] * dp * dp
    return np.exp(-quad) / (math.pi * math.sqrt(det))


def wigner_overlap(a: GaussianState, b: GaussianState) -> float:
    """``Tr(rho_a rho_b) = 2 pi int W_a W_b`` in closed form."""
    inv, det = _inv_det(a.gamma + b.gamma)
    delta = a.d - b.d
    return float(2.0 / math.sqrt(det) * math.exp(-delta @ inv @ delta))


def amplitude_phase(g: GaussianState) -> PhasePoint:
    r = g.amplitude
    if r <= PHASE_EPS:
        raise UndefinedPhase("phase is undefined at zero amplitude")
    return PhasePoint(r, math.atan2(g.d[1], g.d[0]))


def phase_distance(a: GaussianState, b: GaussianState) -> float:
    """Squared Euclidean distance between first moments."""
    delta = a.d - b.d
    return float(delta @ delta)


def relative_phase(a: PhasePoint, b: PhasePoint) -> float:
    """Absolute angular difference wrapped to [0, pi]."""
    diff = math.remainder(a.theta - b.theta, 2 * math.pi)
    return abs(diff)


def printed_phase_bound(gi: float, gj: float) -> float:
    """``sqrt((gi^2 - 1)(gj^2 - 1)) / (gi gj - 1)``, taken as 0 when ``gi = gj = 1``."""
    den = gi * gj - 1.0
    if den <= 0.0:
        return 0.0
    return math.sqrt(max((gi * gi - 1.0) * (gj * gj - 1.0), 0.0)) / den


def required_cosine(ri: float, rj: float, gi: float, gj: float) -> float:
    """Smallest ``cos(theta_ij)`` with ``|d_i - d_j|^2 >= |g_i d_i - g_j d_j|^2``.

    Expanding both sides gives
    ``2 ri rj cos(theta) (gi gj - 1) >= (gi^2 - 1) ri^2 + (gj^2 - 1) rj^2``.
    The amplitude-free printed bound is the minimum of this over ``ri/rj``
    (AM-GM), so it is necessary but not sufficient. Returns -inf when
    ``gi = gj = 1`` (no constraint).
    """
    den = 2.0 * ri * rj * (gi * gj - 1.0)
    num = (gi * gi - 1.0) * ri * ri + (gj * gj - 1.0) * rj * rj
    if den <= 0.0:
        return -math.inf if num <= 0.0 else math.inf
    return num / den


@dataclass
class PairReport:
    i: int
    j: int
    cos_theta: float
    required: float
    printed_bound: float
    margin: float
    satisfied: bool
    printed_bound_satisfied: bool
    degenerate: bool = False


@dataclass
class TheoremReport:
    pairs: List[PairReport]
    satisfied: bool
    printed_bound_satisfied: bool
    tol: float
    notes: List[str] = field(default_factory=list)


def _validate_gains(states: Sequence[GaussianState], gains: Sequence[float]) -> np.ndarray:
    gains = np.asarray(gains, dtype=float).reshape(-1)
    if gains.size != len(states):
        raise InvalidGain(f"{gains.size} gains for {len(states)} states")
    if np.any(gains < 1.0):
        raise InvalidGain(f"gains must be >= 1, got {gains}")
    return gains


def theorem_check(states: Sequence[GaussianState], gains: Sequence[float],
                  tol: float = 1e-12) -> TheoremReport:
    """Existence test for a deterministic noiseless phase-preserving amplifier.

    A pair passes when the phase-space distance does not grow, expressed as
    ``cos(theta_ij) >= required_cosine(...)``. Each pair also carries the
    amplitude-free bound ``sqrt((gi^2-1)(gj^2-1))/(gi gj - 1)``, which every
    passing pair satisfies but which alone does not guarantee a pass.
    """
    gains = _validate_gains(states, gains)
    points = [amplitude_phase(s) for s in states]
    rows = []
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            gi, gj = float(gains[i]), float(gains[j])
            ri, rj = points[i].r, points[j].r
            cos_t = math.cos(relative_phase(points[i], points[j]))
            req = required_cosine(ri, rj, gi, gj)
            printed = printed_phase_bound(gi, gj)
            degenerate = bool(gi * gj - 1.0 <= 0.0)
            margin = cos_t - req
            rows.append(PairReport(i, j, cos_t, req, printed, margin, bool(margin >= -tol),
                                   bool(cos_t - printed >= -tol), degenerate))
    notes = ["pairs with both gains equal to 1 are unconstrained"] if any(r.degenerate for r in rows) else []
    return TheoremReport(rows, all(r.satisfied for r in rows),
                         all(r.printed_bound_satisfied for r in rows), tol, notes)


def printed_corollary_bound(ri: float, rj: float, gi: float) -> float:
    """``sqrt((gi^2 ri^2 - rj^2) / ((gi^2 - 1) ri^2 rj^2))`` for equal target amplitudes.

    With ``gi = 1`` the expression is 0/0; it is taken as 0 when ``ri = rj``
    and +inf otherwise.
    """
    den = (gi * gi - 1.0) * ri * ri * rj * rj
    num = gi * gi * ri * ri - rj * rj
    if den <= 0.0:
        return 0.0 if abs(ri - rj) <= 1e-9 * max(ri, rj) else math.inf
    return math.sqrt(max(num, 0.0) / den)


def corollary_check(states: Sequence[GaussianState], gains: Sequence[float],
                    tol: float = 1e-12) -> TheoremReport:
    """:func:`theorem_check` restricted to sets whose targets share one amplitude.

    Raises:
        TargetAmplitudeMismatch: unless ``g_i |d_i|`` agrees across states
            within 1e-9 (relative).
    """
    gains = _validate_gains(states, gains)
    points = [amplitude_phase(s) for s in states]
    target = np.array([g * p.r for g, p in zip(gains, points)])
    if target.size and np.max(np.abs(target - target[0])) > 1e-9 * max(1.0, target[0]):
        raise TargetAmplitudeMismatch(f"target amplitudes differ: {target}")
    base = theorem_check(states, gains, tol)
    rows = []
    for row in base.pairs:
        printed = printed_corollary_bound(points[row.i].r, points[row.j].r, float(gains[row.i]))
        rows.append(PairReport(row.i, row.j, row.cos_theta, row.required, printed, row.margin,
                               row.satisfied, bool(row.cos_theta - printed >= -tol), row.degenerate))
    return TheoremReport(rows, base.satisfied, all(r.printed_bound_satisfied for r in rows), tol,
                         base.notes)


def gain_probability_f(g: float, pair_distance: float) -> float:
    """Overlap ratio ``Tr(rho_1 rho_2)/Tr(sigma_1 sigma_2)`` for a coherent pair under gain ``g``.

    ``exp((g^2 - 1) D / 2)``, since ``|alpha_1 - alpha_2|^2 = D/2``.
    """
    if g < 1:
        raise InvalidGain(f"gain must be >= 1, got {g}")
    if pair_distance < 0:
        raise InvalidParameters("pair distance must be non-negative")
    return math.exp((g * g - 1.0) * pair_distance / 2.0)


@dataclass(frozen=True)
class MinGain:
    g_min: float
    p0: float
    f_min: float
    constraint_active: bool


def min_gain(model: GainProbabilityModel) -> MinGain:
    """Smallest gain compatible with the probability-optimal point ``p0 = V/(V+C)``.

    Solves ``exp((g^2 - 1) D/2) = C p0^2 + V (1 - p0)^2``. When the right side
    is below 1 no ``g >= 1`` solves it and ``g_min = 1`` is returned with the
    constraint flagged inactive.
    """
    c, v, d = model.C, model.V, model.D
    if c + v <= 0:
        raise DegenerateModel("C + V must be positive")
    if d <= 0:
        raise DegenerateModel("pair distance must be positive")
    p0 = v / (v + c)
    f_min = c * p0 * p0 + v * (1 - p0) ** 2
    if f_min < 1.0:
        return MinGain(1.0, p0, f_min, False)
    return MinGain(math.sqrt(1.0 + 2.0 * math.log(f_min) / d), p0, f_min, True)


def min_gain_threshold(epsilon: float, kappa: float, d_min: float) -> float:
    """``1 + sqrt(epsilon / (kappa d_min^2))``: the gain at which the weakest
    state moves a detectable distance ``epsilon / kappa`` from its input."""
    if epsilon < 0 or kappa <= 0 or d_min <= 0:
        raise InvalidParameters("need epsilon >= 0, kappa > 0, d_min > 0")
    return 1.0 + math.sqrt(epsilon / (kappa * d_min * d_min))


def input_output_distance(state: GaussianState, g: float) -> float:
    """``|(g - 1) d|^2``, the distance between a state and its noiseless image."""
    return phase_distance(state, state.scaled(g))

