"""Finite-dimensional states, observables and the overlap/distance arithmetic.

Single-mode bosonic operators live in a truncated Fock basis. Quadratures use
the hbar = 1 convention ``Q = (a + a^dag)/sqrt(2)``, ``P = (a - a^dag)/(i sqrt(2))``
so that the vacuum covariance matrix is the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import pdtrc

from .errors import (
    DimensionMismatch,
    EmptySet,
    InvalidDim,
    InvalidState,
    NegativeVariance,
    TruncationTooSmall,
)

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-10
PSD_TOL = 1e-9
TAIL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector.

    Args:
        amplitudes: Complex coefficients in the working basis.
        label: Optional human-readable name.
    """

    amplitudes: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size < 1:
            raise InvalidDim("a state needs at least one amplitude")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidState(f"state norm is {norm!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, label: Optional[str] = None) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InvalidState("cannot normalize the zero vector")
        return cls(amps / norm, label)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidDim(f"density matrix must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise InvalidState("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > NORM_TOL:
            raise InvalidState(f"density matrix trace is {np.trace(m).real!r}")
        if np.linalg.eigvalsh(m)[0] < -PSD_TOL:
            raise InvalidState("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


State = Union[PureState, DensityMatrix]


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator, optionally named (``number``, ``quadrature-q``...)."""

    matrix: np.ndarray
    name: Optional[str] = None
    _spectrum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidDim(f"observable must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise InvalidState("observable is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_spectrum", np.linalg.eigvalsh(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._spectrum

    @property
    def max_eigenvalue(self) -> float:
        return float(self._spectrum[-1])

    def squared(self) -> "Observable":
        sq = self.matrix @ self.matrix
        return Observable((sq + sq.conj().T) / 2, None if self.name is None else f"{self.name}^2")


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Pairwise overlaps with ``entries[i, j] = <psi_j|psi_i>``."""

    entries: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        g = np.array(self.entries, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 1:
            raise InvalidDim(f"Gram matrix must be square, got shape {g.shape}")
        if np.max(np.abs(g - g.conj().T)) > HERMITIAN_TOL:
            raise InvalidState("Gram matrix is not Hermitian")
        g.setflags(write=False)
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(g.shape[0]))
        if len(labels) != g.shape[0]:
            raise DimensionMismatch("one label per Gram row is required")
        object.__setattr__(self, "entries", g)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])


def default_dim(alpha_abs: float) -> int:
    """Truncation size keeping the Poisson tail below 1e-8 for |alpha| <= 4."""
    a = float(alpha_abs)
    return max(20, math.ceil(a * a + 6 * a + 10))


def coherent_tail_mass(alpha: complex, dim: int) -> float:
    """Probability weight of a coherent state on Fock levels n >= dim."""
    return float(pdtrc(dim - 1, abs(alpha) ** 2))


def make_coherent_state(alpha: complex, dim: Optional[int] = None, label: Optional[str] = None) -> PureState:
    """Truncated coherent state ``|alpha>``.

    The amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` are built by
    recurrence and renormalized after truncation.

    Raises:
        InvalidDim: if ``dim < 1``.
        TruncationTooSmall: if more than 1e-8 of the Poisson mass lies beyond
            the truncation.
    """
    alpha = complex(alpha)
    if dim is None:
        dim = default_dim(abs(alpha))
    if dim < 1:
        raise InvalidDim(f"dim must be >= 1, got {dim}")
    tail = coherent_tail_mass(alpha, dim)
    if tail > TAIL_TOL:
        raise TruncationTooSmall(
            f"tail mass {tail:.3e} beyond n={dim - 1} for |alpha|={abs(alpha):.4g}; increase dim"
        )
    amps = np.empty(dim, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    amps /= np.linalg.norm(amps)
    return PureState(amps, label if label is not None else f"alpha={alpha:.6g}")


def fock_state(n: int, dim: int) -> PureState:
    if not 0 <= n < dim:
        raise InvalidDim(f"Fock level {n} outside truncation {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return PureState(v, f"|{n}>")


def thermal_state(nbar: float, dim: int) -> DensityMatrix:
    """Thermal state with mean photon number ``nbar``, renormalized on ``dim`` levels."""
    if nbar < 0:
        raise InvalidState("mean photon number must be non-negative")
    n = np.arange(dim)
    if nbar == 0:
        w = (n == 0).astype(float)
    else:
        w = (nbar / (nbar + 1)) ** n / (nbar + 1)
    w = w / w.sum()
    return DensityMatrix(np.diag(w).astype(complex), f"thermal nbar={nbar:g}")


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim, dtype=complex) / dim, "maximally mixed")


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_operator(dim: int) -> Observable:
    return Observable(np.diag(np.arange(dim, dtype=float)).astype(complex), "number")


def quadrature_q(dim: int) -> Observable:
    a = annihilation(dim)
    return Observable((a + a.conj().T) / math.sqrt(2), "quadrature-q")


def quadrature_p(dim: int) -> Observable:
    a = annihilation(dim)
    return Observable((a - a.conj().T) / (1j * math.sqrt(2)), "quadrature-p")


def as_matrix(state: State) -> np.ndarray:
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    return state.matrix


def as_density(state: State) -> DensityMatrix:
    if isinstance(state, PureState):
        return state.density_matrix()
    return state


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionMismatch(f"dimensions differ: {dims}")


def _trace_with(op: np.ndarray, state: State) -> complex:
    if isinstance(state, PureState):
        v = state.amplitudes
        return complex(np.vdot(v, op @ v))
    return complex(np.trace(op @ state.matrix))


def expectation(obs: Observable, state: State) -> float:
    """``Tr(A rho)`` as a real number."""
    _check_dims(obs.dim, state.dim)
    val = _trace_with(obs.matrix, state)
    if abs(val.imag) > HERMITIAN_TOL * max(1.0, abs(val.real)):
        raise InvalidState(f"expectation has imaginary part {val.imag:.3e}")
    return val.real


def variance(obs: Observable, state: State) -> float:
    _check_dims(obs.dim, state.dim)
    second = _trace_with(obs.matrix @ obs.matrix, state).real
    first = expectation(obs, state)
    return second - first * first


def fluctuation(obs: Observable, state: State) -> float:
    """Standard deviation ``sqrt(Tr(A^2 rho) - Tr(A rho)^2)``.

    Round-off negatives down to -1e-12 are clamped to zero; anything more
    negative raises :class:`NegativeVariance`.
    """
    var = variance(obs, state)
    if var < -1e-12:
        raise NegativeVariance(f"variance {var:.3e} is negative")
    return math.sqrt(max(var, 0.0))


def overlap(a: State, b: State) -> float:
    """``Tr(rho_a rho_b)``; equals ``|<a|b>|^2`` for pure states."""
    _check_dims(a.dim, b.dim)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    if isinstance(a, PureState):
        a, b = b, a
    if isinstance(b, PureState):
        v = b.amplitudes
        return float(np.vdot(v, a.matrix @ v).real)
    # Tr(AB) for Hermitian A, B is sum_ij A_ij conj(B_ij)
    return float(np.real(np.sum(a.matrix * b.matrix.conj())))


def trace_distance(a: State, b: State) -> float:
    """Half the trace norm of ``rho_a - rho_b``."""
    _check_dims(a.dim, b.dim)
    diff = as_matrix(a) - as_matrix(b)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def state_matrix(states: Sequence[PureState]) -> np.ndarray:
    """Column-stack state vectors into a ``dim x N`` matrix."""
    if len(states) == 0:
        raise EmptySet("at least one state is required")
    _check_dims(*(s.dim for s in states))
    return np.column_stack([s.amplitudes for s in states])


def gram_matrix(states: Sequence[PureState]) -> GramMatrix:
    psi = state_matrix(states)
    entries = psi.T @ psi.conj()
    entries = (entries + entries.conj().T) / 2
    labels = tuple(s.label if s.label is not None else str(i) for i, s in enumerate(states))
    return GramMatrix(entries, labels)


def fidelity_pure(target: PureState, state: State) -> float:
    """``<phi|rho|phi>`` of a pure target against any state."""
    return overlap(target, state)
