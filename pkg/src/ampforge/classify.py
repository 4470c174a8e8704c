"""Gain, noiselessness and the deterministic / linear / noiseless taxonomy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import feasibility
from .errors import (
    DimensionMismatch,
    GainInconsistent,
    InvalidProbability,
    InvalidState,
    LengthMismatch,
    ZeroInputSignal,
)
from .states import (
    DensityMatrix,
    Observable,
    PureState,
    State,
    as_matrix,
    expectation,
    fluctuation,
    gram_matrix,
    trace_distance,
)

GAIN_CONSISTENCY_TOL = 1e-6
LINEARITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AmplificationSpec:
    """Inputs, targets, gains and success probabilities of an amplification task.

    ``gains`` has one row per state and either one column shared by every
    observable or one column per observable. Gains are validated against the
    states: ``<A>_target = g <A>_input`` within 1e-6 for every observable.
    """

    inputs: Tuple[State, ...]
    targets: Tuple[State, ...]
    probs: np.ndarray
    gains: Optional[np.ndarray] = None
    observables: Tuple[Observable, ...] = ()

    def __post_init__(self):
        inputs, targets = tuple(self.inputs), tuple(self.targets)
        if len(inputs) != len(targets) or not inputs:
            raise LengthMismatch(f"{len(inputs)} inputs vs {len(targets)} targets")
        dims = {s.dim for s in inputs + targets}
        if len(dims) != 1:
            raise DimensionMismatch(f"inputs and targets must share one dimension, got {sorted(dims)}")
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.size == 1 and len(inputs) > 1:
            probs = np.full(len(inputs), probs[0])
        if probs.size != len(inputs):
            raise LengthMismatch("one success probability per input is required")
        if np.any(probs < 0) or np.any(probs > 1):
            raise InvalidProbability(f"probabilities must lie in [0, 1], got {probs}")
        obs = tuple(self.observables)
        for o in obs:
            if o.dim not in dims:
                raise DimensionMismatch(f"observable dimension {o.dim} does not match states")
        gains = None
        if self.gains is not None:
            gains = np.array(self.gains, dtype=float)
            if gains.ndim == 1:
                gains = gains[:, None]
            if gains.shape[0] != len(inputs) or gains.shape[1] not in (1, max(1, len(obs))):
                raise LengthMismatch(f"gains shape {gains.shape} does not fit {len(inputs)} states")
            if np.any(gains < 0):
                raise GainInconsistent("gains must be non-negative")
            for k, o in enumerate(obs):
                col = gains[:, min(k, gains.shape[1] - 1)]
                for i, (rho, sigma) in enumerate(zip(inputs, targets)):
                    e_in, e_out = expectation(o, rho), expectation(o, sigma)
                    if abs(e_out - col[i] * e_in) > GAIN_CONSISTENCY_TOL * max(1.0, abs(e_out)):
                        raise GainInconsistent(
                            f"state {i}, observable {o.name or k}: <A>_out={e_out:.6g} "
                            f"but g*<A>_in={col[i] * e_in:.6g}"
                        )
            gains.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "observables", obs)

    @property
    def n(self) -> int:
        return len(self.inputs)

    def gain_column(self, k: int = 0) -> np.ndarray:
        if self.gains is None:
            raise GainInconsistent("spec carries no gains")
        return self.gains[:, min(k, self.gains.shape[1] - 1)]


@dataclass
class AmplifierClass:
    deterministic: bool
    noiseless: bool
    linear: bool
    feasible: bool
    notes: str = ""
    amplifying: bool = True
    noiseless_by_observable: Tuple[bool, ...] = ()
    certificate: Optional[object] = field(default=None, repr=False)


def gain(obs: Observable, input: State, output: State) -> float:
    e_in = expectation(obs, input)
    if abs(e_in) <= 1e-12:
        raise ZeroInputSignal("input expectation value vanishes; gain is undefined")
    return expectation(obs, output) / e_in


def is_noiseless(obs: Observable, input: State, output: State, tol: float = 1e-8) -> bool:
    """Whether the fluctuation of ``obs`` is unchanged by the transformation."""
    if input.dim != output.dim:
        raise DimensionMismatch(f"dimensions differ: {input.dim} vs {output.dim}")
    return abs(fluctuation(obs, output) - fluctuation(obs, input)) <= tol


def noiseless_residual(obs: Observable, input: State, output: State, g: float,
                       gain_tol: float = GAIN_CONSISTENCY_TOL) -> float:
    """``Tr{A^2 (sigma - rho)} - (g^2 - 1) Tr(A rho)^2``.

    Zero is necessary for noiseless amplification at gain ``g``; when the gain
    relation holds the value equals ``Var_out - Var_in``.

    Raises:
        GainInconsistent: if ``<A>_out`` differs from ``g <A>_in`` by more than
            ``gain_tol`` (relative to ``max(1, |<A>_out|)``).
    """
    e_in, e_out = expectation(obs, input), expectation(obs, output)
    if abs(e_out - g * e_in) > gain_tol * max(1.0, abs(e_out)):
        raise GainInconsistent(f"<A>_out={e_out:.6g} is not {g:g} * <A>_in={e_in:.6g}")
    a2 = obs.matrix @ obs.matrix
    delta = as_matrix(output) - as_matrix(input)
    second = float(np.real(np.trace(a2 @ delta)))
    return second - (g * g - 1.0) * e_in * e_in


def _pure(states: Sequence[State]) -> List[PureState]:
    out = []
    for s in states:
        if isinstance(s, PureState):
            out.append(s)
            continue
        w, v = np.linalg.eigh(s.matrix)
        if w[-1] < 1 - 1e-10:
            raise InvalidState("Gram feasibility needs pure states")
        out.append(PureState.normalized(v[:, -1], s.label))
    return out


def feasibility_of(spec: AmplificationSpec, tol: float = feasibility.DEFAULT_TOL,
                   seeds: int = 64, seed: int = 0, workers: int = 1):
    g_pi = gram_matrix(_pure(spec.inputs))
    g_xi = gram_matrix(_pure(spec.targets))
    return feasibility.decide(g_pi, g_xi, spec.probs, tol=tol, seeds=seeds, seed=seed, workers=workers)


def classify(spec: AmplificationSpec, tol: float = feasibility.DEFAULT_TOL, seeds: int = 64,
             seed: int = 0, workers: int = 1) -> AmplifierClass:
    """Place a task in the deterministic/linear/noiseless taxonomy.

    Feasibility is delegated to the Gram test (closed form for two states at
    a common probability, penalty search otherwise). A deterministic, linear,
    noiseless task with gain above one is reported infeasible regardless.
    """
    deterministic = bool(np.all(spec.probs == 1.0))
    linear = True
    amplifying = False
    if spec.gains is not None:
        for k in range(spec.gains.shape[1]):
            col = spec.gains[:, k]
            ref = col[0]
            if np.any(np.abs(col - ref) > LINEARITY_TOL * max(1.0, abs(ref))):
                linear = False
        amplifying = bool(np.any(np.abs(spec.gains - 1.0) > LINEARITY_TOL))
    per_obs = tuple(
        all(is_noiseless(o, r, s) for r, s in zip(spec.inputs, spec.targets)) for o in spec.observables
    )
    noiseless = bool(per_obs) and all(per_obs)

    result = feasibility_of(spec, tol, seeds, seed, workers)
    feasible = bool(result.feasible)
    notes = []
    if not amplifying:
        notes.append("no amplification: every gain equals 1")
    if isinstance(result, feasibility.NotFound):
        notes.append(f"no Omega certificate found (best penalty {result.best_penalty:.3e})")
    if deterministic and linear and noiseless and spec.gains is not None and np.any(spec.gains > 1 + LINEARITY_TOL):
        if feasible:
            notes.append("Gram certificate exists but is overridden by the linear-noiseless-deterministic rule")
        notes.append("a deterministic linear amplifier with gain > 1 cannot be noiseless")
        feasible = False
    return AmplifierClass(deterministic, noiseless, linear, feasible, "; ".join(notes),
                          amplifying, per_obs, result)


@dataclass
class PairDistance:
    index: int
    before: float
    after: float
    ok: bool


@dataclass
class MonotonicityReport:
    pairs: List[PairDistance]
    violations: int
    tol: float


def monotonicity_check(pairs_before: Sequence[Tuple[State, State]],
                       pairs_after: Sequence[Tuple[State, State]],
                       tol: float = 1e-9) -> MonotonicityReport:
    """Trace distance before vs after a map; flags any increase beyond ``tol``."""
    if len(pairs_before) != len(pairs_after):
        raise LengthMismatch(f"{len(pairs_before)} pairs before vs {len(pairs_after)} after")
    rows = []
    for i, ((a, b), (c, d)) in enumerate(zip(pairs_before, pairs_after)):
        before = trace_distance(a, b)
        after = trace_distance(c, d)
        rows.append(PairDistance(i, before, after, before + tol >= after))
    return MonotonicityReport(rows, sum(not r.ok for r in rows), tol)


def depolarize(state: State, lam: float) -> DensityMatrix:
    """``(1 - lam) rho + lam I/d``."""
    rho = as_matrix(state)
    d = rho.shape[0]
    return DensityMatrix((1 - lam) * rho + lam * np.eye(d) / d)


def normalized_output(kraus, state: State) -> Optional[DensityMatrix]:
    """Success-branch output of a Kraus set, renormalized; None if it never fires."""
    out = kraus.apply(state)
    tr = float(np.real(np.trace(out)))
    if tr <= 1e-14:
        return None
    out = out / tr
    return DensityMatrix((out + out.conj().T) / 2)

