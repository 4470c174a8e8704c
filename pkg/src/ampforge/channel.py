"""Lossy channels, distance trajectories and the decay rate of distinguishability.

The channel family is amplitude damping with a (possibly time-dependent)
rate ``gamma(t)`` and integrated rate ``Gamma(t)``. On Gaussian states it acts
as ``d -> exp(-Gamma/2) d`` and ``gamma -> exp(-Gamma) gamma + (1 - exp(-Gamma)) I``,
so every phase-space distance decays as ``exp(-Gamma(t)) D(0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import comb

from .errors import (
    InvalidGain,
    InvalidParameters,
    NegativeTime,
    ThresholdUnreachable,
    TooFewPoints,
    UnsortedTimes,
)
from .gaussian import GaussianState, phase_distance
from .states import DensityMatrix, State, as_matrix

KINDS = ("pure-loss", "time-dependent-loss")
TRAJECTORY_COLUMNS = ("t", "D_plain", "D_amplified", "chi_plain", "chi_amplified")


@dataclass(frozen=True)
class ChannelModel:
    """Loss channel with rate ``rate_fn(t)`` and integrated rate ``integrated(t)``."""

    kind: str
    rate_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    integrated_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    markovian: bool
    description: str = ""
    constant_rate: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameters(f"unknown channel kind {self.kind!r}; expected one of {KINDS}")

    def rate(self, t):
        return self.rate_fn(np.asarray(t, dtype=float))

    def integrated(self, t):
        return self.integrated_fn(np.asarray(t, dtype=float))

    @classmethod
    def pure_loss(cls, rate: float = 1.0) -> "ChannelModel":
        if rate < 0:
            raise InvalidParameters("loss rate must be non-negative")
        return cls("pure-loss", lambda t: np.full_like(t, rate), lambda t: rate * t, True,
                   f"constant rate {rate:g}", float(rate))

    @classmethod
    def oscillating(cls, base: float = 1.0, amplitude: float = 1.5, omega: float = 2.0) -> "ChannelModel":
        """``gamma(t) = base + amplitude cos(omega t)``; non-Markovian when ``|amplitude| > base``."""
        if omega <= 0:
            raise InvalidParameters("omega must be positive")
        return cls(
            "time-dependent-loss",
            lambda t: base + amplitude * np.cos(omega * t),
            lambda t: base * t + amplitude / omega * np.sin(omega * t),
            bool(base - abs(amplitude) >= 0),
            f"rate {base:g} + {amplitude:g} cos({omega:g} t)",
        )

    @classmethod
    def tabulated(cls, times: Sequence[float], rates: Sequence[float]) -> "ChannelModel":
        """Piecewise-linear rate through ``(times, rates)``, held constant outside.

        The first node must be ``t = 0``. Gamma is integrated exactly for the
        piecewise-linear rate.
        """
        ts = np.asarray(times, dtype=float)
        rs = np.asarray(rates, dtype=float)
        if ts.ndim != 1 or ts.shape != rs.shape or ts.size < 2:
            raise InvalidParameters("need matching 1-D times and rates with at least two nodes")
        if ts[0] != 0.0:
            raise InvalidParameters("tabulated rates must start at t = 0")
        if np.any(np.diff(ts) <= 0):
            raise UnsortedTimes("tabulated times must be strictly increasing")
        cum = np.concatenate([[0.0], np.cumsum(np.diff(ts) * (rs[1:] + rs[:-1]) / 2)])

        def integrated(t):
            t = np.asarray(t, dtype=float)
            idx = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, ts.size - 2)
            h = np.clip(t - ts[idx], 0.0, None)
            span = ts[idx + 1] - ts[idx]
            slope = (rs[idx + 1] - rs[idx]) / span
            inside = t <= ts[-1]
            within = cum[idx] + rs[idx] * h + 0.5 * slope * h * h
            beyond = cum[-1] + rs[-1] * (t - ts[-1])
            return np.where(inside, within, beyond)

        return cls("time-dependent-loss", lambda t: np.interp(t, ts, rs), integrated,
                   bool(np.all(rs >= 0)), f"tabulated over {ts.size} nodes")


def _check_time(t: float) -> float:
    t = float(t)
    if t < 0:
        raise NegativeTime(f"time must be non-negative, got {t}")
    return t


def transmissivity(channel: ChannelModel, t: float) -> float:
    """``eta = exp(-Gamma(t))``."""
    return float(math.exp(-float(channel.integrated(_check_time(t)))))


def apply_loss(state: Union[GaussianState, complex], t: float,
               channel: Optional[ChannelModel] = None) -> Union[GaussianState, complex]:
    """Evolve a Gaussian state or a coherent amplitude for time ``t``."""
    channel = channel or ChannelModel.pure_loss()
    eta = transmissivity(channel, t)
    if isinstance(state, GaussianState):
        gamma = eta * state.gamma + (1.0 - eta) * np.eye(2)
        return GaussianState(math.sqrt(eta) * state.d, gamma, state.label)
    return complex(state) * math.sqrt(eta)


def _check_times(times) -> np.ndarray:
    ts = np.asarray(times, dtype=float).reshape(-1)
    if ts.size and ts[0] < 0:
        raise NegativeTime("times must start at or after 0")
    if np.any(np.diff(ts) < 0):
        raise UnsortedTimes("times must be sorted ascending")
    return ts


def distance_trajectory(a: GaussianState, b: GaussianState, channel: ChannelModel,
                        times: Sequence[float]) -> List[Tuple[float, float]]:
    """``(t, D(t))`` with ``D`` the phase-space distance of the evolved pair."""
    ts = _check_times(times)
    return [(float(t), phase_distance(apply_loss(a, t, channel), apply_loss(b, t, channel))) for t in ts]


def decay_rate(series: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """``chi = dD/dt`` by second-order finite differences (one-sided at the ends).

    Raises:
        TooFewPoints: fewer than three samples.
        UnsortedTimes: times not strictly increasing.
    """
    if len(series) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(series)}")
    arr = np.asarray(series, dtype=float)
    ts, ds = arr[:, 0], arr[:, 1]
    if np.any(np.diff(ts) <= 0):
        raise UnsortedTimes("times must be strictly increasing")
    chi = np.gradient(ds, ts, edge_order=2)
    return [(float(t), float(c)) for t, c in zip(ts, chi)]


def analytic_decay_rate(channel: ChannelModel, d0: float, times) -> np.ndarray:
    """``-gamma(t) exp(-Gamma(t)) D(0)`` for this channel family."""
    ts = np.asarray(times, dtype=float)
    return -channel.rate(ts) * np.exp(-channel.integrated(ts)) * d0


def revival_mask(channel: ChannelModel, times) -> np.ndarray:
    """Times at which the rate is negative, where ``chi > 0`` is predicted."""
    return np.asarray(channel.rate(np.asarray(times, dtype=float)) < 0)


@dataclass(frozen=True)
class Horizon:
    t_plain: float
    t_amplified: float
    d0: float
    gain: float
    threshold: float


def detection_horizon(a: GaussianState, b: GaussianState, gain: float, channel: ChannelModel,
                      threshold: float) -> Horizon:
    """Times at which ``D(t)`` and ``g^2 D(t)`` fall to a detector threshold.

    Raises:
        ThresholdUnreachable: if the threshold is not below the plain initial
            distance, so one of the crossings does not exist.
    """
    if channel.constant_rate is None or channel.constant_rate <= 0:
        raise InvalidParameters("detection horizon needs a constant positive loss rate")
    if gain < 1:
        raise InvalidGain(f"gain must be >= 1, got {gain}")
    if threshold <= 0:
        raise InvalidParameters("threshold must be positive")
    d0 = phase_distance(a, b)
    amp = gain * gain * d0
    if threshold >= amp:
        raise ThresholdUnreachable(f"threshold {threshold:g} is not below the amplified distance {amp:g}")
    if threshold >= d0:
        raise ThresholdUnreachable(f"threshold {threshold:g} is not below the initial distance {d0:g}")
    rate = channel.constant_rate
    return Horizon(math.log(d0 / threshold) / rate, math.log(amp / threshold) / rate, d0, gain, threshold)


def trajectory_table(a: GaussianState, b: GaussianState, gain: float, channel: ChannelModel,
                     times: Sequence[float]) -> List[dict]:
    """Plain and uniformly amplified trajectories side by side."""
    plain = distance_trajectory(a, b, channel, times)
    amped = distance_trajectory(a.scaled(gain), b.scaled(gain), channel, times)
    chi_p = decay_rate(plain)
    chi_a = decay_rate(amped)
    return [
        {"t": t, "D_plain": dp, "D_amplified": da, "chi_plain": cp, "chi_amplified": ca}
        for (t, dp), (_, da), (_, cp), (_, ca) in zip(plain, amped, chi_p, chi_a)
    ]


def loss_kraus(eta: float, dim: int) -> List[np.ndarray]:
    """Amplitude-damping Kraus operators
    ``E_k = sum_n sqrt(C(n, k)) eta^{(n-k)/2} (1 - eta)^{k/2} |n-k><n|``."""
    if not 0 <= eta <= 1:
        raise InvalidParameters(f"transmissivity must lie in [0, 1], got {eta}")
    ops = []
    for k in range(dim):
        e = np.zeros((dim, dim))
        for n in range(k, dim):
            e[n - k, n] = math.sqrt(comb(n, k, exact=True)) * eta ** ((n - k) / 2) * (1 - eta) ** (k / 2)
        ops.append(e)
    return ops


def apply_loss_fock(state: State, t: float, channel: Optional[ChannelModel] = None) -> DensityMatrix:
    """Fock-space version of :func:`apply_loss` via :func:`loss_kraus`."""
    channel = channel or ChannelModel.pure_loss()
    eta = transmissivity(channel, t)
    rho = as_matrix(state)
    out = sum(e @ rho @ e.T for e in loss_kraus(eta, rho.shape[0]))
    return DensityMatrix((out + out.conj().T) / 2)
