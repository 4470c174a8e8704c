"""Success-branch Kraus operators from a feasibility certificate.

Given ``Omega`` factored as coefficients ``c_ki`` and the dual basis of the
inputs, the operators ``M_k = sum_i c_ki |phi_i><dual_i|`` send each input to
``c_ki |phi_i>``. They act only on the span of the inputs; the completeness
deficit ``I - sum_k M_k^dag M_k`` is the failure POVM element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import LinearlyDependentSet, NotPSD, ShapeMismatch, ZeroGamma
from .feasibility import OmegaMatrix
from .states import (
    DensityMatrix,
    PureState,
    State,
    as_matrix,
    gram_matrix,
    overlap,
    state_matrix,
)


@dataclass(frozen=True, eq=False)
class DualBasis:
    """Vectors with ``<dual_i|psi_j> = gammas_i delta_ij`` inside the input span."""

    duals: np.ndarray  # dim x N, one dual per column
    gammas: np.ndarray

    @property
    def n(self) -> int:
        return self.duals.shape[1]

    def biorthogonality_residual(self, states: Sequence[PureState]) -> float:
        psi = state_matrix(states)
        return float(np.max(np.abs(self.duals.conj().T @ psi - np.diag(self.gammas))))


@dataclass(frozen=True, eq=False)
class KrausSet:
    operators: List[np.ndarray]
    coeffs: np.ndarray  # M x N

    @property
    def m(self) -> int:
        return len(self.operators)

    def effect(self) -> np.ndarray:
        """``sum_k M_k^dag M_k``."""
        total = sum(op.conj().T @ op for op in self.operators)
        return (total + total.conj().T) / 2

    def completeness_margin(self) -> float:
        return float(1.0 - np.linalg.eigvalsh(self.effect())[-1])

    def failure_effect(self) -> np.ndarray:
        return np.eye(self.operators[0].shape[1]) - self.effect()

    def apply(self, state: State) -> np.ndarray:
        """Unnormalized success-branch output ``sum_k M_k rho M_k^dag``."""
        rho = as_matrix(state)
        return sum(op @ rho @ op.conj().T for op in self.operators)


def dual_basis(states: Sequence[PureState], tol: float = 1e-10) -> DualBasis:
    """Biorthogonal duals inside span(states), normalized so every gamma is 1.

    Raises:
        LinearlyDependentSet: if the Gram matrix is (numerically) singular.
    """
    gram = gram_matrix(states)
    if gram.min_eigenvalue <= tol:
        raise LinearlyDependentSet(
            f"input Gram matrix has minimum eigenvalue {gram.min_eigenvalue:.3e}"
        )
    psi = state_matrix(states)
    duals = psi @ np.linalg.inv(psi.conj().T @ psi)
    gammas = np.einsum("ni,ni->i", duals.conj(), psi)
    return DualBasis(duals, gammas)


def factor_omega(omega, rank_tol: float = 1e-10) -> np.ndarray:
    """Coefficient matrix ``C`` (M x N) with ``sum_k conj(c_kj) c_ki = Omega_ij``.

    In matrix form ``C^dag C = Omega^T`` (= conj(Omega)), which is the
    ordering that makes ``M_k |psi_i> = c_ki |phi_i>`` reproduce the input
    Gram matrix ``<psi_j|psi_i>``. For real Omega this is plain ``C^dag C``.
    ``M`` is the numerical rank: eigenvalues above ``rank_tol * lambda_max``.

    Raises:
        NotPSD: if Omega has an eigenvalue below ``-rank_tol * max(1, lambda_max)``.
    """
    om = omega.entries if isinstance(omega, OmegaMatrix) else np.asarray(omega, dtype=complex)
    target = om.T
    target = (target + target.conj().T) / 2
    w, v = np.linalg.eigh(target)
    top = max(float(w[-1]), 0.0)
    if w[0] < -rank_tol * max(1.0, top):
        raise NotPSD(f"Omega has eigenvalue {w[0]:.3e}")
    if top == 0.0:
        return np.zeros((0, om.shape[0]), dtype=complex)
    keep = w > rank_tol * top
    # rows are sqrt(lambda_k) v_k^dag, so C^dag C = sum_k lambda_k v_k v_k^dag
    return (np.sqrt(w[keep])[:, None] * v[:, keep].conj().T)[::-1]


def build_kraus(c: np.ndarray, duals: DualBasis, targets: Sequence[PureState]) -> KrausSet:
    """``M_k = sum_i (c_ki / gamma_i) |phi_i><dual_i|``."""
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    n = duals.n
    if c.shape[1] != n or len(targets) != n:
        raise ShapeMismatch(f"coefficients {c.shape}, {n} duals, {len(targets)} targets")
    if np.any(np.abs(duals.gammas) <= 1e-10):
        raise ZeroGamma("a dual vector has vanishing overlap with its partner")
    phi = state_matrix(targets)
    scaled = duals.duals / duals.gammas.conj()[None, :]
    ops = [phi @ np.diag(row) @ scaled.conj().T for row in c]
    return KrausSet(ops, c)


@dataclass
class StateCheck:
    index: int
    success_probability: float
    expected_probability: Optional[float]
    coefficient_probability: float
    fidelity: float
    action_residual: float
    conjugation_residual: float
    passed: bool


@dataclass
class MixedCheck:
    index: int
    success_probability: float
    fidelity: float


@dataclass
class VerificationReport:
    states: List[StateCheck]
    completeness_margin: float
    checks: dict
    passed: bool
    mixed: List[MixedCheck] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)


def verify_kraus(kraus: KrausSet, inputs, targets: Optional[Sequence[PureState]] = None,
                 probs: Optional[Sequence[float]] = None,
                 mixed_inputs: Sequence[DensityMatrix] = (),
                 prob_tol: float = 1e-8, fidelity_tol: float = 1e-8,
                 completeness_tol: float = 1e-9) -> VerificationReport:
    """Check a Kraus set against its amplification task.

    Per input the report carries the success probability obtained by applying
    the operators, the target fidelity of the normalized output, the action
    residual ``max_k ||M_k psi_i - c_ki phi_i||`` and the conjugation residual
    ``max_k ||M_k rho_i M_k^dag - |c_ki|^2 sigma_i||``. Mixed inputs are
    evaluated for information only and never fail the report.

    ``inputs`` may also be an :class:`~ampforge.classify.AmplificationSpec`,
    in which case targets and probabilities are taken from it.
    """
    if targets is None:
        spec = inputs
        inputs, targets = spec.inputs, spec.targets
        probs = spec.probs if probs is None else probs
    if len(inputs) != len(targets) or len(inputs) != kraus.coeffs.shape[1]:
        raise ShapeMismatch("inputs, targets and coefficient columns must align")
    dim_in = kraus.operators[0].shape[1] if kraus.operators else inputs[0].dim
    dim_out = kraus.operators[0].shape[0] if kraus.operators else targets[0].dim
    if any(s.dim != dim_in for s in inputs) or any(t.dim != dim_out for t in targets):
        raise ShapeMismatch("state dimensions do not match the operator shapes")
    if probs is not None and len(probs) != len(inputs):
        raise ShapeMismatch("one probability per input is required")

    rows = []
    for i, (psi, phi) in enumerate(zip(inputs, targets)):
        out = kraus.apply(psi)
        prob = float(np.real(np.trace(out)))
        fid = float(np.real(np.vdot(phi.amplitudes, out @ phi.amplitudes)) / prob) if prob > 0 else 0.0
        sigma = as_matrix(phi)
        rho = as_matrix(psi)
        act = 0.0
        conj_res = 0.0
        for k, op in enumerate(kraus.operators):
            c = kraus.coeffs[k, i]
            act = max(act, float(np.linalg.norm(op @ psi.amplitudes - c * phi.amplitudes)))
            conj_res = max(conj_res, float(np.max(np.abs(op @ rho @ op.conj().T - abs(c) ** 2 * sigma))))
        coeff_prob = float(np.sum(np.abs(kraus.coeffs[:, i]) ** 2))
        expected = None if probs is None else float(probs[i])
        ok = fid >= 1 - fidelity_tol and conj_res <= prob_tol and act <= 1e-9
        ok = ok and abs(prob - coeff_prob) <= prob_tol
        if expected is not None:
            ok = ok and abs(prob - expected) <= prob_tol
        rows.append(StateCheck(i, prob, expected, coeff_prob, fid, act, conj_res, bool(ok)))

    margin = kraus.completeness_margin() if kraus.operators else 1.0
    mixed = []
    for j, rho in enumerate(mixed_inputs):
        out = kraus.apply(rho)
        prob = float(np.real(np.trace(out)))
        best = max((overlap(phi, DensityMatrix(out / prob)) for phi in targets), default=0.0) if prob > 1e-14 else 0.0
        mixed.append(MixedCheck(j, prob, float(best)))

    checks = {
        "probability": all(abs(r.success_probability - (r.expected_probability if r.expected_probability is not None else r.coefficient_probability)) <= prob_tol for r in rows),
        "fidelity": all(r.fidelity >= 1 - fidelity_tol for r in rows),
        "action": all(r.action_residual <= 1e-9 for r in rows),
        "conjugation": all(r.conjugation_residual <= prob_tol for r in rows),
        "completeness": margin >= -completeness_tol,
    }
    tolerances = {
        "probability": prob_tol,
        "fidelity": fidelity_tol,
        "completeness": completeness_tol,
        "action": 1e-9,
    }
    return VerificationReport(rows, margin, checks, all(checks.values()), mixed, tolerances)


def synthesize(inputs: Sequence[PureState], targets: Sequence[PureState], omega,
               rank_tol: float = 1e-10) -> KrausSet:
    """factor_omega -> dual_basis -> build_kraus in one call."""
    c = factor_omega(omega, rank_tol)
    return build_kraus(c, dual_basis(inputs), targets)


def gram_reconstruction_residual(inputs: Sequence[PureState], targets: Sequence[PureState],
                                 coeffs: np.ndarray, residual_k: np.ndarray) -> float:
    """max_ij |<psi_j|psi_i> - sum_k conj(c_kj) c_ki <phi_j|phi_i> - K_ij|."""
    g_in = gram_matrix(inputs).entries
    g_out = gram_matrix(targets).entries
    c = np.asarray(coeffs)
    omega_rec = c.T @ c.conj()  # [i, j] = sum_k c_ki conj(c_kj)
    return float(np.max(np.abs(g_in - omega_rec * g_out - residual_k)))
