import math

import numpy as np
import pytest

from ampforge import feasibility as fz
from ampforge import kraus as kr
from ampforge.errors import LinearlyDependentSet, NotPSD, ShapeMismatch
from ampforge.states import DensityMatrix, PureState, fock_state, gram_matrix, make_coherent_state

from corpus import coherent_pair, random_feasible_spec

PLUS = PureState(np.array([1, 1]) / math.sqrt(2))


def test_dual_basis_orthonormal_inputs():
    basis = [fock_state(i, 3) for i in range(3)]
    duals = kr.dual_basis(basis)
    np.testing.assert_allclose(duals.duals, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(duals.gammas, 1)


def test_dual_basis_two_state():
    states = [fock_state(0, 2), PLUS]
    duals = kr.dual_basis(states)
    d0 = duals.duals[:, 0]
    assert abs(d0[0] + d0[1]) < 1e-12  # along (1, -1)
    assert duals.biorthogonality_residual(states) < 1e-12


def test_dual_basis_dependent():
    with pytest.raises(LinearlyDependentSet):
        kr.dual_basis([fock_state(0, 2), fock_state(0, 2)])


def test_factor_omega_identity_and_rank_one():
    c = kr.factor_omega(np.eye(2))
    np.testing.assert_allclose(c.conj().T @ c, np.eye(2), atol=1e-12)
    c1 = kr.factor_omega(np.ones((2, 2)))
    assert c1.shape == (1, 2)
    assert abs(c1[0, 0]) == pytest.approx(1) and c1[0, 1] / c1[0, 0] == pytest.approx(1)


def test_factor_omega_not_psd():
    with pytest.raises(NotPSD):
        kr.factor_omega(np.array([[0.5, 0.51], [0.51, 0.5]]))


def test_factor_omega_complex_convention():
    om = np.array([[0.5, 0.3j], [-0.3j, 0.5]])
    c = kr.factor_omega(om)
    np.testing.assert_allclose(c.T @ c.conj(), om, atol=1e-12)


def test_build_kraus_single_state():
    ks = kr.build_kraus(np.array([[1.0]]), kr.dual_basis([fock_state(0, 2)]), [fock_state(0, 2)])
    np.testing.assert_allclose(ks.operators[0], [[1, 0], [0, 0]])


def test_build_kraus_action_two_state():
    inputs = [fock_state(0, 2), PLUS]
    targets = [fock_state(0, 2), fock_state(1, 2)]
    c = kr.factor_omega(np.diag([0.25, 0.25]))
    ks = kr.build_kraus(c, kr.dual_basis(inputs), targets)
    for k, op in enumerate(ks.operators):
        for i, (psi, phi) in enumerate(zip(inputs, targets)):
            np.testing.assert_allclose(op @ psi.amplitudes, c[k, i] * phi.amplitudes, atol=1e-10)


def test_build_kraus_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        kr.build_kraus(np.ones((1, 3)), kr.dual_basis([fock_state(0, 2)]), [fock_state(0, 2)])


def coherent_synthesis(p=0.2, dim=30):
    inputs, targets = coherent_pair(0.5, 2.0, dim)
    cert = fz.solve_two_state(gram_matrix(inputs).entries[0, 1], gram_matrix(targets).entries[0, 1], p)
    assert cert.feasible
    return inputs, targets, cert, kr.synthesize(inputs, targets, cert.omega)


def test_coherent_pair_synthesis_fidelity_and_probability():
    inputs, targets, cert, ks = coherent_synthesis()
    rep = kr.verify_kraus(ks, inputs, targets, [0.2, 0.2])
    assert rep.passed
    for row in rep.states:
        assert row.fidelity >= 1 - 1e-6
        assert row.coefficient_probability == pytest.approx(0.2, abs=1e-8)


def test_verify_identity_kraus():
    states = [make_coherent_state(a, 20) for a in (0, 0.5)]
    ks = kr.KrausSet([np.eye(20, dtype=complex)], np.ones((1, 2)))
    rep = kr.verify_kraus(ks, states, states, [1, 1])
    assert rep.passed
    assert rep.completeness_margin == pytest.approx(0, abs=1e-12)
    assert all(r.success_probability == pytest.approx(1) for r in rep.states)


def test_verify_mixed_inputs_reported_not_asserted():
    inputs, targets, cert, ks = coherent_synthesis()
    rho = 0.9 * np.outer(inputs[0].amplitudes, inputs[0].amplitudes.conj())
    rho = rho + 0.1 * np.outer(inputs[1].amplitudes, inputs[1].amplitudes.conj())
    rep = kr.verify_kraus(ks, inputs, targets, [0.2, 0.2], mixed_inputs=[DensityMatrix(rho)])
    assert rep.passed
    assert len(rep.mixed) == 1 and 0 < rep.mixed[0].success_probability <= 1


def test_unitary_freedom():
    inputs, targets, cert, ks = coherent_synthesis()
    rng = np.random.default_rng(4)
    m = ks.coeffs.shape[0] + 1
    c = np.vstack([ks.coeffs, np.zeros((1, 2))])
    u, _ = np.linalg.qr(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
    ks2 = kr.build_kraus(u @ c, kr.dual_basis(inputs), targets)
    np.testing.assert_allclose(ks2.effect(), ks.effect(), atol=1e-9)
    for psi in inputs:
        assert np.trace(ks2.apply(psi)).real == pytest.approx(np.trace(ks.apply(psi)).real, abs=1e-9)


def test_round_trip_and_gram_consistency_random():
    rng = np.random.default_rng(21)
    for trial in range(6):
        n = 2 + trial % 2
        inputs, targets, p, _ = random_feasible_spec(rng, n, 8)
        res = fz.decide(gram_matrix(inputs), gram_matrix(targets), p, seeds=8)
        assert res.feasible
        ks = kr.synthesize(inputs, targets, res.omega)
        rep = kr.verify_kraus(ks, inputs, targets, p)
        assert rep.passed, rep.checks
        assert kr.gram_reconstruction_residual(inputs, targets, ks.coeffs, res.residual_K) <= 1e-8


def test_trace_non_increase_on_span():
    inputs, targets, cert, ks = coherent_synthesis(p=0.25)
    rng = np.random.default_rng(9)
    psi = np.column_stack([s.amplitudes for s in inputs])
    for _ in range(100):
        w = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = psi @ w
        st = PureState.normalized(v)
        assert np.trace(ks.apply(st)).real <= 1 + 1e-9
