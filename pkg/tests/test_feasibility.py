import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ampforge import feasibility as fz
from ampforge.errors import InvalidOverlap, InvalidProbability, NTooLarge
from ampforge.states import gram_matrix, make_coherent_state

from corpus import coherent_pair, random_feasible_spec

S = math.exp(-0.125)
T = math.exp(-0.5)


def pair_grams(delta=0.5, gain=2.0):
    inputs, targets = coherent_pair(delta, gain)
    return gram_matrix(inputs), gram_matrix(targets)


def test_residual_k_identity_is_zero():
    g, _ = pair_grams()
    k = fz.residual_K(g, g, fz.OmegaMatrix.all_ones(2))
    np.testing.assert_allclose(k, 0, atol=1e-14)


def test_residual_k_amplification_indefinite():
    g_pi, g_xi = pair_grams()
    k = fz.residual_K(g_pi, g_xi, fz.OmegaMatrix.all_ones(2))
    assert np.linalg.eigvalsh(k)[0] < 0


def test_residual_k_zero_omega_returns_input_gram():
    g_pi, g_xi = pair_grams()
    np.testing.assert_allclose(fz.residual_K(g_pi, g_xi, fz.OmegaMatrix.zeros(2)), g_pi.entries)


def test_check_identity_feasible():
    g, _ = pair_grams()
    assert fz.check_feasibility(g, g, fz.OmegaMatrix.all_ones(2)).feasible


def test_check_deterministic_amplification_infeasible_on_grid():
    g_pi, g_xi = pair_grams()
    for mag in np.linspace(0, 1, 21):
        for ph in np.linspace(0, 2 * np.pi, 24, endpoint=False):
            w = mag * np.exp(1j * ph)
            om = fz.OmegaMatrix(np.array([[1, w], [np.conj(w), 1]]), [1, 1])
            assert not fz.check_feasibility(g_pi, g_xi, om).feasible


def test_check_probabilistic_aligned_feasible():
    g_pi, g_xi = pair_grams()
    t = g_xi.entries[0, 1]
    w = 0.2 * np.exp(1j * np.angle(t))
    om = fz.OmegaMatrix(np.array([[0.2, w], [np.conj(w), 0.2]]), [0.2, 0.2])
    cert = fz.check_feasibility(g_pi, g_xi, om)
    assert cert.feasible and cert.diag_ok


def test_omega_rejects_wrong_diagonal():
    with pytest.raises(Exception):
        fz.OmegaMatrix(np.eye(2), [0.5, 0.5])


def test_solve_two_state_examples():
    assert fz.solve_two_state(0.7, 0.7, 1.0).feasible
    assert fz.solve_two_state(S, T, 0.29).feasible
    assert not fz.solve_two_state(S, T, 0.31).feasible
    assert fz.solve_two_state(0.0, 0.4, 1.0).feasible


def test_solve_two_state_errors():
    with pytest.raises(InvalidOverlap):
        fz.solve_two_state(1.2, 0.5, 0.5)
    with pytest.raises(InvalidProbability):
        fz.solve_two_state(0.5, 0.5, 1.5)


def test_max_success_probability_examples():
    assert fz.max_success_probability(0.6, 0.6) == 1.0
    assert fz.max_success_probability(0.8825, 0.6065) == pytest.approx(0.2987, abs=1e-3)
    assert fz.max_success_probability(0.99, 0.0) == pytest.approx(0.01, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_max_success_probability_phase_invariant(a, b, ph1, ph2, rot):
    base = fz.max_success_probability(a * np.exp(1j * ph1), b * np.exp(1j * ph2))
    rotated = fz.max_success_probability(a * np.exp(1j * (ph1 + rot)), b * np.exp(1j * (ph2 + rot)))
    assert base == pytest.approx(rotated, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.999), st.floats(0, 0.999), st.floats(0, 2 * np.pi))
def test_two_state_monotone_in_p(a, b, ph):
    s, t = a, b * np.exp(1j * ph)
    verdicts = [fz.solve_two_state(s, t, p).feasible for p in np.linspace(0, 1, 41)]
    # once infeasible, infeasible for all larger p
    first_bad = verdicts.index(False) if False in verdicts else len(verdicts)
    assert all(not v for v in verdicts[first_bad:])


def test_two_state_threshold_from_grams():
    g_pi, g_xi = pair_grams()
    assert fz.two_state_threshold(g_pi, g_xi) == pytest.approx((1 - S) / (1 - T), abs=1e-8)


def test_search_identity_finds_all_ones():
    g, _ = pair_grams()
    g3 = gram_matrix([make_coherent_state(a, 25) for a in (0, 0.4, 0.4j)])
    res = fz.search_omega(g3, g3, [1, 1, 1], seeds=4)
    assert res.feasible and res.penalty <= 1e-12
    np.testing.assert_allclose(res.omega.entries, np.ones((3, 3)), atol=1e-6)


def test_search_three_state_deterministic_amplifier_not_found():
    ins = [make_coherent_state(a, 30) for a in (0, 0.4, 0.4j)]
    outs = [make_coherent_state(2 * a, 30) for a in (0, 0.4, 0.4j)]
    res = fz.search_omega(gram_matrix(ins), gram_matrix(outs), [1, 1, 1], seeds=8)
    assert isinstance(res, fz.NotFound)
    assert res.best_penalty > 1e-6


def test_search_rejects_large_n():
    g = np.eye(9)
    with pytest.raises(NTooLarge):
        fz.search_omega(g, g, np.ones(9))


def test_search_agrees_with_analytic_on_random_pairs():
    rng = np.random.default_rng(11)
    agree = 0
    for _ in range(100):
        s = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        t = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        p = rng.uniform(0.05, 1)
        g_pi = np.array([[1, s], [np.conj(s), 1]])
        g_xi = np.array([[1, t], [np.conj(t), 1]])
        analytic = fz.solve_two_state(s, t, p).feasible
        searched = fz.search_omega(g_pi, g_xi, [p, p], seeds=4).feasible
        # skip cases within 1e-6 of the boundary, where tolerances legitimately differ
        margin = (1 - p) - max(abs(s) - abs(t) * p, 0)
        if abs(margin) < 1e-6:
            agree += 1
            continue
        assert analytic == searched, (s, t, p)
        agree += 1
    assert agree == 100


def test_found_certificate_recheck_reproduces_min_eig():
    rng = np.random.default_rng(5)
    inputs, targets, p, _ = random_feasible_spec(rng, 3, 8)
    g_pi, g_xi = gram_matrix(inputs), gram_matrix(targets)
    res = fz.search_omega(g_pi, g_xi, p, seeds=4)
    assert res.feasible
    k = fz.residual_K(g_pi, g_xi, res.omega)
    assert np.linalg.eigvalsh(k)[0] == pytest.approx(res.min_eig_K, abs=1e-12)


def test_deterministic_certificates_respect_overlap_monotonicity():
    rng = np.random.default_rng(8)
    for _ in range(5):
        inputs, targets, p, om = random_feasible_spec(rng, 3, 6, deterministic=True)
        g_pi, g_xi = gram_matrix(inputs), gram_matrix(targets)
        cert = fz.check_feasibility(g_pi, g_xi, om)
        assert cert.feasible
        off = ~np.eye(3, dtype=bool)
        assert np.all(np.abs(g_pi.entries[off]) <= np.abs(g_xi.entries[off]) + 1e-9)


def test_search_is_independent_of_workers():
    rng = np.random.default_rng(2)
    inputs, targets, p, _ = random_feasible_spec(rng, 3, 6)
    g_pi, g_xi = gram_matrix(inputs), gram_matrix(targets)
    a = fz.search_omega(g_pi, g_xi, p, seeds=6, seed=3, workers=1)
    b = fz.search_omega(g_pi, g_xi, p, seeds=6, seed=3, workers=3)
    assert np.array_equal(a.omega.entries, b.omega.entries)


def test_decide_routes_two_state_analytically():
    g_pi, g_xi = pair_grams()
    assert fz.decide(g_pi, g_xi, [0.2, 0.2]).method == "analytic-two-state"
