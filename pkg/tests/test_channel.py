import math

import numpy as np
import pytest

from ampforge import channel as ch
from ampforge.classify import monotonicity_check
from ampforge.errors import NegativeTime, ThresholdUnreachable, TooFewPoints, UnsortedTimes
from ampforge.gaussian import GaussianState, moments_from_fock, phase_distance
from ampforge.states import make_coherent_state, thermal_state

G = GaussianState
LOSS = ch.ChannelModel.pure_loss()


def test_apply_loss_examples():
    s = G.thermal(0.5, 0.3 + 0.2j)
    same = ch.apply_loss(s, 0.0)
    np.testing.assert_allclose(same.d, s.d)
    np.testing.assert_allclose(same.gamma, s.gamma)
    vac = ch.apply_loss(G.vacuum(), 2.0)
    np.testing.assert_allclose(vac.d, 0)
    np.testing.assert_allclose(vac.gamma, np.eye(2))
    half = ch.apply_loss(G.coherent(1.0), math.log(4))
    np.testing.assert_allclose(half.d, G.coherent(0.5).d, atol=1e-15)
    np.testing.assert_array_equal(half.gamma, np.eye(2))
    assert ch.apply_loss(1.0 + 0j, math.log(4)) == pytest.approx(0.5)
    with pytest.raises(NegativeTime):
        ch.apply_loss(G.vacuum(), -1)


def test_semigroup():
    s = G.thermal(1.0, 0.7 - 0.4j)
    for t1, t2 in [(0.1, 0.5), (1.0, 2.0), (0.0, 0.3)]:
        a = ch.apply_loss(ch.apply_loss(s, t1), t2)
        b = ch.apply_loss(s, t1 + t2)
        np.testing.assert_allclose(a.d, b.d, atol=1e-12)
        np.testing.assert_allclose(a.gamma, b.gamma, atol=1e-12)


def test_distance_trajectory_examples():
    a, b = G.coherent(0.6), G.coherent(-0.4j)
    d0 = phase_distance(a, b)
    times = np.linspace(0, 5, 51)
    for t, d in ch.distance_trajectory(a, b, LOSS, times):
        assert d == pytest.approx(math.exp(-t) * d0, abs=1e-12)
    amp = ch.distance_trajectory(a.scaled(2), b.scaled(2), LOSS, times)
    for (t, d), (_, da) in zip(ch.distance_trajectory(a, b, LOSS, times), amp):
        assert da == pytest.approx(4 * d, rel=1e-12) and da > d
    assert all(d == 0 for _, d in ch.distance_trajectory(a, a, LOSS, times))
    with pytest.raises(UnsortedTimes):
        ch.distance_trajectory(a, b, LOSS, [0, 2, 1])


def test_decay_rate_examples():
    a, b = G.coherent(1.0), G.vacuum()
    times = np.arange(0, 2.0005, 1e-3)
    chi = dict(ch.decay_rate(ch.distance_trajectory(a, b, LOSS, times)))
    t1 = times[1000]
    assert chi[t1] == pytest.approx(-2 * math.exp(-1), abs=1e-5)
    flat = ch.decay_rate([(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)])
    assert all(c == 0 for _, c in flat)
    with pytest.raises(TooFewPoints):
        ch.decay_rate([(0, 1), (1, 1)])
    with pytest.raises(UnsortedTimes):
        ch.decay_rate([(0, 1), (1, 1), (1, 1)])


def test_decay_rate_second_order_convergence():
    a, b = G.coherent(1.0), G.vacuum()
    errs = []
    for dt in (1e-2, 5e-3):
        times = np.arange(0, 2 + dt / 2, dt)
        chi = np.array(ch.decay_rate(ch.distance_trajectory(a, b, LOSS, times)))
        exact = ch.analytic_decay_rate(LOSS, 2.0, chi[:, 0])
        errs.append(np.max(np.abs(chi[:, 1] - exact)))
    assert errs[0] / errs[1] >= 3.5


def test_oscillating_revival():
    osc = ch.ChannelModel.oscillating()
    assert not osc.markovian
    times = np.arange(0, 6.0005, 1e-3)
    chi = np.array(ch.decay_rate(ch.distance_trajectory(G.coherent(1), G.vacuum(), osc, times)))
    mask = ch.revival_mask(osc, times)
    assert mask.any()
    assert np.all(chi[mask, 1] > 0)
    assert np.all(chi[~mask & (osc.rate(times) > 0.01), 1] < 0)


def test_markovian_monotone():
    for model in (LOSS, ch.ChannelModel.pure_loss(0.3), ch.ChannelModel.oscillating(1.0, 0.8, 3.0),
                  ch.ChannelModel.tabulated([0, 1, 2, 3], [0.5, 2.0, 0.0, 1.0])):
        assert model.markovian
        times = np.linspace(0, 4, 401)
        chi = ch.decay_rate(ch.distance_trajectory(G.coherent(0.8), G.coherent(-0.5j), model, times))
        assert max(c for _, c in chi) <= 1e-9


def test_tabulated_integral_exact():
    model = ch.ChannelModel.tabulated([0, 1, 3], [1.0, 3.0, -1.0])
    # integral of the piecewise-linear rate
    assert model.integrated(1.0) == pytest.approx(2.0)
    assert model.integrated(0.5) == pytest.approx(0.5 + 0.25)
    assert model.integrated(3.0) == pytest.approx(2.0 + 2.0)
    assert model.integrated(4.0) == pytest.approx(3.0)
    assert not model.markovian


def test_detection_horizon_examples():
    a, b = G.coherent(1.0), G.vacuum()
    hz = ch.detection_horizon(a, b, 2.0, LOSS, 0.5)
    assert hz.t_plain == pytest.approx(math.log(4)) and hz.t_amplified == pytest.approx(math.log(16))
    assert hz.t_amplified - hz.t_plain == pytest.approx(math.log(4), abs=1e-12)
    eq = ch.detection_horizon(a, b, 1.0, LOSS, 0.5)
    assert eq.t_plain == eq.t_amplified
    with pytest.raises(ThresholdUnreachable):
        ch.detection_horizon(a, b, 2.0, LOSS, 9.0)


def test_fock_cross_check():
    for alpha in (1.0, 0.5 - 0.7j):
        for t in (0.2, 1.0):
            rho = ch.apply_loss_fock(make_coherent_state(alpha, 40), t)
            m = moments_from_fock(rho)
            ref = ch.apply_loss(G.coherent(alpha), t)
            np.testing.assert_allclose(m.d, ref.d, atol=1e-6)
            np.testing.assert_allclose(m.gamma, ref.gamma, atol=1e-6)


def test_loss_kraus_complete():
    ops = ch.loss_kraus(0.6, 12)
    total = sum(e.T @ e for e in ops)
    np.testing.assert_allclose(total, np.eye(12), atol=1e-12)


def test_loss_contracts_trace_distance():
    pairs = [(make_coherent_state(0.5, 30), make_coherent_state(-0.5, 30)),
             (thermal_state(0.5, 30), make_coherent_state(1.0, 30))]
    for t in (0.1, 0.7, 2.0):
        after = [(ch.apply_loss_fock(a, t), ch.apply_loss_fock(b, t)) for a, b in pairs]
        assert monotonicity_check(pairs, after).violations == 0


def test_trajectory_table_columns():
    rows = ch.trajectory_table(G.coherent(1), G.vacuum(), 2.0, LOSS, np.linspace(0, 1, 11))
    assert tuple(rows[0]) == ch.TRAJECTORY_COLUMNS
