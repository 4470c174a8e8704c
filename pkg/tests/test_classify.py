import numpy as np
import pytest

from ampforge import classify as cl
from ampforge.errors import GainInconsistent, LengthMismatch, ZeroInputSignal
from ampforge.states import (
    PureState,
    make_coherent_state,
    number_operator,
    quadrature_p,
    quadrature_q,
    trace_distance,
)

from corpus import DELTAS, coherent_pair

DIM = 40


def coh(a):
    return make_coherent_state(a, DIM)


def test_gain_examples():
    q = quadrature_q(DIM)
    assert cl.gain(q, coh(0.5), coh(0.5)) == pytest.approx(1)
    assert cl.gain(q, coh(0.5), coh(1.0)) == pytest.approx(2, abs=1e-6)
    with pytest.raises(ZeroInputSignal):
        cl.gain(q, coh(0), coh(1))


def test_gain_multiplicative():
    q = quadrature_q(DIM)
    a, b, c = coh(0.3), coh(0.6), coh(1.5)
    assert cl.gain(q, a, b) * cl.gain(q, b, c) == pytest.approx(cl.gain(q, a, c), abs=1e-9)


def test_is_noiseless_examples():
    assert cl.is_noiseless(quadrature_q(DIM), coh(0.7), coh(1.4))
    assert not cl.is_noiseless(number_operator(DIM), coh(1.0), coh(2.0))
    assert cl.is_noiseless(number_operator(DIM), coh(1.0), coh(1.0))


def test_noiseless_residual_examples():
    n = number_operator(DIM)
    assert cl.noiseless_residual(n, coh(1), coh(1), 1.0) == pytest.approx(0, abs=1e-10)
    assert cl.noiseless_residual(n, coh(1), coh(2), 4.0) == pytest.approx(3.0, abs=1e-6)
    q = quadrature_q(DIM)
    assert cl.noiseless_residual(q, coh(0.5), coh(1.0), 2.0) == pytest.approx(0, abs=1e-8)


def test_noiseless_residual_equals_variance_change():
    q = quadrature_q(DIM)
    rng = np.random.default_rng(0)
    for _ in range(10):
        a = complex(rng.uniform(0.2, 1.0), rng.uniform(-1, 1))
        g = rng.uniform(1, 2.5)
        inp, out = coh(a), coh(g * a)
        res = cl.noiseless_residual(q, inp, out, g)
        dvar = cl.fluctuation(q, out) ** 2 - cl.fluctuation(q, inp) ** 2
        assert res == pytest.approx(dvar, abs=1e-10)


def test_noiseless_residual_gain_inconsistent():
    with pytest.raises(GainInconsistent):
        cl.noiseless_residual(quadrature_q(DIM), coh(0.5), coh(1.0), 3.0)


def spec_for(delta, g, p, observables=None):
    inputs, targets = coherent_pair(delta, g)
    dim = inputs[0].dim
    obs = observables or (quadrature_q(dim), quadrature_p(dim))
    return cl.AmplificationSpec(inputs, targets, [p, p], [g, g], obs)


def test_classify_probabilistic_noiseless_feasible():
    c = cl.classify(spec_for(0.5, 2.0, 0.2))
    assert (c.deterministic, c.linear, c.noiseless, c.feasible) == (False, True, True, True)


def test_classify_deterministic_noiseless_infeasible():
    c = cl.classify(spec_for(0.5, 2.0, 1.0))
    assert c.deterministic and c.linear and c.noiseless and not c.feasible


def test_classify_no_amplification():
    inputs, _ = coherent_pair(0.5, 1.0)
    q = quadrature_q(inputs[0].dim)
    c = cl.classify(cl.AmplificationSpec(inputs, inputs, [1, 1], [1, 1], (q,)))
    assert c.feasible and not c.amplifying


@pytest.mark.parametrize("delta", DELTAS)
def test_classify_deterministic_grid(delta):
    for g in (1.5, 2.0, 3.0):
        assert not cl.classify(spec_for(delta, g, 1.0)).feasible


def test_spec_validation():
    inputs, targets = coherent_pair(0.5, 2.0)
    with pytest.raises(LengthMismatch):
        cl.AmplificationSpec(inputs, targets[:1], [1, 1])
    with pytest.raises(GainInconsistent):
        cl.AmplificationSpec(inputs, targets, [1, 1], [3, 3], (quadrature_q(inputs[0].dim),))


def test_monotonicity_unitary_rotation():
    rng = np.random.default_rng(1)
    u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    pairs = []
    for _ in range(5):
        a = PureState.normalized(rng.normal(size=4) + 1j * rng.normal(size=4))
        b = PureState.normalized(rng.normal(size=4) + 1j * rng.normal(size=4))
        pairs.append((a, b))
    after = [(PureState(u @ a.amplitudes), PureState(u @ b.amplitudes)) for a, b in pairs]
    rep = cl.monotonicity_check(pairs, after)
    assert rep.violations == 0
    for row in rep.pairs:
        assert row.after == pytest.approx(row.before, abs=1e-10)


def test_monotonicity_depolarizing():
    pairs = [(coh(0.1 * k), coh(-0.2 * k)) for k in range(1, 6)]
    after = [(cl.depolarize(a, 0.3), cl.depolarize(b, 0.3)) for a, b in pairs]
    rep = cl.monotonicity_check(pairs, after)
    assert rep.violations == 0
    for row in rep.pairs:
        assert row.after == pytest.approx(0.7 * row.before, abs=1e-10)


def test_monotonicity_flags_hypothetical_amplifier():
    pairs = [(coh(0), coh(0.3)), (coh(0.2), coh(-0.2))]
    after = [(coh(0), coh(0.6)), (coh(0.4), coh(-0.4))]
    assert cl.monotonicity_check(pairs, after).violations == 2


def test_normalized_output_deterministic_map_contracts():
    from ampforge import kraus as kr
    from corpus import random_feasible_spec

    rng = np.random.default_rng(12)
    inputs, targets, p, om = random_feasible_spec(rng, 3, 6, deterministic=True)
    ks = kr.synthesize(inputs, targets, om)
    outs = [cl.normalized_output(ks, s) for s in inputs]
    pairs = [(inputs[i], inputs[j]) for i in range(3) for j in range(i + 1, 3)]
    after = [(outs[i], outs[j]) for i in range(3) for j in range(i + 1, 3)]
    assert cl.monotonicity_check(pairs, after).violations == 0
    for i in range(3):
        assert trace_distance(outs[i], targets[i]) < 1e-8
