import csv
import math

import numpy as np
import pytest

from ampforge import homodyne as hd
from ampforge.errors import DivergentSensitivity, InsufficientTrials, InvalidParameters, ZeroSignal

BASE = hd.HomodyneSetup(1.0, 10.0, math.pi / 6)


def test_stats_examples():
    assert hd.homodyne_stats(hd.HomodyneSetup(1, 10, 0)).mean == 0
    st = hd.homodyne_stats(BASE)
    assert st.mean == pytest.approx(10)
    assert st.std == pytest.approx(math.sqrt(101))
    assert st.sensitivity == pytest.approx(0.5802, abs=1e-4)


def test_amplified_sensitivity():
    # sqrt(1 + 25) / (2 * 10 * cos(pi/6)) = 0.294392
    amp = hd.sensitivity(BASE.amplified(2))
    assert amp == pytest.approx(math.sqrt(26) / (20 * math.cos(math.pi / 6)), abs=1e-12)
    assert amp == pytest.approx(0.294392, abs=1e-6)
    assert amp < hd.sensitivity(BASE)


def test_stats_errors():
    with pytest.raises(DivergentSensitivity):
        hd.homodyne_stats(hd.HomodyneSetup(1, 10, math.pi / 2))
    with pytest.raises(ZeroSignal):
        hd.sensitivity(hd.HomodyneSetup(0, 10, 0.3))
    with pytest.raises(InvalidParameters):
        hd.HomodyneSetup(1, 0, 0.3)


def test_mean_odd_std_delta_independent():
    for delta in np.linspace(-1.4, 1.4, 9):
        a, b = hd.HomodyneSetup(0.7, 5, delta), hd.HomodyneSetup(0.7, 5, -delta)
        assert hd.signal_mean(a) == pytest.approx(-hd.signal_mean(b))
        assert hd.signal_std(a) == hd.signal_std(hd.HomodyneSetup(0.7, 5, 0))


def test_splitter_intensities_reproduce_moments():
    for delta in (0.0, 0.4, 1.2, -2.0):
        s = hd.HomodyneSetup(1.3, 4.0, delta)
        n1, n2 = hd.output_intensities(s)
        assert n1 - n2 == pytest.approx(hd.signal_mean(s))
        assert math.sqrt(n1 + n2) == pytest.approx(hd.signal_std(s))


def test_simulation_zero_signal():
    s = hd.HomodyneSetup(0.0, 10.0, 0.5)
    res = hd.simulate_homodyne(s, 20000, seed=1)
    assert abs(res.emp_mean) <= 5 * res.emp_std / math.sqrt(20000)


def test_simulation_insufficient_trials():
    with pytest.raises(InsufficientTrials):
        hd.simulate_homodyne(BASE, 999, seed=0)


def test_simulation_deterministic_and_shard_independent():
    a = hd.simulate_homodyne(BASE, 200000, seed=5, shards=1)
    b = hd.simulate_homodyne(BASE, 200000, seed=5, shards=1)
    c = hd.simulate_homodyne(BASE, 200000, seed=5, shards=4)
    assert a == b == c
    assert hd.simulate_homodyne(BASE, 200000, seed=6) != a


def test_analytic_empirical_grid():
    hits = 0
    cases = [(b, d) for b in (0.5, 1.0, 2.0, 4.0) for d in (-1.0, -0.3, 0.0, 0.5, 1.2)]
    assert len(cases) == 20
    for k, (b, d) in enumerate(cases):
        s = hd.HomodyneSetup(b, 10.0, d)
        res = hd.simulate_homodyne(s, 100000, seed=100 + k)
        hits += abs(res.emp_mean - hd.signal_mean(s)) <= 5 * res.emp_std / math.sqrt(100000)
    assert hits == 20


def test_sweep_and_csv(tmp_path):
    rows = hd.sweep([0.5, 1.0, 2.0], 10.0, [0.0, math.pi / 6, math.pi / 2], 2000, seed=3)
    assert len(rows) == 9
    undefined = [r for r in rows if r["sensitivity"] is None]
    assert len(undefined) == 3 and all(r["delta"] == math.pi / 2 for r in undefined)
    path = tmp_path / "sweep.csv"
    hd.write_csv(rows, path)
    with open(path) as fh:
        read = list(csv.reader(fh))
    assert tuple(read[0]) == hd.CSV_COLUMNS
    assert len(read) == 10


def test_sensitivity_decreasing_in_b():
    bs = np.linspace(0.25, 8, 32)
    for delta in (0.0, 0.3, math.pi / 6, 1.2):
        vals = [hd.sensitivity(hd.HomodyneSetup(b, 10.0, delta)) for b in bs]
        assert all(x > y for x, y in zip(vals, vals[1:]))
