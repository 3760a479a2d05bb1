"""Smoke tests of the python module against known values."""

import math

import numpy as np
import pytest

try:
    import airkit as ak
except ImportError:
    import _airkit as ak

MI_16QAM_12DB_PER_2D = 3.579405679  # independently computed reference


def test_constellation_basics():
    c = ak.build_qam(16)
    assert c.size_2d == 16
    assert c.size_4d == 256
    assert c.bits_per_4d == 8
    assert abs(c.average_energy_2d() - 1.0) < 1e-12
    assert c.points.shape == (16, 2)
    assert len(set(c.labels)) == 16
    assert c.bits_of(0) == "00000000"
    with pytest.raises(Exception):
        ak.build_qam(12)


def test_simulate_is_deterministic():
    c = ak.build_qam(16)
    a = ak.simulate(c, "awgn snr=12 n=5000 seed=3")
    b = ak.simulate(c, "awgn snr=12 n=5000 seed=3")
    assert np.array_equal(a.tx, b.tx)
    assert np.array_equal(a.rx, b.rx)
    other = ak.simulate(c, "awgn snr=12 n=5000 seed=4")
    assert not np.array_equal(a.rx, other.rx)


def test_estimate_matches_oracle():
    c = ak.build_qam(16)
    batch = ak.simulate(c, "awgn snr=12 n=80000 seed=11")
    est = ak.double_monte_carlo([batch], "2D-iidG", "mi", c)
    oracle = ak.true_rate_oracle(c, "awgn snr=12")
    assert abs(oracle / 2.0 - MI_16QAM_12DB_PER_2D) < 1e-6
    assert abs(est.rate_bit_per_4d - oracle) < 0.05
    assert est.model == "2D-iidG"
    assert est.rate_bit_per_4d <= 8.0 + 1e-9


def test_gmi_below_mi():
    c = ak.build_qam(16)
    batch = ak.simulate(c, "awgn snr=10 n=40000 seed=5")
    train, ev = ak.split_batch(batch, 0.5, 9)
    model = ak.fit("2D-iidG", c, train)
    mi = ak.mi_rate(ev, model).rate_bit_per_4d
    gmi = ak.gmi_rate(ev, model, c).rate_bit_per_4d
    assert gmi <= mi + 1e-9


def test_llr_signs_at_point():
    c = ak.build_qam(16)
    batch = ak.simulate(c, "awgn snr=250 n=30000 seed=6")
    model = ak.fit("4D-iidG", c, batch, min_samples=20)
    idx = 137
    y = batch.rx[np.argmax(batch.tx == idx)]
    llrs = ak.compute_llrs(list(y), model, c)
    bits = c.bits_of(idx)
    assert llrs.shape == (8,)
    for k in range(8):
        assert (llrs[k] > 0) == (bits[k] == "1")


def test_fit_exposes_parameters():
    c = ak.build_qam(16)
    batch = ak.simulate(c, "awgn snr=10 n=60000 seed=7")
    model = ak.fit("2D-CG", c, batch)
    assert model.kind == "2D-CG"
    assert model.n_sub == 2
    assert model.dof == 160
    cov = model.covariance(0, 0)
    assert cov.shape == (2, 2)
    assert abs(cov[0, 0] - 0.05) < 0.01
    report = ak.dof_report(c)
    assert report["4D-CG"] == 3584


def test_batch_file_round_trip(tmp_path):
    c = ak.build_qam(16)
    batch = ak.simulate(c, "awgn snr=8 n=1000 seed=2")
    path = str(tmp_path / "batch.bin")
    ak.write_batch(batch, c, path)
    loaded, loaded_c = ak.read_batch(path)
    assert loaded_c.name == "16QAM"
    assert np.array_equal(loaded.tx, batch.tx)
    assert np.array_equal(loaded.rx, batch.rx)
    assert loaded.scenario == batch.scenario


def test_custom_batch_and_overlap_guard():
    c = ak.build_qam(16)
    rng = np.random.default_rng(0)
    tx = rng.integers(0, 256, size=4000, dtype=np.uint16)
    pts = c.points
    rx = np.hstack([pts[tx // 16], pts[tx % 16]]) + 0.05 * rng.standard_normal((4000, 4))
    batch = ak.SymbolBatch(tx, rx, scenario="numpy fixture", seed=1)
    model = ak.fit("2D-iidG", c, batch, min_samples=2)
    with pytest.raises(Exception, match="overlap"):
        ak.mi_rate(batch, model)
    est = ak.mi_rate(batch, model, allow_overlap=True)
    assert math.isfinite(est.rate_bit_per_4d)
