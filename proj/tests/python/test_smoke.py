import math
import os

import pytest

import _edgemeta as em

D3 = [(-0.5, 0.04), (0.0, 0.09), (0.4, 0.16)]


def test_dataset_roundtrip():
    data = em.Dataset(D3)
    assert len(data) == 3
    assert data.effects == [-0.5, 0.0, 0.4]
    assert data.variances == [0.04, 0.09, 0.16]


def test_dataset_validation():
    with pytest.raises(ValueError):
        em.Dataset([(0.0, 0.0)])
    with pytest.raises(ValueError):
        em.Dataset([(0.0, 1.0)])  # k == 1 is below the minimum of 2


def test_tau2_and_mean():
    data = em.Dataset(D3)
    pm = em.estimate_tau2(data, "pm")
    assert pm["value"] >= 0.0
    assert abs(em.generalized_q(data, pm["value"]) - 2.0) < 1e-6
    reml = em.estimate_tau2(data, "reml")
    assert reml["value"] >= 0.0
    mean = em.mean_hksj(data, pm["value"])
    assert mean["ci"][0] < mean["value"] < mean["ci"][1]
    assert mean["df"] == 2


def test_cd_quantile_roundtrip():
    data = em.Dataset(D3)
    cd = em.EdgingtonCD(data, 0.05)
    for q in (0.025, 0.5, 0.975):
        assert abs(cd.cdf(cd.quantile(q)) - q) < 1e-8
    med = cd.quantile(0.5)
    assert abs(cd.two_sided_p(med) - 1.0) < 1e-6


def test_irwin_hall():
    assert abs(em.irwin_hall_cdf(1.0, 3) - 1.0 / 6.0) < 1e-12
    assert abs(em.irwin_hall_cdf(1.5, 3) - 0.5) < 1e-12


def test_sampling_and_intervals():
    data = em.Dataset(D3)
    draws = em.sample_pcd(data, "fixed", 0.05, n_draws=20000, seed=7)
    assert len(draws) == 20000
    again = em.sample_pcd(data, "fixed", 0.05, n_draws=20000, seed=7)
    assert draws == again  # bit-identical for the same seed
    et = em.equi_tailed_interval(draws, 0.95)
    hc = em.hcdp_interval(draws, 0.95)
    assert et["lower"] < et["upper"]
    assert hc["width"] <= et["width"] + 1e-12
    p_ge = em.confidence_probability(draws, 0.0, "ge")
    p_le = em.confidence_probability(draws, 0.0, "le")
    assert abs(p_ge + p_le - 1.0) < 1e-9  # no draw is exactly 0


def test_crps_against_normal_closed_form():
    data = em.Dataset(D3)
    loc, scale = em.skipka_predictive(data, 0.05)
    # CRPS of a large normal sample should match the closed form.
    draws = em.sample_pcd(data, "fixed", 0.0, n_draws=50000, seed=3)
    assert em.crps(draws, 0.0) > 0.0
    closed = em.crps_normal(0.0, 1.0, 0.0)
    assert abs(closed - (math.sqrt(2.0) - 1.0) / math.sqrt(math.pi)) < 1e-12


def test_read_csv_from_data_dir():
    data_dir = os.environ.get("EDGEMETA_DATA_DIR")
    if not data_dir:
        pytest.skip("EDGEMETA_DATA_DIR not set")
    data = em.read_csv(os.path.join(data_dir, "covid.csv"))
    assert len(data) == 7
    pm = em.estimate_tau2(data, "pm")
    assert abs(pm["i2_percent"] - 14.0) < 0.5


def test_required_iterations():
    assert em.required_iterations(0.05, 0.005) == 2000.0
