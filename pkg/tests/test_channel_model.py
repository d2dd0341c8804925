import math

import numpy as np
import pytest
from scipy.integrate import quad

from ris_fas.channel_model import (
    CascadeGainDistribution,
    SystemConfig,
    clt_params,
    fas_gain_cdf,
    fas_gain_pdf,
    marginal_gain_cdf,
    marginal_gain_log_cdf,
    marginal_gain_pdf,
)
from ris_fas.fas_geometry import PortGrid, SpatialCorrelation, build_correlation_matrix
from ris_fas.monte_carlo import McRun, simulate_op
from ris_fas.special_functions import normal_quantile_log


def _grid(n: int) -> PortGrid:
    side = int(round(math.sqrt(n)))
    if side == 1:
        return PortGrid(1, 1, 0.0, 0.0)
    return PortGrid(side, side, 1.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SystemConfig(pathloss_exp=2.0)
    with pytest.raises(ValueError):
        SystemConfig(d_bs_ris_m=0.0)
    with pytest.raises(ValueError):
        SystemConfig(d_ris_mu_m=-3.0)
    with pytest.raises(ValueError):
        SystemConfig(ris_elements=0)
    with pytest.raises(ValueError):
        SystemConfig(bandwidth_hz=0.0)
    with pytest.raises(ValueError):
        SystemConfig(delay_threshold_s=0.0)
    with pytest.raises(ValueError):
        SystemConfig(data_bits=-1.0)


def test_config_derived_quantities():
    cfg = SystemConfig()
    assert cfg.snr_bar == pytest.approx(3.1622776601683795e13, rel=1e-14)
    assert cfg.snr_threshold_linear == 1.0
    assert not cfg.clt_warning
    assert SystemConfig(ris_elements=25).clt_warning


def test_clt_params_values():
    d = clt_params(SystemConfig(ris_elements=100))
    assert d.mu_a == pytest.approx(25.0 * math.pi, rel=1e-15)
    assert d.sigma2_a == pytest.approx(38.31497249319151, rel=1e-14)
    assert d.tau == pytest.approx(d.mu_a ** 2, rel=1e-15)
    assert clt_params(SystemConfig(ris_elements=1)).mu_a == pytest.approx(
        math.pi / 4.0, rel=1e-15)


def test_aggregate_pathloss():
    d = clt_params(SystemConfig())
    assert d.d_tilde == (2000.0 * 2000.0) ** 2.5
    assert d.d_tilde == 3.2e16
    assert d.d_tilde == pytest.approx(
        math.exp(2.5 * math.log(2000.0 * 2000.0)), rel=1e-14)


def test_cascade_distribution_validation():
    with pytest.raises(ValueError):
        CascadeGainDistribution(0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        CascadeGainDistribution(1.0, -1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        CascadeGainDistribution(1.0, 1.0, 1.0, 0.0)


def test_marginal_cdf_shape_and_limits():
    d = clt_params(SystemConfig(ris_elements=100))
    assert marginal_gain_cdf(d, 0.0) == 0.0
    assert marginal_gain_cdf(d, 100.0 * d.tau / d.d_tilde) == pytest.approx(
        1.0, abs=1e-12)
    # tau is the distribution median up to a doubly-exponentially small term
    assert marginal_gain_cdf(d, d.tau / d.d_tilde) == pytest.approx(0.5, rel=1e-12)
    rs = np.linspace(0.0, 3.0, 7) * d.tau / d.d_tilde
    vals = marginal_gain_cdf(d, rs)
    assert vals.shape == (7,)
    assert np.all(np.diff(vals) >= 0.0)
    with pytest.raises(ValueError):
        marginal_gain_cdf(d, -1e-3)


def test_marginal_log_cdf_consistent():
    d = clt_params(SystemConfig(ris_elements=80))
    for frac in (0.3, 0.7, 1.0, 1.5):
        r = frac * d.tau / d.d_tilde
        assert marginal_gain_log_cdf(d, r) == pytest.approx(
            math.log(marginal_gain_cdf(d, r)), rel=1e-12)
    assert marginal_gain_log_cdf(d, 0.0) == -math.inf
    # deep lower tail where the two Phi terms of the plain CDF cancel
    r_deep = 1e-3 * d.tau / d.d_tilde
    assert marginal_gain_log_cdf(d, r_deep) == pytest.approx(
        -63.713657662521197, rel=1e-13)


def test_marginal_pdf_matches_cdf_derivative():
    d = clt_params(SystemConfig(ris_elements=100))
    r = 0.9 * d.tau / d.d_tilde
    h = 1e-6 * r
    numeric = (marginal_gain_cdf(d, r + h) - marginal_gain_cdf(d, r - h)) / (2 * h)
    assert marginal_gain_pdf(d, r) == pytest.approx(numeric, rel=1e-6)
    with pytest.raises(ValueError):
        marginal_gain_pdf(d, 0.0)


def test_fas_cdf_edges_and_validation():
    cfg = SystemConfig(grid=PortGrid(2, 2, 1.0, 1.0))
    corr = build_correlation_matrix(cfg.grid)
    assert fas_gain_cdf(cfg, corr, 0.0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        fas_gain_cdf(cfg, corr, -1.0)
    with pytest.raises(ValueError):
        fas_gain_cdf(SystemConfig(), corr, 1e-13)
    with pytest.raises(ValueError):
        fas_gain_pdf(SystemConfig(), corr, 1e-13)


def test_fas_cdf_single_port_is_marginal():
    cfg = SystemConfig(grid=PortGrid(1, 1, 0.0, 0.0))
    corr = build_correlation_matrix(cfg.grid)
    d = clt_params(cfg)
    for frac in np.linspace(0.05, 2.0, 20):
        r = frac * d.tau / d.d_tilde
        est, se = fas_gain_cdf(cfg, corr, r)
        assert se == 0.0
        assert est == marginal_gain_cdf(d, r)


def test_fas_cdf_below_marginal_and_monotone():
    cfg = SystemConfig(grid=PortGrid(2, 2, 1.0, 1.0))
    corr = build_correlation_matrix(cfg.grid)
    d = clt_params(cfg)
    prev = -1.0
    for frac in (0.5, 0.8, 1.0, 1.3, 2.0):
        r = frac * d.tau / d.d_tilde
        est, se = fas_gain_cdf(cfg, corr, r)
        assert est <= marginal_gain_cdf(d, r) + 5.0 * se
        assert est >= prev - 1e-12
        prev = est


def test_fas_cdf_decreases_with_ports():
    # best-of-N selection: more ports push the CDF down at the median
    vals = {}
    for n in (1, 4, 9):
        cfg = SystemConfig(grid=_grid(n))
        corr = build_correlation_matrix(cfg.grid)
        d = clt_params(cfg)
        vals[n], _ = fas_gain_cdf(cfg, corr, d.tau / d.d_tilde)
    assert vals[1] == pytest.approx(0.5, rel=1e-12)
    assert vals[4] == pytest.approx(0.067184, rel=2e-3)
    assert vals[9] == pytest.approx(0.001010, rel=2e-3)
    assert vals[1] > 3.0 * vals[4] > 9.0 * vals[9]


def test_fas_cdf_identity_correlation_is_marginal_power():
    cfg = SystemConfig(grid=PortGrid(2, 2, 1.0, 1.0))
    eye = SpatialCorrelation.from_matrix(np.eye(4))
    d = clt_params(cfg)
    r = 0.8 * d.tau / d.d_tilde
    est, se = fas_gain_cdf(cfg, eye, r)
    assert se == 0.0
    assert est == pytest.approx(marginal_gain_cdf(d, r) ** 4, rel=1e-11)


def test_fas_cdf_against_model_simulation():
    # simulate the model itself (correlated normals thresholded at the
    # common quantile) and compare the orthant frequency to the RQMC value
    cfg = SystemConfig(tx_power_dbm=7.0, ris_elements=105,
                       grid=PortGrid(2, 2, 1.0, 1.0))
    corr = build_correlation_matrix(cfg.grid)
    d = clt_params(cfg)
    r = cfg.snr_threshold_linear / cfg.snr_bar
    z_star = float(normal_quantile_log(marginal_gain_log_cdf(d, r)))

    rng = np.random.default_rng(7)
    draws = 400_000
    z = rng.standard_normal((draws, 4)) @ corr.chol.T
    freq = float(np.mean(np.all(z <= z_star, axis=1)))
    mc_se = math.sqrt(freq * (1.0 - freq) / draws)

    est, se = fas_gain_cdf(cfg, corr, r, seed=3)
    assert abs(est - freq) <= 5.0 * math.hypot(se, mc_se)


def test_fas_cdf_understates_true_channel_dependence():
    # all ports share the reflector-side fades, which the spatial matrix
    # alone cannot encode; the analytic lower tail must sit well below the
    # simulated channel, and this pins the direction and rough size of
    # that gap so a silent regression cannot flip it
    cfg = SystemConfig(tx_power_dbm=7.0, ris_elements=105,
                       grid=PortGrid(2, 2, 1.0, 1.0))
    corr = build_correlation_matrix(cfg.grid)
    analytic, _ = fas_gain_cdf(cfg, corr, cfg.snr_threshold_linear / cfg.snr_bar)
    mc = simulate_op(cfg, corr, McRun(trials=100_000, seed=5))
    assert mc.ci_lo > 2.0 * analytic
    assert analytic == pytest.approx(0.01578, rel=2e-2)


def test_fas_pdf_single_port_chain_rule():
    cfg = SystemConfig(grid=PortGrid(1, 1, 0.0, 0.0))
    corr = build_correlation_matrix(cfg.grid)
    d = clt_params(cfg)
    for frac in np.linspace(0.1, 2.0, 20):
        r = frac * d.tau / d.d_tilde
        assert fas_gain_pdf(cfg, corr, r) == pytest.approx(
            marginal_gain_pdf(d, r), rel=1e-12)


def test_fas_pdf_positive_and_vanishing_origin():
    cfg = SystemConfig(tx_power_dbm=7.0, ris_elements=105,
                       grid=PortGrid(2, 2, 1.0, 1.0))
    corr = build_correlation_matrix(cfg.grid)
    d = clt_params(cfg)
    assert fas_gain_pdf(cfg, corr, d.tau / d.d_tilde) > 0.0
    assert fas_gain_pdf(cfg, corr, 1e-12 * d.tau / d.d_tilde) < 1e-100


def test_fas_pdf_integrates_to_cdf_increment():
    cfg = SystemConfig(tx_power_dbm=7.0, ris_elements=105,
                       grid=PortGrid(2, 2, 1.0, 1.0))
    corr = build_correlation_matrix(cfg.grid)
    d = clt_params(cfg)
    a, b = 0.5 * d.tau / d.d_tilde, 1.5 * d.tau / d.d_tilde
    integral, _ = quad(lambda r: fas_gain_pdf(cfg, corr, r), a, b, limit=60)
    want = fas_gain_cdf(cfg, corr, b)[0] - fas_gain_cdf(cfg, corr, a)[0]
    assert integral == pytest.approx(want, abs=1e-5)
