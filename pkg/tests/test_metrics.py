import math

import pytest

from ris_fas.channel_model import SystemConfig, fas_gain_cdf
from ris_fas.fas_geometry import PortGrid, build_correlation_matrix
from ris_fas.metrics import (
    SweepRecord,
    delay_outage_rate,
    delivery_time,
    effective_snr_threshold,
    outage_probability,
    tas_baseline,
)

CFG = SystemConfig(tx_power_dbm=7.0, ris_elements=105,
                   grid=PortGrid(2, 2, 1.0, 1.0))
CORR = build_correlation_matrix(CFG.grid)


def test_effective_threshold_default():
    # R/(B T_th) = 3000 / 6000 = 1/2 => 2^0.5 - 1
    assert effective_snr_threshold(SystemConfig()) == pytest.approx(
        math.sqrt(2.0) - 1.0, rel=1e-14)


def test_effective_threshold_closed_form():
    for bits, bw, tth in ((1.2e4, 1e6, 1e-3), (500.0, 2e5, 5e-3),
                          (8.0e4, 4e6, 2e-3)):
        cfg = SystemConfig(data_bits=bits, bandwidth_hz=bw,
                           delay_threshold_s=tth)
        assert effective_snr_threshold(cfg) == pytest.approx(
            2.0 ** (bits / (bw * tth)) - 1.0, rel=1e-12)
    # an infinitely lax delay budget asks for no SNR at all
    assert effective_snr_threshold(
        SystemConfig(delay_threshold_s=1e12)) == pytest.approx(0.0, abs=1e-9)


def test_outage_probability_edges():
    assert outage_probability(CFG, CORR, gamma_th_linear=0.0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        outage_probability(CFG, CORR, gamma_th_linear=-1.0)
    # an absurd threshold saturates outage (the common quantile clamps at
    # the largest finite normal quantile, a hair under certainty)
    est, se = outage_probability(CFG, CORR, gamma_th_linear=1e30)
    assert est >= 1.0 - 1e-15
    assert se == 0.0


def test_outage_is_gain_cdf():
    g = CFG.snr_threshold_linear / CFG.snr_bar
    assert outage_probability(CFG, CORR, seed=4) == fas_gain_cdf(
        CFG, CORR, g, seed=4)


def test_outage_monotone_in_power_and_elements():
    prev = 2.0
    for p in (0.0, 5.0, 10.0):
        cfg = SystemConfig(tx_power_dbm=p, grid=CFG.grid)
        est, _ = outage_probability(cfg, CORR)
        assert est < prev
        prev = est
    prev = 2.0
    for m in (80, 105, 125):
        cfg = SystemConfig(tx_power_dbm=5.0, ris_elements=m, grid=CFG.grid)
        est, _ = outage_probability(cfg, CORR)
        assert est < prev
        prev = est


def test_dor_is_outage_at_effective_threshold():
    a = delay_outage_rate(CFG, CORR, seed=2)
    b = outage_probability(CFG, CORR,
                           gamma_th_linear=effective_snr_threshold(CFG), seed=2)
    assert a == b


def test_delivery_time_values():
    cfg = SystemConfig()  # R = 3000 bits, B = 2 MHz
    assert delivery_time(cfg, 1.0) == pytest.approx(1.5e-3, rel=1e-14)
    assert delivery_time(cfg, 3.0) == pytest.approx(0.75e-3, rel=1e-14)
    assert delivery_time(cfg, 1e300) < 1e-5
    assert delivery_time(cfg, 0.0) == math.inf
    with pytest.raises(ValueError):
        delivery_time(cfg, -0.5)


def test_tas_baseline_bounds_fas():
    op, dor = tas_baseline(CFG)
    assert 0.0 <= op <= 1.0 and 0.0 <= dor <= 1.0
    fas_op, se_op = outage_probability(CFG, CORR)
    fas_dor, se_dor = delay_outage_rate(CFG, CORR)
    assert fas_op <= op + 5.0 * se_op
    assert fas_dor <= dor + 5.0 * se_dor


def test_sweep_record_validation():
    SweepRecord(1.0, CFG, op=0.5, dor=0.1, tas_op=0.6, tas_dor=0.2)
    with pytest.raises(ValueError):
        SweepRecord(1.0, CFG, op=1.5)
    with pytest.raises(ValueError):
        SweepRecord(1.0, CFG, dor=-0.1)
    with pytest.raises(ValueError):
        SweepRecord(1.0, CFG, mc_op=0.5, mc_op_lo=0.6, mc_op_hi=0.7)
    # failed points carry a message instead of numbers; no range checks
    SweepRecord(1.0, CFG, op=5.0, error="integrator blew up")
