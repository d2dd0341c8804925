"""Outage probability, delay outage rate, delivery time, TAS baseline.

OP is the best-port gain CDF at gamma_th * d_tilde / gamma_bar (the
d_tilde factor is applied inside the marginal). DOR is the same CDF at the
effective threshold 2^{R/(B T_th)} - 1: the delay exceeds T_th exactly when
the SNR falls below that value, so both metrics share one code path and
agree bitwise under matched seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel_model import SystemConfig, clt_params, fas_gain_cdf, marginal_gain_cdf
from .fas_geometry import SpatialCorrelation

_LN2 = math.log(2.0)


@dataclass
class SweepRecord:
    """One sweep point: analytical values, TAS baseline, optional MC."""

    axis_value: float
    config: SystemConfig
    op: float = math.nan
    op_se: float = math.nan
    dor: float = math.nan
    dor_se: float = math.nan
    tas_op: float = math.nan
    tas_dor: float = math.nan
    clt_warning: bool = False
    mc_op: float | None = None
    mc_op_lo: float | None = None
    mc_op_hi: float | None = None
    mc_dor: float | None = None
    mc_dor_lo: float | None = None
    mc_dor_hi: float | None = None
    error: str | None = None

    def __post_init__(self):
        if self.error is not None:
            return
        for name in ("op", "dor", "tas_op", "tas_dor"):
            v = getattr(self, name)
            if not math.isnan(v) and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for est, lo, hi in ((self.mc_op, self.mc_op_lo, self.mc_op_hi),
                            (self.mc_dor, self.mc_dor_lo, self.mc_dor_hi)):
            if est is not None and not (lo <= est <= hi):
                raise ValueError("confidence interval must contain the estimate")


def effective_snr_threshold(config: SystemConfig) -> float:
    """gamma_eff = 2^{R/(B T_th)} - 1, linear; the delay-threshold image."""
    return math.expm1(_LN2 * config.data_bits
                      / (config.bandwidth_hz * config.delay_threshold_s))


def outage_probability(config: SystemConfig, corr: SpatialCorrelation,
                       gamma_th_linear: float | None = None,
                       rqmc_samples: int = 8192, rqmc_randomizations: int = 16,
                       seed: int = 0) -> tuple[float, float]:
    """P(SNR <= gamma_th) = F_{h^2_FAS}(gamma_th / gamma_bar).

    gamma_th_linear overrides the configured dB threshold (the DOR path
    uses this hook). The integrator's standard error passes through
    unchanged. Returns (probability, standard_error).
    """
    if gamma_th_linear is None:
        gamma_th_linear = config.snr_threshold_linear
    if gamma_th_linear < 0:
        raise ValueError("gamma_th_linear must be >= 0")
    r = gamma_th_linear / config.snr_bar
    return fas_gain_cdf(config, corr, r, rqmc_samples, rqmc_randomizations, seed)


def delay_outage_rate(config: SystemConfig, corr: SpatialCorrelation,
                      rqmc_samples: int = 8192, rqmc_randomizations: int = 16,
                      seed: int = 0) -> tuple[float, float]:
    """P(delivery time > T_th): outage_probability at gamma_eff."""
    return outage_probability(config, corr,
                              gamma_th_linear=effective_snr_threshold(config),
                              rqmc_samples=rqmc_samples,
                              rqmc_randomizations=rqmc_randomizations,
                              seed=seed)


def delivery_time(config: SystemConfig, snr_linear: float) -> float:
    """Seconds to push data_bits through B log2(1 + snr); +inf at snr = 0."""
    if snr_linear < 0:
        raise ValueError("snr_linear must be >= 0")
    rate = config.bandwidth_hz * math.log2(1.0 + snr_linear)
    if rate == 0.0:
        return math.inf
    return config.data_bits / rate


def tas_baseline(config: SystemConfig) -> tuple[float, float]:
    """(OP, DOR) with a single fixed antenna: the marginal CDF alone, no
    copula integration, exact up to the CLT model (zero standard error)."""
    dist = clt_params(config)
    gbar = config.snr_bar
    op = float(marginal_gain_cdf(dist, config.snr_threshold_linear / gbar))
    dor = float(marginal_gain_cdf(dist, effective_snr_threshold(config) / gbar))
    return op, dor
