"""Outage probability and delay outage rate for a RIS-aided fluid antenna.

Analytical model: per-port cascade gains are scaled noncentral chi-square
(CLT over the RIS elements), coupled across ports by a Gaussian copula
parameterized with the sinc spatial correlation matrix; best-port selection
turns the joint CDF into one multivariate normal probability. A link-level
Monte Carlo simulator provides independent ground truth.
"""

from .channel_model import (
    CascadeGainDistribution,
    SystemConfig,
    clt_params,
    fas_gain_cdf,
    fas_gain_pdf,
    marginal_gain_cdf,
    marginal_gain_pdf,
)
from .fas_geometry import (
    PortGrid,
    SpatialCorrelation,
    build_correlation_matrix,
    map_index,
    port_correlation,
    unmap_index,
    validate_correlation_mc,
)
from .gaussian_copula import (
    MvnProblem,
    copula_cdf,
    copula_density,
    mvn_cdf,
    mvn_cdf_comonotone_check,
)
from .metrics import (
    SweepRecord,
    delay_outage_rate,
    delivery_time,
    effective_snr_threshold,
    outage_probability,
    tas_baseline,
)
from .monte_carlo import (
    McResult,
    McRun,
    draw_correlated_port_amplitudes,
    simulate_dor,
    simulate_op,
    simulate_outage_grid,
)
from .special_functions import (
    NoncentralChiSq1,
    bessel_i_neg_half,
    gaussian_cdf,
    inverse_erf,
    marcum_q_half,
    ncx2_cdf,
    ncx2_pdf,
    normal_quantile,
)
from .units import db2lin, dbm2watt, lin2db, snr_linear

__all__ = [
    "CascadeGainDistribution", "McResult", "McRun", "MvnProblem",
    "NoncentralChiSq1", "PortGrid", "SpatialCorrelation", "SweepRecord",
    "SystemConfig", "bessel_i_neg_half", "build_correlation_matrix",
    "clt_params", "copula_cdf", "copula_density", "db2lin", "dbm2watt",
    "delay_outage_rate", "delivery_time", "draw_correlated_port_amplitudes",
    "effective_snr_threshold", "fas_gain_cdf", "fas_gain_pdf",
    "gaussian_cdf", "inverse_erf", "lin2db", "map_index", "marcum_q_half",
    "marginal_gain_cdf", "marginal_gain_pdf", "mvn_cdf",
    "mvn_cdf_comonotone_check", "ncx2_cdf", "ncx2_pdf", "normal_quantile",
    "outage_probability", "port_correlation", "simulate_dor", "simulate_op",
    "simulate_outage_grid", "snr_linear", "tas_baseline", "unmap_index",
    "validate_correlation_mc",
]
