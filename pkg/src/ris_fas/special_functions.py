"""Scalar special functions for the cascade-gain marginals.

Gaussian CDF/quantile, inverse error function, Marcum Q of order 1/2,
modified Bessel I_{-1/2}, and the noncentral chi-square with one degree of
freedom. Everything reduces to Gaussian tails in closed form, so no series
or quadrature is needed anywhere.

All functions accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

_LOG2 = math.log(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def gaussian_cdf(x):
    """Standard normal CDF Phi(x)."""
    return sp.ndtr(x)


def gaussian_tail(x):
    """Standard normal tail Q(x) = 1 - Phi(x), computed without cancellation."""
    return sp.ndtr(-np.asarray(x, dtype=float)) if np.ndim(x) else sp.ndtr(-x)


def gaussian_pdf(x):
    """Standard normal density phi(x)."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    return out if out.ndim else float(out)


def normal_quantile(u):
    """Standard normal quantile, i.e. sqrt(2)*inverse_erf(2u - 1).

    Loses resolution for u below ~1e-17 (2u - 1 rounds to -1); use
    normal_quantile_log with log(u) in deep tails.
    """
    return math.sqrt(2.0) * inverse_erf(2.0 * np.asarray(u, dtype=float) - 1.0)


def normal_quantile_log(log_u):
    """Standard normal quantile from log-probability; accurate in deep tails."""
    return sp.ndtri_exp(log_u)


def inverse_erf(y):
    """Inverse error function on (-1, 1)."""
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) >= 1.0):
        raise ValueError("inverse_erf requires |y| < 1")
    out = sp.erfinv(y)
    return out if out.ndim else float(out)


def marcum_q_half(a, b):
    """Marcum Q-function of order 1/2.

    Exact identity: Q_{1/2}(a, b) = Q(b - a) + Q(b + a), Q the standard
    normal tail. Machine precision at O(1) cost, no series summation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("marcum_q_half requires a >= 0 and b >= 0")
    out = np.clip(sp.ndtr(a - b) + sp.ndtr(-(a + b)), 0.0, 1.0)
    return out if out.ndim else float(out)


def bessel_i_neg_half(z):
    """Modified Bessel function I_{-1/2}(z) = sqrt(2/(pi z)) cosh(z).

    Evaluated through the log form so it returns finite values as long as
    the result is representable; overflows to inf past z ~ 710. For large z
    use bessel_i_neg_half_log.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("bessel_i_neg_half requires z > 0")
    log_mag, _ = bessel_i_neg_half_log(z)
    out = np.exp(log_mag)
    return out if out.ndim else float(out)


def bessel_i_neg_half_log(z):
    """Log-scaled companion: returns (log(I_{-1/2}(z)), sign).

    log cosh(z) = z + log1p(exp(-2z)) - log 2 stays finite for any z, which
    is what keeps the ncx2 density usable when the noncentrality grows like
    M^2 pi^2/16.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("bessel_i_neg_half_log requires z > 0")
    log_cosh = z + np.log1p(np.exp(-2.0 * z)) - _LOG2
    log_mag = 0.5 * (np.log(2.0) - np.log(np.pi * z)) + log_cosh
    sign = np.ones_like(log_mag)
    if log_mag.ndim:
        return log_mag, sign
    return float(log_mag), 1.0


@dataclass(frozen=True)
class NoncentralChiSq1:
    """Noncentral chi-square with 1 DoF: law of (sigma*Z + sqrt(tau))^2.

    tau is the noncentrality (= mu_A^2 here), sigma2 the scale variance.
    """

    tau: float
    sigma2: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be > 0")


def ncx2_cdf(dist: NoncentralChiSq1, x):
    """CDF of the scaled noncentral chi-square: P((sigma Z + sqrt(tau))^2 <= x).

    Equals 1 - marcum_q_half(sqrt(tau/sigma2), sqrt(x/sigma2)); implemented
    as Phi(w - v) - Phi(-(w + v)) with w = sqrt(x/sigma2), v = sqrt(tau/sigma2),
    which stays accurate in the deep lower tail where 1 - Q cancels.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("ncx2_cdf requires x >= 0")
    w = np.sqrt(x / dist.sigma2)
    v = math.sqrt(dist.tau / dist.sigma2)
    out = np.clip(sp.ndtr(w - v) - sp.ndtr(-(w + v)), 0.0, 1.0)
    return out if out.ndim else float(out)


def ncx2_log_cdf(dist: NoncentralChiSq1, x):
    """log of ncx2_cdf, accurate down to ~1e-300.

    log(Phi(w-v) - Phi(-w-v)) = log Phi(w-v) + log1p(-exp(lo - hi)).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("ncx2_log_cdf requires x >= 0")
    w = np.sqrt(x / dist.sigma2)
    v = math.sqrt(dist.tau / dist.sigma2)
    hi = sp.log_ndtr(w - v)
    lo = sp.log_ndtr(-(w + v))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = hi + np.log1p(-np.exp(lo - hi))
    out = np.where(w == 0, -np.inf, out)  # x = 0 has zero mass
    return out if out.ndim else float(out)


def ncx2_pdf(dist: NoncentralChiSq1, x):
    """Density of the scaled noncentral chi-square.

    [phi(w - v) + phi(w + v)] / (2 sigma sqrt(x)); algebraically identical to
    the I_{-1/2} Bessel form and finite for tau -> 0, where it reduces to the
    central analytic limit exp(-x/(2 sigma2))/sqrt(2 pi sigma2 x) on its own.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("ncx2_pdf requires x > 0")
    sigma = math.sqrt(dist.sigma2)
    w = np.sqrt(x) / sigma
    v = math.sqrt(dist.tau) / sigma
    out = (gaussian_pdf(w - v) + gaussian_pdf(w + v)) / (2.0 * sigma * np.sqrt(x))
    return out if np.ndim(out) else float(out)
