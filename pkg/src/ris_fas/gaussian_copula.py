"""Multivariate normal CDF and the Gaussian copula.

The joint CDF of the best-port selection problem is an N-dimensional
centered MVN probability with the spatial correlation matrix as parameter.
It is evaluated by sequential conditioning (separation-of-variables): after
an ordered Cholesky factorization the orthant probability becomes an
integral over the unit cube of dimension N-1, integrated here by scrambled
Sobol points with independent randomizations. The spread across
randomizations gives the reported standard error.

The copula layer maps uniform marginals through the standard normal
quantile and evaluates the same MVN integral; its density has the closed
form exp(-z^T (R^{-1} - I) z / 2) / sqrt(det R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp
from scipy.linalg import cho_solve
from scipy.stats import qmc

from .fas_geometry import SpatialCorrelation

_SQRT_2_PI = math.sqrt(2.0 / math.pi)
# ndtri argument clips: smallest positive normal-ish and 1 - 2^-53 scale.
_U_LO = 1e-300
_U_HI = 1.0 - 1e-16


@dataclass(frozen=True)
class MvnProblem:
    """An N-dimensional MVN CDF evaluation P(Z <= upper_limits)."""

    correlation: SpatialCorrelation
    upper_limits: np.ndarray
    rqmc_samples: int = 8192
    rqmc_randomizations: int = 16
    seed: int = 0

    def __post_init__(self):
        limits = np.asarray(self.upper_limits, dtype=float)
        object.__setattr__(self, "upper_limits", limits)
        if limits.ndim != 1 or limits.size != self.correlation.n:
            raise ValueError("upper_limits length must match correlation dimension")
        if self.rqmc_samples < 128:
            raise ValueError("rqmc_samples must be >= 128")
        if self.rqmc_randomizations < 8:
            raise ValueError("rqmc_randomizations must be >= 8")


def _trunc_mean(t: float) -> float:
    """E[Z | Z <= t] for standard normal Z, stable for very negative t."""
    return -_SQRT_2_PI / sp.erfcx(-t / math.sqrt(2.0))


def _ordered_cholesky(matrix: np.ndarray, limits: np.ndarray):
    """Greedy variable reordering + Cholesky for sequential conditioning.

    At each step the remaining variable with the smallest conditional
    probability (evaluated at the truncated-normal means of the already
    fixed variables) is pivoted next; standard variance reduction.
    Returns (L, permuted limits).
    """
    c = matrix.copy()
    b = limits.astype(float).copy()
    n = b.size
    low = np.zeros((n, n))
    y = np.zeros(n)
    for i in range(n):
        best_j, best_p, best_t = i, np.inf, -np.inf
        for j in range(i, n):
            s = c[j, j] - low[j, :i] @ low[j, :i]
            denom = math.sqrt(max(s, 1e-300))
            t = (b[j] - low[j, :i] @ y[:i]) / denom
            p = sp.ndtr(t)
            if p < best_p:
                best_j, best_p, best_t = j, p, t
        if best_j != i:
            c[[i, best_j], :] = c[[best_j, i], :]
            c[:, [i, best_j]] = c[:, [best_j, i]]
            b[[i, best_j]] = b[[best_j, i]]
            low[[i, best_j], :i] = low[[best_j, i], :i]
        s = c[i, i] - low[i, :i] @ low[i, :i]
        low[i, i] = math.sqrt(max(s, 1e-300))
        for j in range(i + 1, n):
            low[j, i] = (c[j, i] - low[j, :i] @ low[i, :i]) / low[i, i]
        y[i] = _trunc_mean(best_t)
    return low, b


def _mvn_cdf_matrix(matrix: np.ndarray, limits: np.ndarray, samples: int,
                    randomizations: int, seed: int) -> tuple[float, float]:
    """Core RQMC evaluator on a positive-definite covariance-like matrix.

    Infinite limits are resolved here: any -inf gives probability 0; +inf
    dimensions are marginalized out by taking the principal submatrix.
    """
    limits = np.asarray(limits, dtype=float)
    if np.any(np.isneginf(limits)):
        return 0.0, 0.0
    finite = ~np.isposinf(limits)
    if not np.all(finite):
        idx = np.flatnonzero(finite)
        if idx.size == 0:
            return 1.0, 0.0
        matrix = matrix[np.ix_(idx, idx)]
        limits = limits[idx]
    n = limits.size
    if n == 1:
        return float(sp.ndtr(limits[0] / math.sqrt(matrix[0, 0]))), 0.0

    low, b = _ordered_cholesky(matrix, limits)
    e1 = float(sp.ndtr(b[0] / low[0, 0]))
    if e1 == 0.0:
        return 0.0, 0.0

    children = np.random.SeedSequence(seed).spawn(randomizations)
    estimates = np.empty(randomizations)
    for k, child in enumerate(children):
        engine = qmc.Sobol(d=n - 1, scramble=True, seed=np.random.default_rng(child))
        w = engine.random(samples)  # (samples, n-1)
        f = np.full(samples, e1)
        y = np.empty((samples, n - 1))
        prev_e = np.full(samples, e1)
        for i in range(1, n):
            arg = np.clip(w[:, i - 1] * prev_e, _U_LO, _U_HI)
            y[:, i - 1] = sp.ndtri(arg)
            t = (b[i] - y[:, :i] @ low[i, :i]) / low[i, i]
            prev_e = sp.ndtr(t)
            f *= prev_e
        estimates[k] = f.mean()
    p = float(estimates.mean())
    se = float(estimates.std(ddof=1) / math.sqrt(randomizations))
    return min(max(p, 0.0), 1.0), se


def mvn_cdf(problem: MvnProblem) -> tuple[float, float]:
    """P(Z <= b) for Z ~ N(0, R), R the regularized correlation matrix.

    Returns (estimate, standard error); the error is the spread of the
    independent randomization means. Deterministic for a fixed seed.
    """
    return _mvn_cdf_matrix(problem.correlation.reg_matrix, problem.upper_limits,
                           problem.rqmc_samples, problem.rqmc_randomizations,
                           problem.seed)


def mvn_cdf_comonotone_check(t: float, n: int, rqmc_samples: int = 8192,
                             rqmc_randomizations: int = 16,
                             seed: int = 0) -> tuple[float, float]:
    """Limit-case oracle: all pairwise correlations at 1 - 1e-9.

    The comonotone maximum has CDF Phi(t); the estimate must agree within
    integration error. Returns (estimate, standard error).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rho = 1.0 - 1e-9
    matrix = np.full((n, n), rho)
    np.fill_diagonal(matrix, 1.0)
    corr = SpatialCorrelation.from_matrix(matrix)
    problem = MvnProblem(corr, np.full(n, float(t)), rqmc_samples,
                         rqmc_randomizations, seed)
    return mvn_cdf(problem)


def _validate_u(u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any((u < 0.0) | (u > 1.0)) or np.any(~np.isfinite(u)):
        raise ValueError("marginal values must lie in [0, 1]")
    return u


def copula_cdf(correlation: SpatialCorrelation, marginal_values,
               rqmc_samples: int = 8192, rqmc_randomizations: int = 16,
               seed: int = 0) -> tuple[float, float]:
    """Gaussian copula C(u_1, ..., u_N) with parameter matrix R.

    Maps each u through the standard normal quantile (sqrt(2) erfinv(2u-1),
    evaluated in its tail-stable ndtri form) and calls the MVN CDF. A zero
    margin grounds the copula at 0; unit margins drop their dimension.
    Returns (estimate, standard error).
    """
    u = _validate_u(marginal_values)
    if u.size != correlation.n:
        raise ValueError("marginal vector length must match correlation dimension")
    if np.any(u == 0.0):
        return 0.0, 0.0
    z = np.where(u == 1.0, np.inf, sp.ndtri(np.clip(u, _U_LO, 1.0)))
    return copula_cdf_from_quantiles(correlation, z, rqmc_samples,
                                     rqmc_randomizations, seed)


def copula_cdf_from_quantiles(correlation: SpatialCorrelation, z,
                              rqmc_samples: int = 8192,
                              rqmc_randomizations: int = 16,
                              seed: int = 0) -> tuple[float, float]:
    """Copula CDF with the normal quantiles supplied directly.

    Entry point for callers that compute log-probabilities upstream and
    invert them with full tail accuracy (u below ~1e-17 rounds to a -inf
    quantile if pushed through 2u - 1 first).
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.size != correlation.n:
        raise ValueError("quantile vector length must match correlation dimension")
    return _mvn_cdf_matrix(correlation.reg_matrix, z, rqmc_samples,
                           rqmc_randomizations, seed)


def copula_density(correlation: SpatialCorrelation, marginal_values) -> float:
    """Gaussian copula density exp(-z^T (R^{-1} - I) z / 2) / sqrt(det R).

    Computed from the Cholesky factor of the regularized matrix: a linear
    solve for the quadratic form and the log-determinant from the factor
    diagonal, never an explicit inverse. Identically 1 at R = I.
    """
    u = _validate_u(marginal_values)
    if u.size != correlation.n:
        raise ValueError("marginal vector length must match correlation dimension")
    if np.any((u == 0.0) | (u == 1.0)):
        raise ValueError("copula density requires u in the open interval (0, 1)")
    z = sp.ndtri(u)
    quad = float(z @ cho_solve((correlation.chol, True), z))
    log_density = -0.5 * (quad - z @ z) - 0.5 * correlation.log_det
    return float(math.exp(log_density))
