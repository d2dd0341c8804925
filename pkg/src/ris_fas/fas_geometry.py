"""Planar fluid-antenna port grid and its sinc spatial correlation.

A grid of N = n1*n2 ports spans an aperture of w1 x w2 wavelengths. The
correlation between two ports depends only on their displacement measured
in wavelengths; entry (n, m) is sinc(2*d) with d the inter-port distance,
where sinc(t) = sin(pi t)/(pi t). The matrix is PSD in exact arithmetic
but numerically near-singular for dense grids, so a regularized copy
(nugget blend plus eigenvalue floor) is carried alongside the raw one.

`validate_correlation_mc` re-derives the same matrix by Monte Carlo
integration over an isotropic half-space scattering field, from first
principles, as an independent check on the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Eigen-floor default, relative to the largest eigenvalue.
_EPS_REL_DEFAULT = 1e-10


@dataclass(frozen=True)
class PortGrid:
    """Port counts and aperture size (in wavelengths) along the two axes."""

    n1: int
    n2: int
    w1: float
    w2: float

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("port counts must be >= 1")
        if self.w1 < 0 or self.w2 < 0:
            raise ValueError("aperture sizes must be >= 0")
        if self.n1 > 1 and self.w1 <= 0:
            raise ValueError("w1 must be > 0 when n1 > 1")
        if self.n2 > 1 and self.w2 <= 0:
            raise ValueError("w2 must be > 0 when n2 > 1")

    @property
    def n_ports(self) -> int:
        return self.n1 * self.n2

    def axis_positions(self) -> np.ndarray:
        """(N, 2) array of port coordinates in wavelengths, row-major order.

        Column 0 is the axis-1 coordinate (n1-1)/(N1-1)*W1, column 1 the
        axis-2 coordinate. A single-port axis occupies the axis origin.
        """
        i1 = np.arange(self.n1, dtype=float)
        i2 = np.arange(self.n2, dtype=float)
        x1 = i1 / (self.n1 - 1) * self.w1 if self.n1 > 1 else np.zeros(1)
        x2 = i2 / (self.n2 - 1) * self.w2 if self.n2 > 1 else np.zeros(1)
        g1, g2 = np.meshgrid(x1, x2, indexing="ij")
        return np.column_stack([g1.ravel(), g2.ravel()])


def map_index(grid: PortGrid, n1: int, n2: int) -> int:
    """2D port label (n1, n2) -> 1D index, 1-based row-major."""
    if not (1 <= n1 <= grid.n1 and 1 <= n2 <= grid.n2):
        raise ValueError(f"port label ({n1}, {n2}) out of range for {grid.n1}x{grid.n2} grid")
    return (n1 - 1) * grid.n2 + n2


def unmap_index(grid: PortGrid, n: int) -> tuple[int, int]:
    """Inverse of map_index."""
    if not (1 <= n <= grid.n_ports):
        raise ValueError(f"port index {n} out of range 1..{grid.n_ports}")
    return (n - 1) // grid.n2 + 1, (n - 1) % grid.n2 + 1


def port_correlation(grid: PortGrid, n: int, m: int) -> float:
    """Spatial correlation between ports n and m (1D indices).

    sinc(2*sqrt(dx1^2 + dx2^2)) with dx_l = |n_l - m_l|/(N_l - 1)*W_l and a
    zero offset on any single-port axis. Depends only on the displacement,
    is symmetric, and equals 1 at n = m.
    """
    a1, a2 = unmap_index(grid, n)
    b1, b2 = unmap_index(grid, m)
    dx1 = abs(a1 - b1) / (grid.n1 - 1) * grid.w1 if grid.n1 > 1 else 0.0
    dx2 = abs(a2 - b2) / (grid.n2 - 1) * grid.w2 if grid.n2 > 1 else 0.0
    return float(np.sinc(2.0 * math.hypot(dx1, dx2)))


class SpatialCorrelation:
    """Raw sinc correlation matrix plus a positive-definite regularized copy.

    Attributes
    ----------
    matrix : (N, N) raw correlation matrix (unit diagonal, symmetric).
    regularization : nugget weight delta in [0, 1).
    eigen_floor : smallest admitted eigenvalue of the regularized matrix.
    reg_matrix : (N, N) regularized matrix, symmetric positive definite.
    chol : lower Cholesky factor of reg_matrix.
    log_det : log det(reg_matrix).
    sample_factor : (N, r) factor F with F F^T = matrix/2 after clipping
        negative eigenvalues to 0; r is the numerical rank. Used to draw
        the real/imaginary parts of a complex field with covariance R.
    """

    def __init__(self, matrix: np.ndarray, regularization: float = 0.0,
                 eigen_floor: float | None = None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("correlation matrix must be square")
        if not np.allclose(matrix, matrix.T, atol=1e-12, rtol=0.0):
            raise ValueError("correlation matrix must be symmetric")
        if np.any(np.abs(matrix) > 1.0 + 1e-12):
            raise ValueError("correlation entries must lie in [-1, 1]")
        if np.any(np.abs(np.diag(matrix) - 1.0) > 1e-12):
            raise ValueError("correlation matrix must have unit diagonal")
        if not (0.0 <= regularization < 1.0):
            raise ValueError("regularization must lie in [0, 1)")

        n = matrix.shape[0]
        self.matrix = 0.5 * (matrix + matrix.T)
        self.regularization = float(regularization)

        blended = (1.0 - regularization) * self.matrix + regularization * np.eye(n)
        evals, evecs = np.linalg.eigh(blended)
        if eigen_floor is None:
            eigen_floor = _EPS_REL_DEFAULT * float(evals[-1])
        if eigen_floor < 0:
            raise ValueError("eigen_floor must be >= 0")
        self.eigen_floor = float(eigen_floor)

        if evals[0] >= self.eigen_floor:
            reg = blended  # already PD: keep bitwise, skip reconstruction
        else:
            reg = (evecs * np.maximum(evals, self.eigen_floor)) @ evecs.T
            reg = 0.5 * (reg + reg.T)
        self.reg_matrix = reg
        self.chol = np.linalg.cholesky(reg)
        self.log_det = 2.0 * float(np.sum(np.log(np.diag(self.chol))))

        # PSD square root of the *raw* matrix for field sampling.
        raw_evals, raw_evecs = np.linalg.eigh(self.matrix)
        tol = raw_evals[-1] * 1e-12
        keep = raw_evals > tol
        order = np.argsort(raw_evals[keep])[::-1]
        lam = raw_evals[keep][order]
        self.sample_factor = raw_evecs[:, keep][:, order] * np.sqrt(lam / 2.0)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, matrix, regularization: float = 0.0,
                    eigen_floor: float | None = None) -> "SpatialCorrelation":
        """Wrap an externally supplied correlation matrix (tests, forced R=I)."""
        return cls(matrix, regularization, eigen_floor)

    def to_csv(self, path) -> None:
        """Full matrix, row-major, 17 significant digits, LF line endings."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for row in self.matrix:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def build_correlation_matrix(grid: PortGrid, delta: float = 0.0,
                             eps: float | None = None) -> SpatialCorrelation:
    """Fill all N^2 entries of the sinc matrix and regularize.

    delta is the nugget weight of R' = (1-delta) R + delta I; eigenvalues of
    R' below eps are clipped up to eps (default eps: 1e-10 times the largest
    eigenvalue). delta = 0 with the default floor suffices for every grid in
    this artifact.
    """
    pos = grid.axis_positions()
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    matrix = np.sinc(2.0 * dist)
    return SpatialCorrelation(matrix, delta, eps)


def validate_correlation_mc(grid: PortGrid, samples: int, seed: int) -> np.ndarray:
    """Monte Carlo re-derivation of the correlation matrix, first principles.

    Scatterers arrive from the half-space in front of the aperture with
    density f(omega, nu) = cos(nu)/(2 pi) on [-pi/2, pi/2]^2. Each sample
    contributes e^{j k^T (r_n - r_m)} with k = 2 pi [cos nu cos omega,
    cos nu sin omega, sin nu] (positions in wavelengths, so lambda cancels);
    the averaged real part converges to the sinc closed form.

    Returns the N x N matrix of real-part estimates.
    """
    est, _, _ = validate_correlation_mc_detailed(grid, samples, seed)
    return est


def validate_correlation_mc_detailed(
    grid: PortGrid, samples: int, seed: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """As validate_correlation_mc, also returning the imaginary-part
    estimates and the per-entry standard errors of the real part."""
    samples = int(samples)
    if samples < 10_000:
        raise ValueError("samples must be >= 1e4")

    # Port positions in 3D: aperture in the (y, z) plane, x normal to it.
    pos2 = grid.axis_positions()
    n = grid.n_ports
    r = np.zeros((n, 3))
    r[:, 2] = pos2[:, 0]  # axis 1 -> z
    r[:, 1] = pos2[:, 1]  # axis 2 -> y

    rng = np.random.default_rng(seed)
    g_cc = np.zeros((n, n))
    g_ss = np.zeros((n, n))
    g_sc = np.zeros((n, n))
    g2_cc = np.zeros((n, n))
    g2_ss = np.zeros((n, n))

    chunk = 100_000
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        # nu = arcsin(U) gives the cos(nu)/2 marginal; omega is uniform.
        nu = np.arcsin(rng.uniform(-1.0, 1.0, size=b))
        om = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size=b)
        k = np.empty((b, 3))
        k[:, 0] = np.cos(nu) * np.cos(om)
        k[:, 1] = np.cos(nu) * np.sin(om)
        k[:, 2] = np.sin(nu)
        phase = (2.0 * math.pi) * (k @ r.T)  # (b, n)
        c = np.cos(phase)
        s = np.sin(phase)
        g_cc += c.T @ c
        g_ss += s.T @ s
        g_sc += s.T @ c
        # Doubled phases feed the variance of cos(delta phase).
        c2 = np.cos(2.0 * phase)
        s2 = np.sin(2.0 * phase)
        g2_cc += c2.T @ c2
        g2_ss += s2.T @ s2
        done += b

    # E[cos(p_n - p_m)] and E[sin(p_n - p_m)] from the gram blocks.
    est = (g_cc + g_ss) / samples
    imag = (g_sc - g_sc.T) / samples
    # Var(cos d) = 1/2 + E[cos 2d]/2 - E[cos d]^2.
    e_cos2 = (g2_cc + g2_ss) / samples
    var = np.maximum(0.5 + 0.5 * e_cos2 - est * est, 0.0)
    se = np.sqrt(var / samples)

    # Zero displacement on the diagonal: identically 1 + 0j, zero variance.
    np.fill_diagonal(est, 1.0)
    np.fill_diagonal(imag, 0.0)
    np.fill_diagonal(se, 0.0)
    return est, imag, se
