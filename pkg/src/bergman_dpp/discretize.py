"""Quadrature grids and finite Hermitian-contraction avatars of a kernel.

A continuous kernel restricted to an inset region, sampled on a midpoint
product grid and scaled by sqrt(mu_i) K(x_i, x_j) sqrt(mu_j) with
mu_i = quad_weight_i * weight_value_i, becomes a finite DppKernel whose
spectrum is clamped into [0, 1 - delta].  The inset keeps points away
from the boundary where K(z, z) blows up; quadrature there is hopeless
at desk scale.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import GridTooCoarseError
from .kernels import (
    Annulus,
    Ball,
    Disk,
    DomainSpec,
    Polydisk,
    dimension,
    eval_kernel,
    weight,
)
from .numerics import hermitian_eig, symmetrize

DEFAULT_CLAMP_DELTA = 1e-6


@dataclass(frozen=True)
class Grid:
    spec: DomainSpec
    points: np.ndarray        # (m, d) complex
    quad_weights: np.ndarray  # (m,) positive Lebesgue weights
    weight_values: np.ndarray  # (m,) omega(point)

    def __post_init__(self):
        if not (len(self.points) == len(self.quad_weights) == len(self.weight_values)):
            raise ValueError("grid field lengths disagree")
        if len(self.quad_weights) and self.quad_weights.min() <= 0:
            raise ValueError("quadrature weights must be positive")

    @property
    def size(self) -> int:
        return len(self.points)

    def mu(self) -> np.ndarray:
        """Per-site mass of the reference measure omega dV."""
        return self.quad_weights * self.weight_values


@dataclass(frozen=True)
class DppKernel:
    """Hermitian matrix with spectrum in [0, 1] on a finite ground set."""

    matrix: np.ndarray
    is_projection: bool = False
    grid: Optional[Grid] = None
    clamp_mass: float = 0.0

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


def _irwin_hall_cdf(s: np.ndarray, d: int) -> np.ndarray:
    """Volume fraction of a unit d-cube below the plane sum(x) = s."""
    out = np.zeros_like(s, dtype=float)
    binom = 1.0
    for k in range(d + 1):
        out += (-1) ** k * binom * np.clip(s - k, 0.0, None) ** d
        binom *= (d - k) / (k + 1)
    return np.clip(out / math.factorial(d), 0.0, 1.0)


def _polar_factor(r_lo: float, r_hi: float, resolution: int):
    """Midpoint polar cells: resolution//2 rings, 4x that many angles."""
    n_rad = max(1, resolution // 2)
    n_ang = 4 * n_rad
    dr = (r_hi - r_lo) / n_rad
    dth = 2.0 * np.pi / n_ang
    radii = r_lo + (np.arange(n_rad) + 0.5) * dr
    angles = (np.arange(n_ang) + 0.5) * dth
    rr, tt = np.meshgrid(radii, angles, indexing="ij")
    pts = (rr * np.exp(1j * tt)).ravel()
    wts = (rr * dr * dth).ravel()
    return pts, wts


def build_grid(spec: DomainSpec, resolution: int, inset: float = 0.15) -> Grid:
    """Midpoint product quadrature adapted to the domain variant.

    Polar for disk and annulus, tensor-polar for the polydisk, and a
    simplex grid in the squared moduli for the ball (the substitution
    t_j = |z_j|^2 turns dV into prod dt_j/2 dtheta_j over sum t_j < 1,
    absorbing all radial Jacobians).  Total points <= resolution^(2d).
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if not 0.0 < inset < 1.0:
        raise ValueError("inset must be in (0, 1)")

    if isinstance(spec, Disk):
        pts, wts = _polar_factor(0.0, 1.0 - inset, resolution)
        points = pts[:, None]
    elif isinstance(spec, Annulus):
        shrink = (1.0 - spec.rho) * inset / 2.0
        pts, wts = _polar_factor(spec.rho + shrink, 1.0 - shrink, resolution)
        points = pts[:, None]
    elif isinstance(spec, Polydisk):
        pts1, wts1 = _polar_factor(0.0, 1.0 - inset, resolution)
        grids_p = np.meshgrid(*([pts1] * spec.d), indexing="ij")
        grids_w = np.meshgrid(*([wts1] * spec.d), indexing="ij")
        points = np.stack([g.ravel() for g in grids_p], axis=1)
        wts = np.prod([g.ravel() for g in grids_w], axis=0)
    else:  # Ball
        d = spec.d
        r2 = (1.0 - inset) ** 2
        n_t = max(1, resolution // 2)
        n_ang = resolution
        dt = r2 / n_t
        dth = 2.0 * np.pi / n_ang
        t_centers = (np.arange(n_t) + 0.5) * dt
        t_mesh = np.meshgrid(*([t_centers] * d), indexing="ij")
        t_flat = np.stack([g.ravel() for g in t_mesh], axis=1)
        # exact overlap of each cubic cell with the simplex sum(t) < r2
        # (Irwin-Hall CDF of the scaled cut), so weights sum to the exact
        # volume at every resolution; centers of boundary cells are pulled
        # inside along the ray to the origin
        s = (r2 - (t_flat - 0.5 * dt).sum(axis=1)) / dt
        frac = _irwin_hall_cdf(s, d)
        keep = frac > 1e-14
        t_flat, frac = t_flat[keep], frac[keep]
        t_sum = t_flat.sum(axis=1)
        limit = r2 - 0.3 * dt
        scale = np.minimum(1.0, limit / t_sum)
        t_flat = t_flat * scale[:, None]
        if len(t_flat) == 0:
            raise ValueError(f"resolution {resolution} too coarse for ball d={d}")
        angles = (np.arange(n_ang) + 0.5) * dth
        a_mesh = np.meshgrid(*([angles] * d), indexing="ij")
        a_flat = np.stack([g.ravel() for g in a_mesh], axis=1)
        cell_w = (dt * dth / 2.0) ** d
        points = np.concatenate(
            [np.sqrt(t_flat[i]) * np.exp(1j * a_flat) for i in range(len(t_flat))]
        )
        wts = np.concatenate(
            [np.full(len(a_flat), cell_w * frac[i]) for i in range(len(t_flat))]
        )
    weights = np.array([weight(spec, p) for p in points])
    return Grid(spec, points, np.asarray(wts, dtype=float), weights)


def _kernel_values(spec: DomainSpec, points: np.ndarray) -> np.ndarray:
    """Matrix of K(x_i, x_j); vectorized for the power-law kernels."""
    m = len(points)
    if isinstance(spec, (Disk, Polydisk, Ball)):
        z = points
        zw = z[:, None, :] * np.conj(z[None, :, :])
        if isinstance(spec, Disk):
            return 1.0 / (np.pi * np.exp((2.0 + spec.alpha) * np.log(1.0 - zw[..., 0])))
        if isinstance(spec, Polydisk):
            return np.prod(1.0 / (np.pi * (1.0 - zw) ** 2), axis=-1)
        from .kernels import ball_volume

        inner = zw.sum(axis=-1)
        return 1.0 / (ball_volume(spec.d) * (1.0 - inner) ** (spec.d + 1))
    out = np.empty((m, m), dtype=complex)
    for i in range(m):
        out[i, i] = eval_kernel(spec, points[i], points[i])
        for j in range(i + 1, m):
            v = eval_kernel(spec, points[i], points[j])
            out[i, j] = v
            out[j, i] = v.conjugate()
    return out


def _clamp_with_mass(matrix: np.ndarray, lo: float, hi: float):
    vals, vecs = hermitian_eig(matrix)
    clipped = np.clip(vals, lo, hi)
    moved = float(np.sum(np.abs(vals - clipped)))
    if moved == 0.0:
        return matrix, 0.0
    return symmetrize((vecs * clipped) @ vecs.conj().T), moved


def kernel_matrix(
    spec: DomainSpec, grid: Grid, clamp_delta: float = DEFAULT_CLAMP_DELTA
) -> DppKernel:
    """Discretize the kernel on the grid as a strict contraction.

    The clamp margin delta keeps the L-ensemble and conditioning
    resolvents well defined downstream.  Raises GridTooCoarseError when
    clamping moved more than 10% of the trace.
    """
    root_mu = np.sqrt(grid.mu())
    raw = _kernel_values(spec, grid.points)
    mat = symmetrize(root_mu[:, None] * raw * root_mu[None, :])
    trace = float(np.trace(mat).real)
    mat, moved = _clamp_with_mass(mat, 0.0, 1.0 - clamp_delta)
    if trace > 0 and moved > 0.10 * trace:
        raise GridTooCoarseError(
            f"clamp moved {moved:.3e} of trace {trace:.3e}; refine the grid"
        )
    return DppKernel(mat, is_projection=False, grid=grid, clamp_mass=moved)


def basis_projection_kernel(alpha: float, n_basis: int, grid: Grid) -> DppKernel:
    """Projection onto the first n_basis monomials in the discrete inner product.

    Disk grids only: columns sqrt(mu_i) z_i^n are orthonormalized (QR) and
    the kernel is Q Q*, an exact rank-n_basis projection.
    """
    if not isinstance(grid.spec, Disk):
        raise ValueError("basis projection kernels are defined on disk grids")
    if n_basis > grid.size:
        raise ValueError(f"rank {n_basis} exceeds grid size {grid.size}")
    if n_basis < 1:
        raise ValueError("need at least one basis function")
    z = grid.points[:, 0]
    root_mu = np.sqrt(grid.mu())
    cols = np.stack([root_mu * z**n for n in range(n_basis)], axis=1)
    q, _ = np.linalg.qr(cols)
    mat = symmetrize(q @ q.conj().T)
    return DppKernel(mat, is_projection=True, grid=grid)


def _subgrid(grid: Optional[Grid], subset: Sequence[int]) -> Optional[Grid]:
    if grid is None:
        return None
    idx = np.asarray(subset, dtype=int)
    return Grid(
        grid.spec, grid.points[idx], grid.quad_weights[idx], grid.weight_values[idx]
    )


def restrict(kernel: DppKernel, subset: Sequence[int]) -> DppKernel:
    """Principal submatrix on `subset`; spectrum stays in [0,1] by interlacing."""
    idx = sorted(set(int(i) for i in subset))
    if idx and (idx[0] < 0 or idx[-1] >= kernel.size):
        raise IndexError(f"subset {idx} outside ground set of size {kernel.size}")
    sub = kernel.matrix[np.ix_(idx, idx)]
    full = len(idx) == kernel.size
    return DppKernel(
        sub,
        is_projection=kernel.is_projection and full,
        grid=_subgrid(kernel.grid, idx),
    )


def zero_block(kernel: DppKernel, block: Sequence[int]) -> DppKernel:
    """Compression chi_Bc K chi_Bc: kill all rows and columns in `block`.

    Keeps PSD and the [0,1] spectrum; the construction used for the
    number-insertion counterexample (a kernel with no mass on B).
    """
    idx = np.asarray(sorted(set(int(i) for i in block)), dtype=int)
    mat = kernel.matrix.copy()
    mat[idx, :] = 0.0
    mat[:, idx] = 0.0
    return DppKernel(mat, is_projection=False, grid=kernel.grid)


def grid_to_csv(grid: Grid) -> str:
    """CSV dump (x_j, y_j per coordinate, quad_weight, weight_value)."""
    import csv

    d = dimension(grid.spec)
    buf = io.StringIO()
    writer = csv.writer(buf)
    header = []
    for j in range(d):
        header += [f"x{j}", f"y{j}"]
    writer.writerow(header + ["quad_weight", "weight_value"])
    for i in range(grid.size):
        row = []
        for j in range(d):
            row += [repr(grid.points[i, j].real), repr(grid.points[i, j].imag)]
        row += [repr(float(grid.quad_weights[i])), repr(float(grid.weight_values[i]))]
        writer.writerow(row)
    return buf.getvalue()
