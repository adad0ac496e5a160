"""Dense complex Hermitian linear algebra used by every other module.

Thin contract-enforcing wrappers around LAPACK (through numpy): explicit
symmetrization ahead of every eigendecomposition, spectrum checks for
kernel matrices, and eigenvalue-routed determinants where products of
(1 - lambda) must not cancel.  All functions are pure and thread-safe.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ContractViolationError, SingularMatrixError

# Spectrum of a kernel matrix may stick out of [0, 1] by at most this much.
SPECTRUM_SLACK = 1e-9


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray   # real, ascending
    eigenvectors: np.ndarray  # columns of a unitary matrix


def symmetrize(m: np.ndarray) -> np.ndarray:
    """(M + M*)/2.  Quadrature assembly leaves O(1e-14) asymmetry behind."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def _require_square(m: np.ndarray, op: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{op} needs a square matrix, got shape {m.shape}")
    return m


def hermitian_eig(m: np.ndarray) -> HermitianEig:
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.

    The input is symmetrized first, so inputs Hermitian only to ~1e-12
    are accepted silently.
    """
    m = _require_square(m, "hermitian_eig")
    if m.shape[0] == 0:
        return HermitianEig(np.zeros(0), np.zeros((0, 0), dtype=complex))
    if not np.all(np.isfinite(m)):
        raise ValueError("hermitian_eig: non-finite entries")
    try:
        vals, vecs = np.linalg.eigh(symmetrize(m))
    except np.linalg.LinAlgError as exc:  # pathological input
        raise ContractViolationError(f"eigensolver did not converge: {exc}") from exc
    return HermitianEig(vals, vecs)


def det(m: np.ndarray) -> complex:
    """Determinant via partial-pivot LU.  Singular input simply returns ~0."""
    m = _require_square(m, "det")
    if m.shape[0] == 0:
        return 1.0 + 0.0j
    return complex(np.linalg.det(m))


def solve(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve M X = B for well-conditioned square M.

    Raises SingularMatrixError (with a condition estimate) when LAPACK
    fails or the residual exceeds 1e-9 * ||B||_max.
    """
    m = _require_square(m, "solve")
    b = np.asarray(b, dtype=complex)
    try:
        x = np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            f"singular matrix in solve: {exc}", cond_estimate=_cond_estimate(m)
        ) from exc
    scale = max(np.max(np.abs(b)), 1e-300)
    residual = np.max(np.abs(m @ x - b))
    if not np.isfinite(residual) or residual > 1e-9 * scale:
        raise SingularMatrixError(
            f"solve residual {residual:.3e} exceeds 1e-9 * ||B||",
            cond_estimate=_cond_estimate(m),
        )
    return x


def _cond_estimate(m: np.ndarray) -> float:
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError:
        return np.inf
    if s.size == 0 or s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def fredholm_det_finite(k: np.ndarray) -> float:
    """det(I - K) = prod(1 - lambda_k) for a Hermitian K with spectrum in [0, 1].

    Computed through eigenvalues: the gap probability is a product of
    (1 - lambda) factors and must not be formed by LU cancellation.
    """
    vals = hermitian_eig(k).eigenvalues
    if vals.size == 0:
        return 1.0
    if vals.min() < -SPECTRUM_SLACK or vals.max() > 1.0 + SPECTRUM_SLACK:
        raise ContractViolationError(
            f"spectrum [{vals.min():.3e}, {vals.max():.3e}] outside [0, 1] "
            f"beyond slack {SPECTRUM_SLACK:g}"
        )
    vals = np.clip(vals, 0.0, 1.0)
    return float(np.prod(1.0 - vals))


def schur_complement_update(m: np.ndarray, p: int) -> np.ndarray:
    """M - M[:,p] M[p,:] / M[p,p], with row and column p zeroed exactly.

    The one-point reduced-Palm compression of a PSD contraction; also the
    per-draw projection update of the sequential sampler, so sampler and
    Palm calculus share this single code path.  Caller validates the pivot.
    """
    m = np.asarray(m, dtype=complex)
    piv = m[p, p].real
    out = m - np.outer(m[:, p], m[p, :]) / piv
    out[p, :] = 0.0
    out[:, p] = 0.0
    return symmetrize(out)


def psd_clamp(m: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Clamp the spectrum of a Hermitian matrix into [lo, hi].

    Eigenvectors are preserved; a matrix already in range is returned
    bit-identically, which also makes the operation idempotent.
    """
    if lo > hi:
        raise ValueError(f"psd_clamp: lo={lo} > hi={hi}")
    m = np.asarray(m, dtype=complex)
    vals, vecs = hermitian_eig(m)
    if vals.size == 0 or (vals.min() >= lo and vals.max() <= hi):
        return m
    clipped = np.clip(vals, lo, hi)
    return symmetrize((vecs * clipped) @ vecs.conj().T)
