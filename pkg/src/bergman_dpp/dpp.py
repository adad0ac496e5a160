"""Core finite-ground-set DPP machinery.

Correlations are principal minors det(K_A); the gap probability is
det(I - K_B); the point count is Poisson-binomial in the spectrum; exact
sampling follows the spectral-thinning scheme (Bernoulli selection of
eigenvectors, then sequential one-point conditioning of the resulting
projection).  Brute-force distributions for m <= 12 serve as oracles for
everything downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

from .discretize import DppKernel, restrict
from .errors import ContractViolationError
from .numerics import fredholm_det_finite, hermitian_eig, schur_complement_update

Configuration = Tuple[int, ...]
Pmf = Dict[Configuration, float]

_EXACT_LIMIT = 12
_PROJECTION_EIG_TOL = 1e-9


@dataclass(frozen=True)
class RngSeed:
    """Counter-based RNG identity; (seed, stream) reruns are bit-identical."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.seed % 2**64, self.stream % 2**64], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))

    def shifted(self, offset: int) -> "RngSeed":
        return RngSeed(self.seed, self.stream + offset)


def as_configuration(indices: Iterable[int], ground_size: int | None = None) -> Configuration:
    out = tuple(sorted(set(int(i) for i in indices)))
    if out and out[0] < 0:
        raise ValueError("negative index in configuration")
    if ground_size is not None and out and out[-1] >= ground_size:
        raise ValueError(f"index {out[-1]} outside ground set of size {ground_size}")
    return out


def correlation(kernel: DppKernel, subset: Iterable[int]) -> float:
    """Joint inclusion density det K_A (the |A|-point correlation)."""
    idx = as_configuration(subset, kernel.size)
    if not idx:
        return 1.0
    minor = kernel.matrix[np.ix_(idx, idx)]
    val = complex(np.linalg.det(minor))
    if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
        raise ContractViolationError(f"correlation not real: {val}")
    return val.real


def gap_probability(kernel: DppKernel, block: Iterable[int]) -> float:
    """P(no points in `block`) = det(I - K_B)."""
    idx = as_configuration(block, kernel.size)
    if not idx:
        return 1.0
    return fredholm_det_finite(restrict(kernel, idx).matrix)


def number_distribution(kernel: DppKernel) -> np.ndarray:
    """Exact pmf of the point count: Poisson-binomial over the spectrum."""
    lam = np.clip(hermitian_eig(kernel.matrix).eigenvalues, 0.0, 1.0)
    pmf = np.zeros(kernel.size + 1)
    pmf[0] = 1.0
    for k, p in enumerate(lam):
        pmf[1 : k + 2] = pmf[1 : k + 2] * (1.0 - p) + pmf[: k + 1] * p
        pmf[0] *= 1.0 - p
    return pmf


def sample(kernel: DppKernel, rng: RngSeed) -> Configuration:
    """One exact draw by spectral thinning + sequential conditioning.

    Eigenvector k survives with probability lambda_k; the surviving
    projection is then sampled point by point, the projection being
    replaced by its one-point reduced Palm compression after each draw
    (the same Schur update the palm module uses).
    """
    gen = rng.generator()
    vals, vecs = hermitian_eig(kernel.matrix)
    lam = np.clip(vals, 0.0, 1.0)
    keep = gen.random(kernel.size) < lam
    n = int(keep.sum())
    if n == 0:
        return ()
    v = vecs[:, keep]
    proj = v @ v.conj().T
    chosen = []
    for step in range(n):
        diag = np.clip(np.diag(proj).real, 0.0, None)
        total = diag.sum()
        if total < 1e-12:
            raise ContractViolationError("projection diagonal mass vanished mid-sample")
        cum = np.cumsum(diag)
        x = int(np.searchsorted(cum, gen.random() * cum[-1], side="right"))
        x = min(x, kernel.size - 1)
        if diag[x] <= 0.0:  # exact zeros are skipped by construction
            x = int(np.argmax(diag))
        chosen.append(x)
        if step + 1 < n:
            proj = schur_complement_update(proj, x)
    return tuple(sorted(chosen))


def _masks_by_size(m: int):
    order = sorted(range(1 << m), key=lambda s: (bin(s).count("1"), s))
    return order


def _mask_to_config(mask: int, m: int) -> Configuration:
    return tuple(i for i in range(m) if mask >> i & 1)


def exact_distribution(kernel: DppKernel) -> Pmf:
    """Brute-force pmf over all 2^m configurations (m <= 12).

    Strict contractions go through the L-ensemble
    P(A) = det(L_A)/det(I+L) with L = K (I-K)^(-1); projection-flagged
    kernels use Moebius inversion of the correlations,
    P(A) = sum_{B >= A} (-1)^(|B|-|A|) det(K_B).
    """
    m = kernel.size
    if m > _EXACT_LIMIT:
        raise ValueError(f"exact distribution limited to m <= {_EXACT_LIMIT}, got {m}")
    vals, vecs = hermitian_eig(kernel.matrix)
    lam = np.clip(vals, 0.0, 1.0)
    if kernel.is_projection:
        probs = _exact_projection(kernel.matrix, m)
    elif lam.max() < 1.0 - _PROJECTION_EIG_TOL:
        lmat = (vecs * (lam / (1.0 - lam))) @ vecs.conj().T
        log_norm = float(-np.sum(np.log1p(-lam)))
        probs = np.empty(1 << m)
        for mask in range(1 << m):
            idx = [i for i in range(m) if mask >> i & 1]
            if not idx:
                probs[mask] = np.exp(-log_norm)
                continue
            d = np.linalg.det(lmat[np.ix_(idx, idx)]).real
            probs[mask] = max(d, 0.0) * np.exp(-log_norm)
    else:
        raise ContractViolationError(
            "eigenvalue at 1 on the L-ensemble path; flag the kernel as a projection"
        )
    total = probs.sum()
    if probs.min() < -1e-9 or abs(total - 1.0) > 1e-9:
        raise ContractViolationError(
            f"exact pmf invalid: min {probs.min():.3e}, sum {total:.12f}"
        )
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    return {_mask_to_config(mask, m): float(probs[mask]) for mask in range(1 << m)}


def _exact_projection(matrix: np.ndarray, m: int) -> np.ndarray:
    minors = np.empty(1 << m)
    for mask in range(1 << m):
        idx = [i for i in range(m) if mask >> i & 1]
        minors[mask] = (
            1.0 if not idx else np.linalg.det(matrix[np.ix_(idx, idx)]).real
        )
    # superset Moebius transform: probs[A] = sum_{B >= A} (-1)^(|B\A|) minors[B]
    probs = minors.copy()
    for i in range(m):
        bit = 1 << i
        lower = np.array([mask for mask in range(1 << m) if not mask & bit])
        probs[lower] -= probs[lower | bit]
    return probs


def total_variation(p: Pmf, q: Pmf) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def cardinality_pushforward(pmf: Pmf, m: int) -> np.ndarray:
    out = np.zeros(m + 1)
    for cfg, mass in pmf.items():
        out[len(cfg)] += mass
    return out
