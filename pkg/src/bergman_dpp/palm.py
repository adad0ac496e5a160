"""Reduced Palm kernels of any order, by two independent formulas.

The production path iterates the one-point Schur compression

    K^p(x, y) = K(x, y) - K(x, p) K(p, y) / K(p, p),

which drops the rank of a projection by exactly one and annihilates row
and column p.  The bordered-determinant ratio (the closed form for the
kernel of the conditioned process) is kept purely as a cross-check
oracle: it forms large determinants and is numerically the weaker route.

Degenerate pivots are refused rather than regularized: the Palm measure
is only defined at tuples of positive correlation, and a vanishing pivot
is that boundary showing up.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple

import numpy as np

from .discretize import DppKernel
from .dpp import Pmf, correlation, exact_distribution
from .errors import UndefinedPalmError
from .numerics import schur_complement_update

PalmTuple = Tuple[int, ...]

PIVOT_FLOOR = 1e-12


def as_palm_tuple(indices: Iterable[int], ground_size: int) -> PalmTuple:
    out = tuple(int(i) for i in indices)
    if len(set(out)) != len(out):
        raise ValueError(f"palm tuple {out} has repeated indices")
    if out and (min(out) < 0 or max(out) >= ground_size):
        raise ValueError(f"palm tuple {out} outside ground set of size {ground_size}")
    return out


def palm_schur(kernel: DppKernel, p: int) -> DppKernel:
    """One-point reduced Palm kernel via the Schur update."""
    p = int(p)
    if not 0 <= p < kernel.size:
        raise ValueError(f"index {p} outside ground set")
    piv = kernel.matrix[p, p].real
    if piv <= PIVOT_FLOOR:
        raise UndefinedPalmError(
            f"K[{p},{p}] = {piv:.3e} <= {PIVOT_FLOOR:g}: Palm measure undefined here"
        )
    return DppKernel(
        schur_complement_update(kernel.matrix, p),
        is_projection=kernel.is_projection,
        grid=kernel.grid,
    )


def palm_kernel(kernel: DppKernel, p: Iterable[int]) -> DppKernel:
    """Reduced Palm kernel at an l-tuple, by iterated Schur compressions."""
    tup = as_palm_tuple(p, kernel.size)
    if tup and correlation(kernel, tup) <= PIVOT_FLOOR:
        raise UndefinedPalmError(
            f"correlation at {tup} is <= {PIVOT_FLOOR:g}: Palm measure undefined here"
        )
    out = kernel
    for idx in tup:
        out = palm_schur(out, idx)
    return out


def palm_ratio(kernel: DppKernel, p: Iterable[int], x: int, y: int) -> complex:
    """Entry (x, y) of the Palm kernel by the bordered-determinant ratio.

    det of the (l+1) x (l+1) matrix indexed by (x, p_1..p_l) against
    (y, p_1..p_l), divided by the l x l correlation minor.  Cross-check
    oracle only; see module docstring.
    """
    tup = as_palm_tuple(p, kernel.size)
    k = kernel.matrix
    rows = (int(x),) + tup
    cols = (int(y),) + tup
    denom = complex(np.linalg.det(k[np.ix_(tup, tup)])) if tup else 1.0
    if abs(denom) <= PIVOT_FLOOR:
        raise UndefinedPalmError(f"singular correlation minor at {tup}")
    numer = complex(np.linalg.det(k[np.ix_(rows, cols)]))
    return numer / denom


def palm_distribution_oracle(kernel: DppKernel, p: Iterable[int]) -> Pmf:
    """Brute-force reduced Palm pmf: condition on containing p, then drop p.

    Configurations keep their original ground-set labels (minus the
    conditioned indices), so the result compares directly against
    exact_distribution(palm_kernel(K, p)).
    """
    if kernel.size > 10:
        raise ValueError("palm oracle limited to m <= 10")
    tup = as_palm_tuple(p, kernel.size)
    pset = set(tup)
    pmf = exact_distribution(kernel)
    total = sum(mass for cfg, mass in pmf.items() if pset.issubset(cfg))
    if total < 1e-12:
        raise UndefinedPalmError(f"conditioning event at {tup} has mass {total:.3e}")
    out: Pmf = {}
    for cfg, mass in pmf.items():
        if pset.issubset(cfg):
            reduced = tuple(i for i in cfg if i not in pset)
            out[reduced] = out.get(reduced, 0.0) + mass / total
    return out
