"""Conditional kernels given a frozen exterior configuration, plus probes.

Freezing the configuration outside W turns the process on W into another
DPP whose kernel is the W-compression of

    K^ext (1 - chi_{W^c} K^ext)^(-1),

with K^ext the reduced Palm kernel at the exterior points.  In block
form (O = W^c) this is K_WW + K_WO (I_O - K_OO)^(-1) K_OW, i.e.
I - K_cond is the Schur complement of I - K^ext onto W; for a strict
contraction the conditional kernel therefore stays a strict contraction
with at least the same spectral margin.

The probes sample exterior configurations and measure, per sample, the
conditional gap probability det(I - K_cond) (deletion tolerance: must
stay positive) or trace(K_cond) (number insertion tolerance: must stay
positive).  A singular resolvent is reported as an event, never
regularized away.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .discretize import DppKernel
from .dpp import (
    Configuration,
    Pmf,
    RngSeed,
    as_configuration,
    exact_distribution,
    sample,
)
from .errors import ContractViolationError, SingularResolventError, UndefinedPalmError
from .numerics import fredholm_det_finite, hermitian_eig, solve, symmetrize
from .palm import palm_kernel

RESOLVENT_FLOOR = 1e-10
PASS_MARGIN = 1e-9


def conditional_kernel(
    kernel: DppKernel, window: Iterable[int], exterior: Iterable[int]
) -> DppKernel:
    """Kernel on `window` of the process conditioned on `exterior` outside it."""
    w_idx = as_configuration(window, kernel.size)
    ext = as_configuration(exterior, kernel.size)
    if set(ext) & set(w_idx):
        raise ValueError("exterior configuration must lie outside the window")
    kp = palm_kernel(kernel, ext) if ext else kernel
    out_idx = tuple(i for i in range(kernel.size) if i not in set(w_idx))
    a = kp.matrix
    a_ww = a[np.ix_(w_idx, w_idx)]
    if not out_idx:
        mat = a_ww
    else:
        a_oo = a[np.ix_(out_idx, out_idx)]
        a_ow = a[np.ix_(out_idx, w_idx)]
        a_wo = a[np.ix_(w_idx, out_idx)]
        resolvent = np.eye(len(out_idx), dtype=complex) - a_oo
        sv = np.linalg.svd(resolvent, compute_uv=False)
        if sv.size and sv[-1] <= RESOLVENT_FLOOR * max(1.0, sv[0]):
            raise SingularResolventError(
                f"resolvent smallest singular value {sv[-1]:.3e}; "
                "conditioning geometry is degenerate"
            )
        mat = a_ww + a_wo @ solve(resolvent, a_ow)
    mat = symmetrize(mat)
    vals, vecs = hermitian_eig(mat)
    if vals.size and (vals.min() < -1e-6 or vals.max() > 1.0 + 1e-6):
        raise ContractViolationError(
            f"conditional kernel spectrum [{vals.min():.3e}, {vals.max():.3e}] "
            "far outside [0, 1]"
        )
    clipped = np.clip(vals, 0.0, 1.0)
    if vals.size and (vals.min() < 0.0 or vals.max() > 1.0):
        mat = symmetrize((vecs * clipped) @ vecs.conj().T)
    return DppKernel(mat, is_projection=False)


def conditional_oracle(
    kernel: DppKernel, window: Iterable[int], exterior: Iterable[int]
) -> Pmf:
    """Brute-force conditional pmf on subsets of `window` (original labels)."""
    if kernel.size > 10:
        raise ValueError("conditional oracle limited to m <= 10")
    w_idx = as_configuration(window, kernel.size)
    ext = as_configuration(exterior, kernel.size)
    w_set = set(w_idx)
    if set(ext) & w_set:
        raise ValueError("exterior configuration must lie outside the window")
    pmf = exact_distribution(kernel)
    out: Pmf = {}
    total = 0.0
    for cfg, mass in pmf.items():
        if tuple(i for i in cfg if i not in w_set) == ext:
            inside = tuple(i for i in cfg if i in w_set)
            out[inside] = out.get(inside, 0.0) + mass
            total += mass
    if total < 1e-12:
        raise ContractViolationError(
            f"conditioning event {ext} outside {w_idx} has mass {total:.3e}"
        )
    return {cfg: mass / total for cfg, mass in out.items()}


@dataclass(frozen=True)
class ProbeReport:
    probe: str
    samples: int
    seed: Tuple[int, int]
    passed: bool
    min_gap: float
    max_lambda: float
    trace_stats: Dict[str, float]
    singular_events: int = 0
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "probe": self.probe,
            "samples": self.samples,
            "seed": list(self.seed),
            "pass": self.passed,
            "min_gap": self.min_gap,
            "max_lambda": self.max_lambda,
            "trace_stats": self.trace_stats,
            "singular_events": self.singular_events,
            "notes": self.notes,
        }


def _sampled_conditionings(
    kernel: DppKernel,
    block: Sequence[int],
    samples: int,
    rng: RngSeed,
    threads: int = 1,
):
    """Per sampled configuration: conditional kernel on `block` given the rest."""
    b_set = set(block)

    def one(i: int):
        cfg = sample(kernel, rng.shifted(i))
        ext = tuple(j for j in cfg if j not in b_set)
        try:
            return conditional_kernel(kernel, block, ext)
        except SingularResolventError:
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(samples)))
    return [one(i) for i in range(samples)]


def _trace_stats(traces: List[float]) -> Dict[str, float]:
    if not traces:
        return {"min": float("nan"), "max": float("nan"), "mean": float("nan")}
    arr = np.asarray(traces)
    return {"min": float(arr.min()), "max": float(arr.max()), "mean": float(arr.mean())}


def deletion_tolerance_probe(
    kernel: DppKernel,
    block: Iterable[int],
    samples: int,
    rng: RngSeed,
    threads: int = 1,
) -> ProbeReport:
    """Empirical strict-contractivity check of the conditional kernels on B.

    PASS iff over all sampled exteriors the conditional gap probability
    stays positive and the top conditional eigenvalue stays below
    1 - 1e-9 (and no conditioning was degenerate).
    """
    b_idx = as_configuration(block, kernel.size)
    if not b_idx:
        raise ValueError("deletion probe needs a nonempty block")
    kconds = _sampled_conditionings(kernel, b_idx, samples, rng, threads)
    gaps, lambdas, traces, singular = [], [], [], 0
    for kc in kconds:
        if kc is None:
            singular += 1
            continue
        vals = hermitian_eig(kc.matrix).eigenvalues
        lambdas.append(float(vals.max()) if vals.size else 0.0)
        gaps.append(fredholm_det_finite(kc.matrix))
        traces.append(kc.trace())
    passed = (
        singular == 0
        and bool(gaps)
        and min(gaps) > 0.0
        and max(lambdas) < 1.0 - PASS_MARGIN
    )
    return ProbeReport(
        probe="deletion",
        samples=samples,
        seed=(rng.seed, rng.stream),
        passed=passed,
        min_gap=min(gaps) if gaps else 0.0,
        max_lambda=max(lambdas) if lambdas else 1.0,
        trace_stats=_trace_stats(traces),
        singular_events=singular,
    )


def number_insertion_probe(
    kernel: DppKernel,
    block: Iterable[int],
    samples: int,
    rng: RngSeed,
    threads: int = 1,
) -> ProbeReport:
    """Empirical non-vanishing check of the conditional kernels on B.

    PASS iff trace(K_cond) > 1e-9 for every sampled exterior: the
    conditional probability of seeing a point in B, 1 - det(I - K_cond),
    is then positive throughout.
    """
    b_idx = as_configuration(block, kernel.size)
    if not b_idx:
        raise ValueError("insertion probe needs a nonempty block")
    kconds = _sampled_conditionings(kernel, b_idx, samples, rng, threads)
    hit_probs, lambdas, traces, singular = [], [], [], 0
    for kc in kconds:
        if kc is None:
            singular += 1
            continue
        vals = hermitian_eig(kc.matrix).eigenvalues
        lambdas.append(float(vals.max()) if vals.size else 0.0)
        hit_probs.append(1.0 - fredholm_det_finite(kc.matrix))
        traces.append(kc.trace())
    passed = singular == 0 and bool(traces) and min(traces) > PASS_MARGIN
    return ProbeReport(
        probe="insertion",
        samples=samples,
        seed=(rng.seed, rng.stream),
        passed=passed,
        min_gap=1.0 - max(hit_probs) if hit_probs else 1.0,
        max_lambda=max(lambdas) if lambdas else 0.0,
        trace_stats=_trace_stats(traces),
        singular_events=singular,
        notes="trace_stats.min is the decisive statistic",
    )


def diffusive_density(kernel: DppKernel, n: int, config: Iterable[int]) -> float:
    """P(X = A | #X = n) for a strict-contraction conditional kernel.

    Positive exactly where the corresponding determinant density is, the
    discrete shadow of conditional laws being equivalent to n-fold
    Lebesgue measure.
    """
    cfg = as_configuration(config, kernel.size)
    if len(cfg) != n:
        raise ValueError(f"configuration size {len(cfg)} != n = {n}")
    pmf = exact_distribution(kernel)
    level = sum(mass for c, mass in pmf.items() if len(c) == n)
    if level < 1e-12:
        raise ContractViolationError(f"P(# = {n}) = {level:.3e} too small")
    return pmf.get(cfg, 0.0) / level
