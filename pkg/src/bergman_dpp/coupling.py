"""Monotone couplings on small ground sets via max-flow, plus order checks.

A coupling of two configuration pmfs with support on {(A, A') : A' <= A}
exists iff the lower pmf is stochastically dominated by the upper one;
feasibility is decided exactly (up to float tolerance) by max-flow on
the bipartite subset-pair lattice: source -> A with capacity P_upper(A),
A -> A' for A' <= A with infinite capacity, A' -> sink with capacity
P_lower(A').  Infeasibility yields a genuine certificate: the up-set
generated by the lower configurations unreachable in the residual graph
violates P_lower(U) <= P_upper(U).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .discretize import DppKernel
from .dpp import Configuration, Pmf, RngSeed, exact_distribution, sample
from .errors import DominationError

MASS_PRUNE = 1e-14
FEASIBLE_TOL = 1e-9


@dataclass(frozen=True)
class CouplingTable:
    """Joint pmf over pairs (upper, lower) with lower <= upper pointwise."""

    pairs: Dict[Tuple[Configuration, Configuration], float]

    def total_mass(self) -> float:
        return sum(self.pairs.values())

    def upper_marginal(self) -> Pmf:
        out: Pmf = {}
        for (a, _), mass in self.pairs.items():
            out[a] = out.get(a, 0.0) + mass
        return out

    def lower_marginal(self) -> Pmf:
        out: Pmf = {}
        for (_, b), mass in self.pairs.items():
            out[b] = out.get(b, 0.0) + mass
        return out

    def mean_size_difference(self) -> float:
        return sum(mass * (len(a) - len(b)) for (a, b), mass in self.pairs.items())


class _FlowNetwork:
    """Adjacency-list max-flow with BFS augmenting paths and capacity scaling."""

    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.to: List[int] = []
        self.cap: List[float] = []
        self.head: List[List[int]] = [[] for _ in range(n_nodes)]

    def add_edge(self, u: int, v: int, cap: float) -> int:
        eid = len(self.to)
        self.to.append(v)
        self.cap.append(cap)
        self.head[u].append(eid)
        self.to.append(u)
        self.cap.append(0.0)
        self.head[v].append(eid + 1)
        return eid

    def _bfs(self, s: int, t: int, delta: float):
        prev_edge = [-1] * self.n
        prev_edge[s] = -2
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if u == t:
                break
            for eid in self.head[u]:
                v = self.to[eid]
                if prev_edge[v] == -1 and self.cap[eid] >= delta:
                    prev_edge[v] = eid
                    queue.append(v)
        if prev_edge[t] == -1:
            return None
        path = []
        v = t
        while v != s:
            eid = prev_edge[v]
            path.append(eid)
            v = self.to[eid ^ 1]
        return path

    def max_flow(self, s: int, t: int, delta_min: float = 1e-15) -> float:
        total = 0.0
        delta = 1.0
        while delta >= delta_min:
            path = self._bfs(s, t, delta)
            if path is None:
                delta /= 2.0
                continue
            bottleneck = min(self.cap[eid] for eid in path)
            for eid in path:
                self.cap[eid] -= bottleneck
                self.cap[eid ^ 1] += bottleneck
            total += bottleneck
        return total

    def reachable(self, s: int, eps: float = 1e-13):
        seen = [False] * self.n
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for eid in self.head[u]:
                v = self.to[eid]
                if not seen[v] and self.cap[eid] > eps:
                    seen[v] = True
                    queue.append(v)
        return seen


def monotone_coupling(p_upper: Pmf, p_lower: Pmf) -> CouplingTable:
    """Feasible monotone coupling of two pmfs, or a domination certificate.

    Masses below 1e-14 are pruned before flow construction (numerical
    dust stalls augmenting paths).  Raises DominationError carrying the
    violating up-set when max-flow falls short of full mass.
    """
    uppers = [cfg for cfg, mass in sorted(p_upper.items()) if mass > MASS_PRUNE]
    lowers = [cfg for cfg, mass in sorted(p_lower.items()) if mass > MASS_PRUNE]
    n_up, n_lo = len(uppers), len(lowers)
    source, sink = 0, 1
    net = _FlowNetwork(2 + n_up + n_lo)
    up_node = {cfg: 2 + i for i, cfg in enumerate(uppers)}
    lo_node = {cfg: 2 + n_up + i for i, cfg in enumerate(lowers)}
    for cfg in uppers:
        net.add_edge(source, up_node[cfg], p_upper[cfg])
    for cfg in lowers:
        net.add_edge(lo_node[cfg], sink, p_lower[cfg])
    middle: Dict[int, Tuple[Configuration, Configuration]] = {}
    for a in uppers:
        a_set = set(a)
        for b in lowers:
            if a_set.issuperset(b):
                eid = net.add_edge(up_node[a], lo_node[b], 2.0)
                middle[eid] = (a, b)
    flow = net.max_flow(source, sink)
    want = sum(p_lower[cfg] for cfg in lowers)
    if flow < want - FEASIBLE_TOL:
        seen = net.reachable(source)
        stranded = [cfg for cfg in lowers if not seen[lo_node[cfg]]]
        upset = frozenset(stranded)
        mass_lo = sum(
            mass
            for cfg, mass in p_lower.items()
            if any(set(cfg).issuperset(d) for d in stranded)
        )
        mass_up = sum(
            mass
            for cfg, mass in p_upper.items()
            if any(set(cfg).issuperset(d) for d in stranded)
        )
        raise DominationError(
            f"no monotone coupling: up-set generated by {len(stranded)} "
            f"configurations has lower mass {mass_lo:.6f} > upper mass {mass_up:.6f}",
            certificate=upset,
            violation=mass_lo - mass_up,
        )
    pairs = {
        middle[eid]: net.cap[eid ^ 1]
        for eid in middle
        if net.cap[eid ^ 1] > MASS_PRUNE
    }
    return CouplingTable(pairs)


@dataclass(frozen=True)
class DominationReport:
    passed: bool
    worst_margin: float
    exact: bool
    checks: int
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "worst_margin": self.worst_margin,
            "exact": self.exact,
            "checks": self.checks,
            "notes": self.notes,
        }


def domination_check(
    kernel_upper: DppKernel,
    kernel_lower: DppKernel,
    samples: int = 0,
    rng: RngSeed | None = None,
    tol: float = 1e-9,
) -> DominationReport:
    """Increasing-functional battery: E_lower <= E_upper for counts.

    Exact via brute-force pmfs when m <= 10 (singleton membership
    probabilities, nested-set count distributions P(#S >= t)); Monte
    Carlo with a 3-sigma allowance otherwise.
    """
    if kernel_upper.size != kernel_lower.size:
        raise ValueError("kernels must share a ground set")
    m = kernel_upper.size
    if m <= 10:
        pu = exact_distribution(kernel_upper)
        pl = exact_distribution(kernel_lower)
        worst = -np.inf
        checks = 0
        for k in range(1, m + 1):
            nested = set(range(k))
            for t in range(1, k + 1):
                up = sum(mass for cfg, mass in pu.items() if len(nested & set(cfg)) >= t)
                lo = sum(mass for cfg, mass in pl.items() if len(nested & set(cfg)) >= t)
                worst = max(worst, lo - up)
                checks += 1
        for i in range(m):
            up = float(kernel_upper.matrix[i, i].real)
            lo = float(kernel_lower.matrix[i, i].real)
            worst = max(worst, lo - up)
            checks += 1
        return DominationReport(worst <= tol, float(worst), True, checks)
    if rng is None or samples <= 0:
        raise ValueError("Monte Carlo domination check needs samples and rng")
    worst = -np.inf
    checks = 0
    counts_u = np.zeros((samples, m))
    counts_l = np.zeros((samples, m))
    for i in range(samples):
        cu = sample(kernel_upper, rng.shifted(2 * i))
        cl = sample(kernel_lower, rng.shifted(2 * i + 1))
        for k in range(m):
            counts_u[i, k] = sum(1 for x in cu if x <= k)
            counts_l[i, k] = sum(1 for x in cl if x <= k)
    for k in range(m):
        mu_u, mu_l = counts_u[:, k].mean(), counts_l[:, k].mean()
        sd = np.sqrt(
            counts_u[:, k].var(ddof=1) / samples + counts_l[:, k].var(ddof=1) / samples
        )
        worst = max(worst, (mu_l - mu_u) - 3.0 * sd)
        checks += 1
    return DominationReport(worst <= tol, float(worst), False, checks)


@dataclass(frozen=True)
class TraceBoundReport:
    passed: bool
    mean_difference: float
    trace_upper: float
    trace_lower: float
    trace_of_difference: float

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "mean_difference": self.mean_difference,
            "trace_upper": self.trace_upper,
            "trace_lower": self.trace_lower,
            "trace_of_difference": self.trace_of_difference,
        }


def difference_trace_bound(
    kernel: DppKernel,
    palm: DppKernel,
    coupling: CouplingTable,
    tol: float = 1e-9,
) -> TraceBoundReport:
    """Check E[#A - #A'] = tr K - tr K^p and <= tr(K - K^p) on the coupling."""
    mean_diff = coupling.mean_size_difference()
    tr_u = kernel.trace()
    tr_l = palm.trace()
    tr_diff = float(np.trace(kernel.matrix - palm.matrix).real)
    passed = abs(mean_diff - (tr_u - tr_l)) <= tol and mean_diff <= tr_diff + tol
    return TraceBoundReport(passed, mean_diff, tr_u, tr_l, tr_diff)
