"""Weighted Bergman kernels for disk, annulus, polydisk and ball.

Closed forms:

    disk (weight (1+a)(1-|z|^2)^a):  1 / (pi (1 - z conj(w))^(2+a))
    annulus  rho < |z| < 1:          (1/(pi z conj(w)))
                                       * (wp(log(z conj(w))) + eta1/(pi i)
                                          - 1/(2 log rho))
    polydisk:                        prod_j 1 / (pi (1 - z_j conj(w_j))^2)
    ball:                            1 / (V_d (1 - <z, w>)^(d+1)),
                                     V_d = pi^d / d!

The annulus Weierstrass data lives on the lattice with *full* periods
2 pi i and 2 log rho (classical references quote the pair "pi i, log rho",
which are the half-periods of that lattice; the Laurent-series oracle
below adjudicates the convention and agrees with the full-period choice
to machine precision).  eta1 = wzeta(pi i) on that lattice.

Independent truncation oracles (`annulus_laurent_oracle`,
`disk_basis_kernel`) are kept alongside: they share no code with the
closed forms and are the decisive cross-check for the elliptic module.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Union

import numpy as np

from .elliptic import PeriodPair, eta1, wp
from .errors import DomainError

# Cap for the annulus nome series; the adaptive 1e-16 cutoff triggers far
# earlier for every rho <= 0.8 (worst case ~170 terms at rho = 0.8).
_ANNULUS_TERMS = 400

# The annulus kernel is exponentially small on a large part of pair space
# (far-apart pairs) while wp and the additive constant stay O(1): the sum
# wp + const cancels.  Below this remaining-significance threshold the
# assembly is redone in extended precision.
_CANCEL_THRESHOLD = 1e-6


@dataclass(frozen=True)
class Disk:
    alpha: float = 0.0

    def __post_init__(self):
        if not self.alpha > -1.0:
            raise ValueError(f"disk weight needs alpha > -1, got {self.alpha}")


@dataclass(frozen=True)
class Annulus:
    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"annulus needs 0 < rho < 1, got {self.rho}")


@dataclass(frozen=True)
class Polydisk:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("polydisk dimension must be >= 1")


@dataclass(frozen=True)
class Ball:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("ball dimension must be >= 1")


DomainSpec = Union[Disk, Annulus, Polydisk, Ball]


def ball_volume(d: int) -> float:
    """Lebesgue volume of the unit ball in C^d: pi^d / d!."""
    return math.pi**d / math.factorial(d)


def dimension(spec: DomainSpec) -> int:
    if isinstance(spec, (Disk, Annulus)):
        return 1
    return spec.d


def _coords(spec: DomainSpec, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (dimension(spec),):
        raise DomainError(f"point of shape {z.shape} for {spec}")
    return z


def contains(spec: DomainSpec, z, margin: float = 0.0) -> bool:
    """Strict interior membership, with an optional safety margin."""
    z = _coords(spec, z)
    if isinstance(spec, Disk):
        return abs(z[0]) < 1.0 - margin
    if isinstance(spec, Annulus):
        return spec.rho + margin < abs(z[0]) < 1.0 - margin
    if isinstance(spec, Polydisk):
        return bool(np.all(np.abs(z) < 1.0 - margin))
    return float(np.sum(np.abs(z) ** 2)) < (1.0 - margin) ** 2


def _require_inside(spec: DomainSpec, z) -> np.ndarray:
    z = _coords(spec, z)
    if not contains(spec, z):
        raise DomainError(f"point {z} not strictly inside {spec}")
    return z


def weight(spec: DomainSpec, z) -> float:
    """Weight of the measure omega dV; only the disk family is non-uniform."""
    z = _require_inside(spec, z)
    if isinstance(spec, Disk):
        return (1.0 + spec.alpha) * (1.0 - abs(z[0]) ** 2) ** spec.alpha
    return 1.0


@lru_cache(maxsize=32)
def _annulus_constants(rho: float):
    log_rho = math.log(rho)
    periods = PeriodPair(2j * math.pi, 2.0 * log_rho)
    const = eta1(periods, _ANNULUS_TERMS) / (1j * math.pi) - 1.0 / (2.0 * log_rho)
    return periods, const


def eval_kernel(spec: DomainSpec, z, w) -> complex:
    """Reproducing kernel K(z, w); Hermitian with K(z, z) real positive."""
    z = _require_inside(spec, z)
    w = _require_inside(spec, w)
    if isinstance(spec, Disk):
        base = 1.0 - z[0] * w[0].conjugate()
        return 1.0 / (math.pi * cmath.exp((2.0 + spec.alpha) * cmath.log(base)))
    if isinstance(spec, Annulus):
        periods, const = _annulus_constants(spec.rho)
        zw = z[0] * w[0].conjugate()
        wp_val = wp(cmath.log(zw), periods, _ANNULUS_TERMS)
        total = wp_val + const
        if abs(total) < _CANCEL_THRESHOLD * max(1.0, abs(wp_val)):
            total = _annulus_sum_extended(spec.rho, zw)
        return total / (math.pi * zw)
    if isinstance(spec, Polydisk):
        out = 1.0 + 0.0j
        for j in range(spec.d):
            out /= math.pi * (1.0 - z[j] * w[j].conjugate()) ** 2
        return out
    inner = complex(np.sum(z * np.conj(w)))
    return 1.0 / (ball_volume(spec.d) * (1.0 - inner) ** (spec.d + 1))


def _annulus_sum_extended(rho: float, zw: complex, dps: int = 40) -> complex:
    """wp(log zw) + eta1/(pi i) - 1/(2 log rho) at `dps` digits.

    Everything is an exact function of the double inputs (rho, z conj(w)),
    so the cancellation region of the printed formula is resolved without
    perturbing what is being computed.  On the annulus lattice the
    half-periods are w1 = pi i, w2 = log rho and the nome is q = rho
    exactly; wp comes from the theta log-derivative,

        wp(u) = -eta1/w1 - (pi/(2 w1))^2 [th1''/th1 - (th1'/th1)^2](v),
        v = pi u/(2 w1),  eta1 = -pi^2 th1'''(0) / (12 w1 th1'(0)).
    """
    import mpmath as mp

    with mp.workdps(dps):
        lr = mp.log(mp.mpf(rho))
        w1 = 1j * mp.pi
        q = mp.mpf(rho)
        u = mp.log(mp.mpc(zw))
        # cell reduction: Im u in (-pi, pi] already, shift Re u by 2 log rho
        n = int(mp.nint(u.real / (2 * lr)))
        u = u - 2 * n * lr
        v = mp.pi * u / (2 * w1)
        t0 = mp.jtheta(1, v, q)
        t1 = mp.jtheta(1, v, q, 1)
        t2 = mp.jtheta(1, v, q, 2)
        eta1m = -mp.pi**2 * mp.jtheta(1, 0, q, 3) / (12 * w1 * mp.jtheta(1, 0, q, 1))
        wp_val = -eta1m / w1 - (mp.pi / (2 * w1)) ** 2 * (t2 / t0 - (t1 / t0) ** 2)
        return complex(wp_val + eta1m / (1j * mp.pi) - 1 / (2 * lr))


class LaurentValue(NamedTuple):
    value: complex
    tail_bound: float


def annulus_laurent_norm(rho: float, n: int) -> float:
    """||z^n||^2 on the annulus: 2 pi (1 - rho^(2n+2)) / (2n+2), log term at n=-1."""
    if n == -1:
        return 2.0 * math.pi * math.log(1.0 / rho)
    return 2.0 * math.pi * (1.0 - rho ** (2 * n + 2)) / (2 * n + 2)


def annulus_laurent_oracle(rho: float, z: complex, w: complex, n_max: int) -> LaurentValue:
    """Truncated orthogonal-basis expansion sum_{|n|<=N} (z conj(w))^n / c_n.

    Independent of the Weierstrass route.  The reported tail bound is the
    geometric estimate for both ends of the two-sided sum; it requires
    rho < |z|, |w| < 1.
    """
    zw = complex(z) * complex(w).conjugate()
    total = 1.0 / annulus_laurent_norm(rho, 0) + (1.0 / zw) / annulus_laurent_norm(rho, -1)
    power = 1.0 + 0.0j
    for n in range(1, n_max + 1):
        power *= zw
        total += power / annulus_laurent_norm(rho, n)
    # n = -m, m >= 2, rewritten with g = rho^2 / (z conj(w)) so that no
    # intermediate overflows: term = (m-1)/pi * g^m / (rho^2 (1 - rho^(2m-2)))
    g = rho**2 / zw
    gm = g
    for m in range(2, n_max + 1):
        gm *= g
        total += (m - 1) / math.pi * gm / (rho**2 * (1.0 - rho ** (2 * m - 2)))
    s = abs(zw)
    t = rho**2 / s
    # positive n >= N+1: terms ~ (n+1) s^n / pi
    pos = (n_max + 2) / math.pi * s ** (n_max + 1) / (1.0 - s) ** 2
    # negative n = -m, m >= N+1: terms <= (m-1) t^(m-1) / (pi s (1 - rho^2))
    neg = (n_max + 1) / (math.pi * s * (1.0 - rho**2)) * t**n_max / (1.0 - t) ** 2
    return LaurentValue(total, pos + neg)


def annulus_laurent_extended(
    rho: float, z: complex, w: complex, rel: float = 1e-12, dps: int = 40
) -> complex:
    """Laurent-basis kernel summed in mpmath arithmetic, adaptively truncated.

    Reference side for the cross-representation check: accurate to ~`rel`
    relative even where the kernel is exponentially small and the double
    summation would lose all significance to cancellation.
    """
    import mpmath as mp

    zw_d = complex(z) * complex(w).conjugate()
    with mp.workdps(dps):
        zw = mp.mpc(zw_d)
        rho_m = mp.mpf(rho)
        total = mp.mpc(0)
        # n >= 0 ascending, then n <= -1 via g = rho^2 / zw
        g = rho_m**2 / zw
        n_max = 400
        while True:
            total = 1 / (2 * mp.pi * mp.log(1 / rho_m)) / zw
            power = mp.mpc(1)
            for n in range(0, n_max + 1):
                total += power * (2 * n + 2) / (2 * mp.pi * (1 - rho_m ** (2 * n + 2)))
                power *= zw
            gm = mp.mpc(1)
            for m in range(2, n_max + 1):
                gm *= g
                total += (m - 1) / mp.pi * gm * g / (rho_m**2 * (1 - rho_m ** (2 * m - 2)))
            s, t = abs(zw_d), rho**2 / abs(zw_d)
            tail = (n_max + 2) / math.pi * s ** (n_max + 1) / (1.0 - s) ** 2
            tail += (n_max + 1) / (math.pi * s * (1.0 - rho**2)) * t**n_max / (1.0 - t) ** 2
            if tail <= rel * abs(total) or n_max > 500000:
                return complex(total)
            n_max *= 4


def disk_norm_sq(alpha: float, n: int) -> float:
    """||z^n||^2 in the weighted disk space: (1+a) pi B(n+1, a+1)."""
    log_beta = (
        math.lgamma(n + 1) + math.lgamma(alpha + 1) - math.lgamma(n + alpha + 2)
    )
    return (1.0 + alpha) * math.pi * math.exp(log_beta)


def disk_basis_kernel(alpha: float, n_terms: int, z: complex, w: complex) -> complex:
    """Rank-n_terms monomial truncation of the weighted disk kernel."""
    if n_terms < 1:
        raise ValueError("need at least one basis function")
    zw = complex(z) * complex(w).conjugate()
    total = 0.0 + 0.0j
    power = 1.0 + 0.0j
    for n in range(n_terms):
        total += power / disk_norm_sq(alpha, n)
        power *= zw
    return total
