import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergman_dpp.elliptic import (
    PeriodPair,
    eta1,
    invariants_g2_g3,
    wp,
    wp_prime,
    wzeta,
)
from bergman_dpp.errors import LatticePointError

ANNULUS = PeriodPair(2j * math.pi, 2.0 * math.log(0.5))
SQUAREISH = PeriodPair(2.0, 1.0 + 1.7j)
LATTICES = [ANNULUS, SQUAREISH, PeriodPair(3.0 - 0.2j, 0.4 + 2.1j)]


def _random_cell_point(periods, gen):
    # generic point of the fundamental cell, away from lattice and edges
    a, b = gen.uniform(0.12, 0.43, size=2)
    return a * periods.p1 + b * periods.p2


def test_period_pair_validation():
    with pytest.raises(ValueError):
        PeriodPair(0.0, 1.0)
    with pytest.raises(ValueError):
        PeriodPair(1.0, 2.0)  # collinear periods


def test_wp_laurent_leading_term():
    u = 1e-4 * (1 + 1j)
    assert abs(wp(u, ANNULUS, 80) * u * u - 1.0) < 1e-6


def test_wp_pole_error():
    with pytest.raises(LatticePointError):
        wp(0.0, ANNULUS)
    with pytest.raises(LatticePointError):
        wp(ANNULUS.p1 + 1e-14, ANNULUS)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(range(len(LATTICES))))
def test_wp_double_periodicity(seed, lattice_idx):
    periods = LATTICES[lattice_idx]
    gen = np.random.default_rng(seed)
    u = _random_cell_point(periods, gen)
    base = wp(u, periods, 200)
    assert abs(wp(u + periods.p1, periods, 200) - base) <= 1e-10 * max(1, abs(base))
    assert abs(wp(u + periods.p2, periods, 200) - base) <= 1e-10 * max(1, abs(base))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_wp_even_wzeta_odd(seed):
    gen = np.random.default_rng(seed)
    u = _random_cell_point(SQUAREISH, gen)
    assert abs(wp(-u, SQUAREISH, 200) - wp(u, SQUAREISH, 200)) < 1e-10
    assert abs(wzeta(-u, SQUAREISH, 200) + wzeta(u, SQUAREISH, 200)) < 1e-10


def test_homogeneity_degree_minus_two(rng):
    lam = 2.0
    scaled = PeriodPair(lam * SQUAREISH.p1, lam * SQUAREISH.p2)
    for _ in range(5):
        u = _random_cell_point(SQUAREISH, rng)
        assert abs(
            wp(lam * u, scaled, 200) - wp(u, SQUAREISH, 200) / lam**2
        ) < 1e-10 * max(1, abs(wp(u, SQUAREISH, 200)))


def test_eta1_scaling_degree_minus_one():
    lam = 2.0
    scaled = PeriodPair(lam * SQUAREISH.p1, lam * SQUAREISH.p2)
    assert abs(eta1(scaled, 200) - eta1(SQUAREISH, 200) / lam) < 1e-12


def test_quasi_periodicity_defines_eta1(rng):
    for periods in LATTICES:
        e1 = eta1(periods, 200)
        for _ in range(5):
            u = _random_cell_point(periods, rng)
            inc = wzeta(u + periods.p1, periods, 200) - wzeta(u, periods, 200)
            assert abs(inc - 2.0 * e1) < 1e-9


def test_legendre_relation():
    for periods in LATTICES:
        w1, w2 = periods.p1 / 2.0, periods.p2 / 2.0
        e1 = eta1(periods, 200)
        e2 = wzeta(periods.p2 / 2.0, periods, 200)
        sign = 1.0 if (w2 / w1).imag > 0 else -1.0
        assert abs(e1 * w2 - e2 * w1 - sign * 0.5j * math.pi) < 1e-9


def test_zeta_derivative_is_minus_wp(rng):
    h = 1e-5
    for _ in range(5):
        u = _random_cell_point(ANNULUS, rng)
        fd = (wzeta(u + h, ANNULUS, 200) - wzeta(u - h, ANNULUS, 200)) / (2 * h)
        assert abs(fd + wp(u, ANNULUS, 200)) < 1e-6


def test_differential_equation(rng):
    for periods in LATTICES:
        g2, g3 = invariants_g2_g3(periods, 400)
        for _ in range(4):
            u = _random_cell_point(periods, rng)
            p = wp(u, periods, 400)
            lhs = wp_prime(u, periods, 400) ** 2
            rhs = 4.0 * p**3 - g2 * p - g3
            assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(p) ** 3)
