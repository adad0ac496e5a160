import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergman_dpp.discretize import DppKernel
from bergman_dpp.dpp import (
    RngSeed,
    as_configuration,
    cardinality_pushforward,
    correlation,
    exact_distribution,
    gap_probability,
    number_distribution,
    sample,
    total_variation,
)
from bergman_dpp.dpp import _exact_projection
from bergman_dpp.errors import ContractViolationError

from conftest import random_contraction, random_projection


def test_correlation_trivial():
    k = random_contraction(4, 0)
    assert correlation(k, ()) == 1.0
    assert correlation(k, (2,)) == pytest.approx(k.matrix[2, 2].real)
    i, j = 1, 3
    expected = (
        k.matrix[i, i].real * k.matrix[j, j].real - abs(k.matrix[i, j]) ** 2
    )
    assert correlation(k, (i, j)) == pytest.approx(expected, rel=1e-12)


def test_gap_probability_trivial():
    k = random_contraction(5, 1)
    assert gap_probability(k, ()) == 1.0
    proj = random_projection(4, 2, 7)
    assert gap_probability(proj, range(4)) == pytest.approx(0.0, abs=1e-12)


def test_number_distribution_cases():
    proj = random_projection(5, 3, 2)
    pmf = number_distribution(proj)
    assert pmf[3] == pytest.approx(1.0, abs=1e-9)
    half = DppKernel(np.diag([0.5]).astype(complex))
    assert np.allclose(number_distribution(half), [0.5, 0.5])
    k = random_contraction(6, 5)
    pmf = number_distribution(k)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
    mean = float(np.arange(7) @ pmf)
    assert mean == pytest.approx(k.trace(), abs=1e-10)


def test_exact_distribution_diagonal():
    k = DppKernel(np.diag([0.3]).astype(complex))
    pmf = exact_distribution(k)
    assert pmf[()] == pytest.approx(0.7)
    assert pmf[(0,)] == pytest.approx(0.3)
    k2 = DppKernel(np.diag([0.3, 0.6]).astype(complex))
    pmf2 = exact_distribution(k2)
    assert pmf2[(0,)] == pytest.approx(0.3 * 0.4)
    assert pmf2[(0, 1)] == pytest.approx(0.3 * 0.6)
    assert pmf2[()] == pytest.approx(0.7 * 0.4)


def test_exact_distribution_marginals_match_correlations():
    k = random_contraction(5, 11)
    pmf = exact_distribution(k)
    assert sum(pmf.values()) == pytest.approx(1.0, abs=1e-9)
    for pair in [(0, 1), (1, 4), (2, 3)]:
        marginal = sum(m for cfg, m in pmf.items() if set(pair) <= set(cfg))
        assert marginal == pytest.approx(correlation(k, pair), abs=1e-9)


def test_exact_distribution_projection_path():
    proj = random_projection(5, 2, 3)
    pmf = exact_distribution(proj)
    assert sum(pmf.values()) == pytest.approx(1.0, abs=1e-9)
    assert all(len(cfg) == 2 for cfg, m in pmf.items() if m > 1e-9)
    for pair in [(0, 1), (2, 4)]:
        marginal = sum(m for cfg, m in pmf.items() if set(pair) <= set(cfg))
        assert marginal == pytest.approx(correlation(proj, pair), abs=1e-9)


def test_exact_distribution_paths_agree():
    # Moebius inversion of the correlations is kernel-agnostic; it must
    # reproduce the L-ensemble values on strict contractions.
    k = random_contraction(6, 21)
    pmf = exact_distribution(k)
    alt = _exact_projection(k.matrix, 6)
    for mask in range(1 << 6):
        cfg = tuple(i for i in range(6) if mask >> i & 1)
        assert alt[mask] == pytest.approx(pmf[cfg], abs=1e-9)


def test_exact_distribution_limits():
    with pytest.raises(ValueError):
        exact_distribution(random_contraction(13, 0))
    near_one = DppKernel(np.diag([0.5, 1.0 - 1e-12]).astype(complex))
    with pytest.raises(ContractViolationError):
        exact_distribution(near_one)


def test_gap_probability_matches_enumeration():
    k = random_contraction(6, 8)
    pmf = exact_distribution(k)
    for block in [(0,), (1, 2), (0, 3, 5)]:
        gap = gap_probability(k, block)
        enum = sum(m for cfg, m in pmf.items() if not set(block) & set(cfg))
        assert gap == pytest.approx(enum, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_number_distribution_is_cardinality_pushforward(seed):
    k = random_contraction(5, seed)
    pmf = exact_distribution(k)
    push = cardinality_pushforward(pmf, 5)
    assert np.abs(number_distribution(k) - push).max() <= 1e-9


def test_sample_degenerate_kernels():
    zero = DppKernel(np.zeros((3, 3), dtype=complex))
    eye = DppKernel(np.eye(3, dtype=complex), is_projection=True)
    for s in range(5):
        assert sample(zero, RngSeed(s)) == ()
        assert sample(eye, RngSeed(s)) == (0, 1, 2)


def test_sample_reproducible_across_streams():
    k = random_contraction(6, 4)
    a = sample(k, RngSeed(123, 5))
    b = sample(k, RngSeed(123, 5))
    assert a == b
    draws = {sample(k, RngSeed(123, s)) for s in range(20)}
    assert len(draws) > 1


def test_sample_singleton_frequencies():
    k = random_contraction(5, 17)
    n = 10_000
    counts = np.zeros(5)
    for i in range(n):
        for idx in sample(k, RngSeed(99, i)):
            counts[idx] += 1
    for i in range(5):
        p = k.matrix[i, i].real
        sigma = np.sqrt(p * (1 - p) / n)
        assert abs(counts[i] / n - p) <= 3 * sigma


def test_sampling_consistency_chi_squared():
    # seeded frequency test of the full configuration law
    from scipy.stats import chi2

    k = random_contraction(5, 31)
    pmf = exact_distribution(k)
    n = 200_000
    observed = {}
    for i in range(n):
        cfg = sample(k, RngSeed(7, i))
        observed[cfg] = observed.get(cfg, 0) + 1
    stat = 0.0
    dof = 0
    rare_obs, rare_exp = 0, 0.0
    for cfg, p in pmf.items():
        exp = n * p
        obs = observed.get(cfg, 0)
        if exp < 5.0:
            rare_obs += obs
            rare_exp += exp
            continue
        stat += (obs - exp) ** 2 / exp
        dof += 1
    if rare_exp > 0:
        stat += (rare_obs - rare_exp) ** 2 / rare_exp
        dof += 1
    p_value = chi2.sf(stat, dof - 1)
    assert p_value > 0.001


def test_as_configuration_validation():
    assert as_configuration([3, 1, 1, 2]) == (1, 2, 3)
    with pytest.raises(ValueError):
        as_configuration([0, 5], ground_size=4)
    with pytest.raises(ValueError):
        as_configuration([-1])


def test_total_variation():
    p = {(): 0.5, (0,): 0.5}
    q = {(): 0.25, (0,): 0.25, (1,): 0.5}
    assert total_variation(p, q) == pytest.approx(0.5)
