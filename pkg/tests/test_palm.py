import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergman_dpp.discretize import DppKernel
from bergman_dpp.dpp import exact_distribution, total_variation
from bergman_dpp.errors import UndefinedPalmError
from bergman_dpp.numerics import hermitian_eig
from bergman_dpp.palm import (
    palm_distribution_oracle,
    palm_kernel,
    palm_ratio,
    palm_schur,
)

from conftest import random_contraction, random_projection


def test_rank_one_kernel_annihilated():
    v = np.array([0.6, 0.3 + 0.4j, -0.5j])
    v = v / np.linalg.norm(v)
    k = DppKernel(np.outer(v, v.conj()), is_projection=True)
    out = palm_schur(k, 0)
    assert np.abs(out.matrix).max() <= 1e-12


def test_schur_zero_row_col():
    k = random_contraction(6, 1)
    out = palm_schur(k, 3)
    assert np.abs(out.matrix[3, :]).max() == 0.0
    assert np.abs(out.matrix[:, 3]).max() == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_operator_order_k_minus_palm_psd(seed):
    k = random_contraction(6, seed)
    out = palm_schur(k, int(seed) % 6)
    diff = k.matrix - out.matrix
    assert np.linalg.eigvalsh(diff).min() >= -1e-10
    assert np.linalg.eigvalsh(out.matrix).min() >= -1e-10


def test_ratio_reduces_to_schur_order_one():
    for seed in range(5):
        k = random_contraction(5, seed)
        p = seed % 5
        ks = palm_schur(k, p)
        for x in range(5):
            for y in range(5):
                assert abs(palm_ratio(k, (p,), x, y) - ks.matrix[x, y]) <= 1e-10


def test_ratio_vanishes_on_conditioned_row():
    k = random_contraction(5, 3)
    assert abs(palm_ratio(k, (1, 4), 1, 2)) <= 1e-12


def test_order_two_matches_iterated_schur_any_order():
    k = random_contraction(6, 13)
    k12 = palm_schur(palm_schur(k, 1), 4)
    k21 = palm_schur(palm_schur(k, 4), 1)
    assert np.abs(k12.matrix - k21.matrix).max() <= 1e-9
    for x in range(6):
        for y in range(6):
            assert abs(palm_ratio(k, (1, 4), x, y) - k12.matrix[x, y]) <= 1e-9


def test_projection_rank_drop_and_vanishing_range():
    proj = random_projection(7, 4, 5)
    out = palm_kernel(proj, (2,))
    vals = hermitian_eig(out.matrix).eigenvalues
    assert int(np.sum(vals > 0.5)) == 3
    assert np.allclose(np.sort(vals)[-3:], 1.0, atol=1e-8)
    # every range vector is orthogonal to the conditioned row of K
    _, vecs = hermitian_eig(out.matrix)
    row = proj.matrix[2, :]
    for col in range(7):
        if vals[col] > 0.5:
            assert abs(row @ vecs[:, col]) <= 1e-9


def test_palm_of_palm_is_concatenated_tuple():
    k = random_contraction(7, 8)
    a = palm_kernel(palm_kernel(k, (1,)), (5,))
    b = palm_kernel(k, (1, 5))
    assert np.abs(a.matrix - b.matrix).max() <= 1e-9


def test_annihilation_at_all_conditioned_indices():
    k = random_contraction(6, 2)
    out = palm_kernel(k, (0, 3))
    for p in (0, 3):
        assert np.abs(out.matrix[p, :]).max() <= 1e-10
        assert np.abs(out.matrix[:, p]).max() <= 1e-10


def test_oracle_equivalence_small_battery():
    for seed in range(6):
        for m, order in ((4, 1), (5, 1), (6, 2)):
            k = random_contraction(m, 100 + seed)
            p = tuple(range(order))
            tv = total_variation(
                palm_distribution_oracle(k, p),
                exact_distribution(palm_kernel(k, p)),
            )
            assert tv <= 1e-8


def test_single_site_palm_is_empty_point_mass():
    k = DppKernel(np.diag([0.4]).astype(complex))
    pmf = palm_distribution_oracle(k, (0,))
    assert pmf == {(): pytest.approx(1.0)}


def test_diagonal_kernel_palm_leaves_rest_alone():
    k = DppKernel(np.diag([0.3, 0.6, 0.8]).astype(complex))
    pmf = palm_distribution_oracle(k, (1,))
    base = exact_distribution(DppKernel(np.diag([0.3, 0.8]).astype(complex)))
    relabeled = {
        tuple(0 if i == 0 else 2 for i in cfg): m for cfg, m in base.items()
    }
    assert total_variation(pmf, relabeled) <= 1e-12


def test_degenerate_pivot_refused():
    mat = np.diag([0.5, 0.0, 0.5]).astype(complex)
    with pytest.raises(UndefinedPalmError):
        palm_schur(DppKernel(mat), 1)
    with pytest.raises(UndefinedPalmError):
        palm_kernel(DppKernel(mat), (1,))


def test_palm_tuple_validation():
    k = random_contraction(4, 0)
    with pytest.raises(ValueError):
        palm_kernel(k, (1, 1))
    with pytest.raises(ValueError):
        palm_kernel(k, (9,))
