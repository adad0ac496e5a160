import numpy as np
import pytest

from bergman_dpp.conditional import (
    conditional_kernel,
    conditional_oracle,
    deletion_tolerance_probe,
    diffusive_density,
    number_insertion_probe,
)
from bergman_dpp.discretize import DppKernel, build_grid, kernel_matrix, zero_block
from bergman_dpp.dpp import RngSeed, exact_distribution, sample, total_variation
from bergman_dpp.errors import ContractViolationError
from bergman_dpp.kernels import Disk
from bergman_dpp.numerics import hermitian_eig
from bergman_dpp.palm import palm_kernel

from conftest import random_contraction, random_projection


def _labelled_pmf(kernel_on_window, window):
    return {
        tuple(window[i] for i in cfg): m
        for cfg, m in exact_distribution(kernel_on_window).items()
    }


def test_no_conditioning_returns_kernel():
    k = random_contraction(5, 0)
    out = conditional_kernel(k, range(5), ())
    assert np.abs(out.matrix - k.matrix).max() <= 1e-12


def test_two_site_brute_force():
    k = random_contraction(2, 7)
    out = conditional_kernel(k, (0,), (1,))
    pmf = exact_distribution(k)
    # P(0 present | 1 present) from the joint law
    p_both = pmf[(0, 1)]
    p_one = pmf[(1,)]
    expected = p_both / (p_both + p_one)
    assert out.matrix[0, 0].real == pytest.approx(expected, abs=1e-9)


def test_projection_rank_exhaustion():
    proj = random_projection(6, 2, 3)
    cfg = sample(proj, RngSeed(5))
    assert len(cfg) == 2
    window = tuple(i for i in range(6) if i not in cfg)
    out = conditional_kernel(proj, window, cfg)
    assert np.abs(out.matrix).max() <= 1e-9


def test_oracle_equivalence_random_instances():
    for seed in range(20):
        k = random_contraction(6, 300 + seed)
        window = (0, 2, 5)
        cfg = sample(k, RngSeed(11, seed))
        ext = tuple(j for j in cfg if j not in set(window))
        kc = conditional_kernel(k, window, ext)
        tv = total_variation(
            _labelled_pmf(kc, window), conditional_oracle(k, window, ext)
        )
        assert tv <= 1e-8


def test_diagonal_kernel_conditional_is_unconditional():
    k = DppKernel(np.diag([0.2, 0.5, 0.7]).astype(complex))
    out = conditional_kernel(k, (0, 1), (2,))
    assert np.allclose(out.matrix, np.diag([0.2, 0.5]), atol=1e-12)


def test_empty_window_oracle_point_mass():
    k = random_contraction(4, 5)
    cfg = sample(k, RngSeed(3))
    pmf = conditional_oracle(k, (), cfg)
    assert pmf == {(): pytest.approx(1.0)}


def test_neumann_series_identity():
    # resolvent form vs truncated series inside its convergence region
    for seed in range(5):
        k = random_contraction(6, 40 + seed, lam_lo=0.05, lam_hi=0.55)
        window = (0, 1, 2)
        out_idx = (3, 4, 5)
        cfg = sample(k, RngSeed(21, seed))
        ext = tuple(j for j in cfg if j in out_idx)
        kp = palm_kernel(k, ext) if ext else k
        chi_out = np.zeros((6, 6))
        for i in out_idx:
            chi_out[i, i] = 1.0
        norm = np.linalg.norm(chi_out @ kp.matrix, 2)
        assert norm <= 0.9
        series = np.zeros((6, 6), dtype=complex)
        term = kp.matrix.copy()
        for _ in range(51):
            series += term
            term = kp.matrix @ chi_out @ term
        w = list(window)
        direct = conditional_kernel(k, window, ext)
        assert np.abs(series[np.ix_(w, w)] - direct.matrix).max() <= 1e-8


def test_tower_property():
    # conditioning outside B in one shot == conditioning outside a superset
    # B_n first, then on B_n \ B, at the level of brute-force laws
    k = random_contraction(7, 9)
    b = (0, 1)
    b_n = (0, 1, 2, 3)
    cfg = sample(k, RngSeed(2, 4))
    ext = tuple(j for j in cfg if j not in set(b))
    one_shot = conditional_oracle(k, b, ext)
    ext_outer = tuple(j for j in ext if j not in set(b_n))
    mid_kernel = conditional_kernel(k, b_n, ext_outer)
    mid_pmf_labels = _labelled_pmf(mid_kernel, b_n)
    ext_inner = tuple(j for j in ext if j in set(b_n))
    two_step = {}
    total = 0.0
    for cfg_mid, mass in mid_pmf_labels.items():
        if tuple(j for j in cfg_mid if j not in set(b)) == ext_inner:
            inside = tuple(j for j in cfg_mid if j in set(b))
            two_step[inside] = two_step.get(inside, 0.0) + mass
            total += mass
    two_step = {cfg: m / total for cfg, m in two_step.items()}
    assert total_variation(one_shot, two_step) <= 1e-8


def test_deletion_probe_zero_kernel_trivially_passes():
    k = DppKernel(np.zeros((4, 4), dtype=complex))
    rep = deletion_tolerance_probe(k, (0, 1), 10, RngSeed(0))
    assert rep.passed and rep.min_gap == pytest.approx(1.0)


def test_deletion_probe_detects_projection_on_block():
    m, block = 6, (0, 1, 2)
    v = np.zeros(m, dtype=complex)
    v[0] = 1.0
    proj = DppKernel(np.outer(v, v.conj()), is_projection=True)
    rep = deletion_tolerance_probe(proj, block, 5, RngSeed(1))
    assert not rep.passed
    assert rep.min_gap == pytest.approx(0.0, abs=1e-12)
    assert rep.max_lambda >= 1.0 - 1e-9


def test_deletion_probe_disk_kernel_passes():
    grid = build_grid(Disk(0.0), 8, 0.15)
    k = kernel_matrix(Disk(0.0), grid)
    block = tuple(i for i in range(grid.size) if abs(grid.points[i, 0]) < 0.3)
    rep = deletion_tolerance_probe(k, block, 40, RngSeed(7), threads=2)
    assert rep.passed
    assert rep.min_gap > 0.0
    assert rep.max_lambda < 1.0 - 1e-9


def test_insertion_probe_disk_passes_counterexample_fails():
    grid = build_grid(Disk(0.0), 8, 0.15)
    k = kernel_matrix(Disk(0.0), grid)
    block = tuple(i for i in range(grid.size) if abs(grid.points[i, 0]) < 0.3)
    rep = number_insertion_probe(k, block, 40, RngSeed(7))
    assert rep.passed
    assert rep.trace_stats["min"] > 1e-9
    kz = zero_block(k, block)
    rep_bad = number_insertion_probe(kz, block, 20, RngSeed(7))
    assert not rep_bad.passed
    assert rep_bad.trace_stats["max"] == pytest.approx(0.0, abs=1e-12)


def test_insertion_probe_identity_off_block_fails():
    m, block = 5, (0, 1)
    mat = np.eye(m, dtype=complex)
    for i in block:
        mat[i, i] = 0.0
    k = DppKernel(mat, is_projection=True)
    rep = number_insertion_probe(k, block, 5, RngSeed(2))
    assert not rep.passed


def test_diffusive_density_trivial_cases():
    k = random_contraction(4, 1)
    assert diffusive_density(k, 0, ()) == pytest.approx(
        1.0
    )  # the only size-0 configuration
    half = DppKernel(np.diag([0.5, 0.5]).astype(complex))
    assert diffusive_density(half, 1, (0,)) == pytest.approx(0.5)
    assert diffusive_density(half, 1, (1,)) == pytest.approx(0.5)


def test_diffusive_density_positive_and_normalized():
    from itertools import combinations

    k = random_contraction(5, 23)
    for n in (1, 2, 3):
        total = 0.0
        for cfg in combinations(range(5), n):
            val = diffusive_density(k, n, cfg)
            assert val > 0.0  # strict contraction with generic minors
            total += val
        assert total == pytest.approx(1.0, abs=1e-9)


def test_conditional_oracle_rejects_large_ground_set():
    k = random_contraction(11, 0)
    with pytest.raises(ValueError):
        conditional_oracle(k, (0,), (1,))
