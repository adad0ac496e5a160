"""Determinantal point processes induced by weighted Bergman kernels.

Finite-rank Palm and conditional calculus, monotone couplings, and
desk-scale numerical probes of deletion/insertion tolerance, together
with the closed-form kernels (disk, annulus, polydisk, ball) and their
independent series oracles.
"""

__version__ = "0.1.0"

from .config import ExperimentConfig, parse_config, resolved_text
from .conditional import (
    conditional_kernel,
    conditional_oracle,
    deletion_tolerance_probe,
    diffusive_density,
    number_insertion_probe,
)
from .coupling import (
    CouplingTable,
    difference_trace_bound,
    domination_check,
    monotone_coupling,
)
from .discretize import (
    DppKernel,
    Grid,
    basis_projection_kernel,
    build_grid,
    kernel_matrix,
    restrict,
    zero_block,
)
from .dpp import (
    Configuration,
    RngSeed,
    correlation,
    exact_distribution,
    gap_probability,
    number_distribution,
    sample,
    total_variation,
)
from .elliptic import PeriodPair, eta1, wp, wp_prime, wzeta
from .gaf import intensity_compare, roots, sample_gaf
from .kernels import (
    Annulus,
    Ball,
    Disk,
    Polydisk,
    annulus_laurent_extended,
    annulus_laurent_oracle,
    ball_volume,
    disk_basis_kernel,
    eval_kernel,
    weight,
)
from .numerics import (
    HermitianEig,
    det,
    fredholm_det_finite,
    hermitian_eig,
    psd_clamp,
    solve,
)
from .palm import palm_distribution_oracle, palm_kernel, palm_ratio, palm_schur
