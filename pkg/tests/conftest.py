import numpy as np
import pytest

from bergman_dpp.discretize import DppKernel


def random_hermitian(m, seed, scale=1.0):
    gen = np.random.default_rng(seed)
    a = gen.standard_normal((m, m)) + 1j * gen.standard_normal((m, m))
    return scale * 0.5 * (a + a.conj().T)


def random_contraction(m, seed, lam_lo=0.05, lam_hi=0.95):
    """Strict-contraction kernel with a seeded Haar-ish eigenbasis."""
    gen = np.random.default_rng(seed)
    a = gen.standard_normal((m, m)) + 1j * gen.standard_normal((m, m))
    q, _ = np.linalg.qr(a)
    lam = gen.uniform(lam_lo, lam_hi, m)
    mat = (q * lam) @ q.conj().T
    return DppKernel(0.5 * (mat + mat.conj().T))


def random_projection(m, rank, seed):
    gen = np.random.default_rng(seed)
    a = gen.standard_normal((m, m)) + 1j * gen.standard_normal((m, m))
    q, _ = np.linalg.qr(a)
    v = q[:, :rank]
    mat = v @ v.conj().T
    return DppKernel(0.5 * (mat + mat.conj().T), is_projection=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
