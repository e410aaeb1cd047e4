import numpy as np
import pytest

from apiary.demography import SurvivalCurve
from apiary.flora import NECTAR, POLLEN, FloralResource, ForagingParams, Landscape


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


def flat_survival(lifespan: int) -> SurvivalCurve:
    """Everyone survives to the maximal age, then dies."""
    return SurvivalCurve(np.ones(lifespan + 1))


def random_survival(rng, max_len: int = 14) -> SurvivalCurve:
    steps = rng.uniform(0.6, 1.0, size=int(rng.integers(2, max_len)))
    return SurvivalCurve(np.concatenate([[1.0], np.cumprod(steps)]))


def dyadic_survival(rng, max_len: int = 30) -> SurvivalCurve:
    """Ratios drawn from {1.0, 0.5}: every derived quantity is an exact
    binary float as long as counts stay modest."""
    steps = rng.choice([1.0, 0.5], size=int(rng.integers(1, max_len)))
    return SurvivalCurve(np.concatenate([[1.0], np.cumprod(steps)]))


def patch_landscape(shape=(32, 32), cell_size=40.0, patches=(), resources=(),
                    hive=(16, 16)) -> Landscape:
    """patches: iterable of (id, (row, col), radius_cells)."""
    raster = np.zeros(shape, dtype=int)
    rr, cc = np.indices(shape)
    for rid, (r0, c0), rad in patches:
        raster[(rr - r0) ** 2 + (cc - c0) ** 2 <= rad * rad] = rid
    return Landscape.from_raster(raster, tuple(resources), cell_size, hive=hive)


def nectar_resource(rid=1, q_f=100.0, rho_f=8.0, lambda_f=1e-4, m_f=10.0,
                    beta_f=4.0, n=2, **kw) -> FloralResource:
    return FloralResource(id=rid, kind=NECTAR, q_f=q_f, rho_f=rho_f,
                          lambda_f=lambda_f, m_f=m_f, beta_f=beta_f, n=n, **kw)


def pollen_resource(rid=2, q_f=0.01, rho_f=6.0, lambda_f=2e-8, m_f=10.0,
                    beta_f=4.0, n=2, **kw) -> FloralResource:
    return FloralResource(id=rid, kind=POLLEN, q_f=q_f, rho_f=rho_f,
                          lambda_f=lambda_f, m_f=m_f, beta_f=beta_f, n=n, **kw)


def base_foraging(**kw) -> ForagingParams:
    defaults = dict(q0=100.0, q0_tilde=0.01, d_max=10000.0, v_cruise=6.5,
                    v_hop=0.5, k2=1.0, k3=1.0, t_hive=300.0, xi=1.0)
    defaults.update(kw)
    return ForagingParams(**defaults)
