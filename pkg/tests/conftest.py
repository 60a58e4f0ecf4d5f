import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ratmat import from_spectral, make
from ratmat.spectral import SpectralPoint, SpectralType

settings.register_profile("ratmat", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ratmat")


def type_a():
    return SpectralType(rho1=2, rho2=1, zeta1=2, zeta2=3, z1=0, z2=1, k1=-2, k2=-2, mu=1)


def type_b():
    return SpectralType(rho1=2, rho2=1, zeta1=6, zeta2=3, z1=0, z2=1, k1=-4, k2=-4, mu=1)


POINT = SpectralPoint(5, 3)


@pytest.fixture
def TA():
    return type_a()


@pytest.fixture
def TB():
    return type_b()


@pytest.fixture
def P0():
    return POINT


@pytest.fixture
def LA():
    return from_spectral(type_a(), POINT)


@pytest.fixture
def LB():
    return from_spectral(type_b(), POINT)


@pytest.fixture
def BE():
    return make(0, 1, [1, 0], [-1, 0])


def regular_points(L, n, seed=0, margin=0.3):
    rng = np.random.default_rng(seed)
    pts = np.concatenate([L.poles, L.zeros])
    R = 2.0 + float(np.max(np.abs(pts)))
    out = []
    while len(out) < n:
        z = complex(rng.uniform(-R, R), rng.uniform(-R, R))
        if np.min(np.abs(pts - z)) > margin:
            out.append(z)
    return np.array(out)
