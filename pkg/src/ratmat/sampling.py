"""Seeded generators of well-separated random instances."""

import numpy as np

from .dpv import DpvState
from .elementary_divisor import make
from .errors import RatmatError
from .rational_matrix import construct
from .spectral import SpectralPoint, SpectralType, from_spectral

BOX = 5.0
MIN_SEPARATION = 0.5


def rng_for(seed, index=0):
    """Independent stream for instance ``index`` under ``seed``."""
    return np.random.default_rng([int(seed), int(index)])


def _point(rng, box=BOX):
    return complex(rng.uniform(-box, box), rng.uniform(-box, box))


def _annulus(rng, lo=0.5, hi=2.0):
    return rng.uniform(lo, hi) * np.exp(2j * np.pi * rng.uniform())


def _separated(rng, n, avoid=(), sep=MIN_SEPARATION, box=BOX):
    pts = []
    while len(pts) < n:
        z = _point(rng, box)
        if all(abs(z - w) >= sep for w in list(avoid) + pts):
            pts.append(z)
    return pts


def _cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def random_divisor(rng, m=2):
    """A random elementary divisor with separated marked points."""
    z0, zeta0 = _separated(rng, 2)
    return make(z0, zeta0, _cvec(rng, m), _cvec(rng, m))


def random_rho(rng, m):
    rho = []
    while len(rho) < m:
        r = _annulus(rng)
        if all(abs(r - s) >= 0.3 for s in rho):
            rho.append(r)
    return rho


def random_instance(rng, m, k, max_tries=100):
    """Random additive data with ``k`` rank-one residues, resampled until generic.

    Zeros are computed and required to sit at least ``MIN_SEPARATION / 10``
    away from every other divisor point.
    """
    for _ in range(max_tries):
        L0 = random_rho(rng, m)
        poles = _separated(rng, k)
        residues = [(_cvec(rng, m), _cvec(rng, m) / np.sqrt(m)) for _ in range(k)]
        try:
            L = construct(L0, poles, residues)
            _ = L.inverse
        except RatmatError:
            continue
        pts = np.concatenate([L.poles, L.zeros])
        d = np.abs(pts[:, None] - pts[None, :]) + np.eye(len(pts)) * 1e9
        if d.min() >= MIN_SEPARATION / 10 and np.max(np.abs(L.zeros)) < 50:
            return L
    raise RuntimeError(f"could not draw a generic instance with m={m}, k={k}")


def _shift_safe(z1, zeta1, z2, zeta2, steps, sep):
    moving = [p - j for p in (z1, zeta1) for j in range(steps + 1)]
    return all(abs(a - b) >= sep for a in moving for b in (z2, zeta2))


def random_spectral(rng, steps=0, sep=MIN_SEPARATION):
    """Random generic type and spectral point (``mu = 1``).

    With ``steps > 0`` the divisor is also kept clear of collisions for that
    many unit shifts of ``(z1, zeta1)``.
    """
    while True:
        z1, z2, zeta1, zeta2 = _separated(rng, 4, sep=sep)
        if _shift_safe(z1, zeta1, z2, zeta2, steps, sep):
            break
    rho1, rho2 = random_rho(rng, 2)
    gamma = _separated(rng, 1, avoid=(z1, z2, zeta1, zeta2), sep=sep)[0]
    while True:
        pi = _annulus(rng)
        if abs(pi - rho1) >= 0.3 and abs(pi - rho2) >= 0.3:
            break
    k1 = _point(rng, 3.0)
    k2 = (z1 - zeta1) + (z2 - zeta2) - k1
    T = SpectralType(rho1=rho1, rho2=rho2, zeta1=zeta1, zeta2=zeta2, z1=z1, z2=z2,
                     k1=k1, k2=k2, mu=1.0)
    return T, SpectralPoint(gamma, pi)


def random_state(rng, steps=0):
    T, P = random_spectral(rng, steps)
    return DpvState(T, P, 0)


def random_quadratic(rng):
    """Random rank-two, two-pole ``L`` built from spectral data."""
    return from_spectral(*random_spectral(rng))
