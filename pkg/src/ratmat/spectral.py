"""Rank-two, two-pole matrices in type + spectral coordinates ``(gamma, pi)``.

The type is ``(rho1, rho2, zeta1, zeta2, z1, z2, k1, k2, mu)``: asymptotics
``L -> diag(rho1, rho2)``, determinant divisor, the diagonal of
``L0^-1 L_inf`` and the gauge-fixing entry ``mu = (L_inf)_21``.  The spectral
point is the zero ``gamma`` of ``L(z)_21`` together with
``pi = (gamma - z1) / (gamma - zeta2) * L(gamma)_11``.
"""

from dataclasses import dataclass, fields

import numpy as np

from .errors import GaugeDegenerate, NonGeneric, WrongPoleCount
from .numerics import RANK_TOL, SEPARATION_TOL, close_points, max_abs
from .rational_matrix import construct


@dataclass(frozen=True)
class SpectralType:
    rho1: complex
    rho2: complex
    zeta1: complex
    zeta2: complex
    z1: complex
    z2: complex
    k1: complex
    k2: complex
    mu: complex

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, complex(getattr(self, f.name)))
        lhs = self.k1 + self.k2
        rhs = (self.z1 - self.zeta1) + (self.z2 - self.zeta2)
        if abs(lhs - rhs) > 1e-12 * (1.0 + abs(lhs) + abs(rhs)):
            raise NonGeneric(f"k1 + k2 = {lhs} must equal (z1 - zeta1) + (z2 - zeta2) = {rhs}")
        if close_points(self.rho1, self.rho2, SEPARATION_TOL) or 0 in (self.rho1, self.rho2):
            raise NonGeneric("rho1, rho2 must be distinct and nonzero")
        if abs(self.mu) == 0:
            raise GaugeDegenerate("mu must be nonzero")
        pts = self.divisor_points
        for i in range(4):
            for j in range(i):
                if close_points(pts[i], pts[j], SEPARATION_TOL):
                    raise NonGeneric(f"divisor points {pts[j]} and {pts[i]} collide")

    @property
    def divisor_points(self):
        return (self.z1, self.z2, self.zeta1, self.zeta2)

    def to_json(self):
        from .serialize import encode
        return {"rho": encode([self.rho1, self.rho2]), "z": encode([self.z1, self.z2]),
                "zeta": encode([self.zeta1, self.zeta2]), "k": encode([self.k1, self.k2]),
                "mu": encode(self.mu)}


@dataclass(frozen=True)
class SpectralPoint:
    gamma: complex
    pi: complex

    def __post_init__(self):
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "pi", complex(self.pi))

    def to_json(self):
        from .serialize import encode
        return {"gamma": encode(self.gamma), "pi": encode(self.pi)}


def check_point(T, P, tol=RANK_TOL):
    if abs(P.pi) <= tol:
        raise NonGeneric("pi must be nonzero")
    for x in T.divisor_points:
        if close_points(P.gamma, x, SEPARATION_TOL):
            raise NonGeneric(f"gamma={P.gamma} collides with divisor point {x}")


def phi(T, P, a, b):
    """``rho1 (gamma - a) - pi (gamma - b)``."""
    return T.rho1 * (P.gamma - a) - P.pi * (P.gamma - b)


def _outer(alpha, top, right):
    return alpha * np.array([[top, top * right], [1.0, right]], dtype=np.complex128)


def residues_direct(T, P):
    """``(L1, L2)`` from the normalisation at infinity plus the two spectral conditions."""
    check_point(T, P)
    r1, r2, z1, z2, s1, s2, k1, k2, mu = (T.rho1, T.rho2, T.z1, T.z2, T.zeta1, T.zeta2,
                                          T.k1, T.k2, T.mu)
    g, p = P.gamma, P.pi
    alpha1 = mu * (g - z1) / (z2 - z1)
    alpha2 = mu * (g - z2) / (z1 - z2)
    a1 = (r1 * (k1 + g - z2) - p * (g - z2) * (g - s2) / (g - z1)) / mu
    a2 = (r1 * (k1 + g - z1) - p * (g - s2)) / mu
    b1 = (r2 * (k2 + g - z2) - r1 * r2 / p * (g - s1)) / mu
    b2 = (r2 * (k2 + g - z1) - r1 * r2 / p * (g - z1) * (g - s1) / (g - z2)) / mu
    return _outer(alpha1, a1, b1), _outer(alpha2, a2, b2)


def residues_phi(T, P):
    """``(L1, L2)`` written through ``phi``; must agree with :func:`residues_direct`."""
    check_point(T, P)
    r1, r2, z1, z2, s1, s2, k1, k2, mu = (T.rho1, T.rho2, T.z1, T.z2, T.zeta1, T.zeta2,
                                          T.k1, T.k2, T.mu)
    g, p = P.gamma, P.pi
    f_a = phi(T, P, z1, s2)
    f_b = phi(T, P, s1, z2)
    L1 = _outer(mu * (g - z1) / (z2 - z1),
                (r1 * k1 + (g - z2) / (g - z1) * f_a) / mu,
                (r2 * k2 - r2 / p * f_b) / mu)
    L2 = _outer(mu * (g - z2) / (z1 - z2),
                (r1 * k1 + f_a) / mu,
                (r2 * k2 - r2 * (g - z1) / (p * (g - z2)) * f_b) / mu)
    return L1, L2


def inverse_residues_direct(T, P):
    """``(M1, M2)`` of ``M = L^-1 = M0 - sum M_i / (z - zeta_i)`` in the same gauge."""
    check_point(T, P)
    r1, r2, z1, z2, s1, s2, k1, k2, mu = (T.rho1, T.rho2, T.z1, T.z2, T.zeta1, T.zeta2,
                                          T.k1, T.k2, T.mu)
    g, p = P.gamma, P.pi
    pre = mu / (r1 * r2)
    c1 = (r2 * (k1 - g + s2) + r1 * r2 / p * (g - z1)) / mu
    d1 = (r1 * (k2 - g + s2) + p * (g - s2) * (g - z2) / (g - s1)) / mu
    c2 = (r2 * (k1 - g + s1) + r1 * r2 / p * (g - s1) * (g - z1) / (g - s2)) / mu
    d2 = (r1 * (k2 - g + s1) + p * (g - z2)) / mu
    return (_outer(pre * (g - s1) / (s2 - s1), c1, d1),
            _outer(pre * (g - s2) / (s1 - s2), c2, d2))


def inverse_residues_phi(T, P):
    check_point(T, P)
    r1, r2, z1, z2, s1, s2, k1, k2, mu = (T.rho1, T.rho2, T.z1, T.z2, T.zeta1, T.zeta2,
                                          T.k1, T.k2, T.mu)
    g, p = P.gamma, P.pi
    pre = mu / (r1 * r2)
    f_a = phi(T, P, z1, s2)
    f_b = phi(T, P, s1, z2)
    M1 = _outer(pre * (g - s1) / (s2 - s1),
                (r2 * k1 + r2 / p * f_a) / mu,
                (r1 * k2 - (g - s2) / (g - s1) * f_b) / mu)
    M2 = _outer(pre * (g - s2) / (s1 - s2),
                (r2 * k1 + r2 * (g - s1) / (p * (g - s2)) * f_a) / mu,
                (r1 * k2 - f_b) / mu)
    return M1, M2


def inverse_spectral_data(T, P):
    """Type and spectral point of ``M = L^-1`` read as a matrix of the same shape.

    Poles and zeros swap, ``rho -> 1/rho``, ``k -> -k``,
    ``mu -> -mu / (rho1 rho2)``, ``gamma`` is kept and ``pi`` is transformed.
    Applying this twice returns the input.
    """
    check_point(T, P)
    g = P.gamma
    Tm = SpectralType(rho1=1.0 / T.rho1, rho2=1.0 / T.rho2, zeta1=T.z1, zeta2=T.z2,
                      z1=T.zeta1, z2=T.zeta2, k1=-T.k1, k2=-T.k2,
                      mu=-T.mu / (T.rho1 * T.rho2))
    pi_m = (g - T.z1) * (g - T.zeta1) / (P.pi * (g - T.z2) * (g - T.zeta2))
    return Tm, SpectralPoint(g, pi_m)


def inverse_residues_transfer(T, P):
    """``(M1, M2)`` obtained by building ``M`` from the transferred type and point."""
    Tm, Pm = inverse_spectral_data(T, P)
    R1, R2 = residues_direct(Tm, Pm)
    return -R1, -R2


def _check_agree(A, B, what, tol=1e-9):
    scale = 1.0 + max(max_abs(A), max_abs(B))
    if max_abs(A - B) > tol * scale:
        raise RuntimeError(f"{what}: closed forms disagree by {max_abs(A - B):.3e}")


def from_spectral(T, P):
    """Build ``L`` from type and spectral point.

    Both closed forms are evaluated and must agree; the pairing is
    ``(zeta1, z1), (zeta2, z2)``.
    """
    L1, L2 = residues_direct(T, P)
    for A, B, name in zip((L1, L2), residues_phi(T, P), ("L1", "L2")):
        _check_agree(A, B, name)
    return construct([T.rho1, T.rho2], [T.z1, T.z2], [L1, L2], zeros=[T.zeta1, T.zeta2])


def extract_spectral(L, tol=RANK_TOL):
    """Read type and spectral point off a rank-two, two-pole ``L`` (pairing as stored)."""
    if L.m != 2:
        raise NonGeneric(f"spectral coordinates need rank 2, got {L.m}")
    if L.k != 2:
        raise WrongPoleCount(f"spectral coordinates need 2 poles, got {L.k}")
    Linf = L.L_inf
    rho1, rho2 = L.L0
    z1, z2 = L.poles
    s1, s2 = L.zeros
    mu = Linf[1, 0]
    if abs(mu) <= tol * max_abs(Linf):
        raise GaugeDegenerate("(L_inf)_21 vanishes; spectral coordinates are undefined in this gauge")
    R1, R2 = L.residue(0), L.residue(1)
    # L(z)_21 = mu (z - gamma) / ((z - z1)(z - z2))
    gamma = (R1[1, 0] * z2 + R2[1, 0] * z1) / mu
    for x in (z1, z2, s1, s2):
        if close_points(gamma, x, SEPARATION_TOL):
            raise NonGeneric(f"gamma={gamma} collides with divisor point {x}")
    pi = (gamma - z1) / (gamma - s2) * L.evaluate(gamma)[0, 0]
    T = SpectralType(rho1=rho1, rho2=rho2, zeta1=s1, zeta2=s2, z1=z1, z2=z2,
                     k1=Linf[0, 0] / rho1, k2=Linf[1, 1] / rho2, mu=mu)
    return T, SpectralPoint(gamma, pi)
