"""Elementary divisors ``B(z) = I + p q / (z - z0)`` with ``q p = z0 - zeta0``."""

from dataclasses import dataclass

import numpy as np

from .errors import AtPole, CoincidentPoints, DegenerateAction, SingularTwist
from .numerics import (RANK_TOL, as_scalar, as_vector, close_points, max_abs,
                       projector)


@dataclass(frozen=True, eq=False)
class ElementaryDivisor:
    """Pole ``z0``, determinant zero ``zeta0`` and the rank-one numerator ``p q``.

    Build instances with :func:`make`; the raw constructor does not normalise.
    """

    z0: complex
    zeta0: complex
    p: np.ndarray
    q: np.ndarray

    @property
    def m(self):
        return self.p.shape[0]

    @property
    def G(self):
        return np.outer(self.p, self.q)

    def projector(self):
        return projector(self.p, self.q)

    def evaluate(self, z, tol=RANK_TOL):
        if np.isinf(z):
            return np.eye(self.m, dtype=np.complex128)
        z = complex(z)
        if close_points(z, self.z0, tol):
            raise AtPole(f"z={z} is at the pole {self.z0}")
        return np.eye(self.m, dtype=np.complex128) + self.G / (z - self.z0)

    __call__ = evaluate

    def inverse(self):
        """``B(z)^-1 = I - G / (z - zeta0)``: pole and zero swap, ``p`` flips sign."""
        return ElementaryDivisor(self.zeta0, self.z0, as_vector(-self.p), self.q)

    def eigen_action(self, z, tol=RANK_TOL):
        """The eigenvalue of ``B(z)`` on ``p`` (and of ``q`` on the left)."""
        if np.isinf(z):
            return 1.0 + 0j
        z = complex(z)
        if close_points(z, self.z0, tol):
            raise AtPole(f"z={z} is at the pole {self.z0}")
        return (z - self.zeta0) / (z - self.z0)

    def det(self, z):
        return np.linalg.det(self.evaluate(z))

    def twist(self, A, tol=RANK_TOL):
        """Conjugate by a constant matrix: the divisor ``A B(z) A^-1``."""
        A = np.asarray(A, dtype=np.complex128)
        if np.linalg.cond(A) > 1.0 / tol:
            raise SingularTwist(f"twisting matrix is singular (cond {np.linalg.cond(A):.3e})")
        Ainv = np.linalg.inv(A)
        return ElementaryDivisor(self.z0, self.zeta0, as_vector(A @ self.p),
                                 as_vector(self.q @ Ainv))

    def shifted(self, delta):
        """The divisor ``z -> B(z + delta)``; both marked points move by ``-delta``."""
        return ElementaryDivisor(self.z0 - delta, self.zeta0 - delta, self.p, self.q)

    def isclose(self, other, tol=1e-10):
        """Projective comparison: same marked points and same numerator ``G``."""
        if not (close_points(self.z0, other.z0, tol) and close_points(self.zeta0, other.zeta0, tol)):
            return False
        return max_abs(self.G - other.G) <= tol * (1.0 + max_abs(self.G))

    def to_json(self):
        from .serialize import encode
        return {"z0": encode(self.z0), "zeta0": encode(self.zeta0),
                "p": encode(self.p), "q": encode(self.q)}

    @classmethod
    def from_json(cls, data):
        from .serialize import decode_scalar, decode_vector
        return make(decode_scalar(data["z0"]), decode_scalar(data["zeta0"]),
                    decode_vector(data["p"]), decode_vector(data["q"]))


def make(z0, zeta0, p, q, tol=RANK_TOL):
    """Build an elementary divisor, rescaling ``p`` so that ``q p = z0 - zeta0``."""
    z0 = as_scalar(z0, "z0")
    zeta0 = as_scalar(zeta0, "zeta0")
    p = np.asarray(as_vector(p, "p"))
    q = as_vector(q, "q")
    if p.shape != q.shape:
        raise ValueError(f"p and q have different lengths ({p.shape[0]} vs {q.shape[0]})")
    if close_points(z0, zeta0, tol):
        raise CoincidentPoints(f"pole {z0} and zero {zeta0} coincide")
    qp = q @ p
    if abs(qp) < tol * np.linalg.norm(p) * np.linalg.norm(q):
        raise DegenerateAction("q p vanishes; the pair does not define a divisor")
    return ElementaryDivisor(z0, zeta0, as_vector(p * ((z0 - zeta0) / qp)), q)


def _check_star(z0, zeta0, zstar, tol):
    if close_points(zstar, z0, tol) or close_points(zstar, zeta0, tol):
        raise DegenerateAction(f"z*={zstar} coincides with a marked point")


def from_action(z0, zeta0, zstar, known_row, w, v, tol=RANK_TOL):
    """Recover ``B`` from its row vector ``q`` and one action ``B(z*) w = v``."""
    z0, zeta0, zstar = complex(z0), complex(zeta0), complex(zstar)
    q = as_vector(known_row, "known_row")
    w = np.asarray(w, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    _check_star(z0, zeta0, zstar, tol)
    qw, qv = q @ w, q @ v
    for name, val, vec in (("q w", qw, w), ("q v", qv, v)):
        if abs(val) < tol * np.linalg.norm(q) * np.linalg.norm(vec):
            raise DegenerateAction(f"{name} vanishes")
    p = (z0 - zstar) * w / qw + (zstar - zeta0) * v / qv
    return make(z0, zeta0, p, q, tol)


def from_action_left(z0, zeta0, zstar, known_column, w, v, tol=RANK_TOL):
    """Mirror of :func:`from_action`: known ``p`` and a row action ``w B(z*) = v``."""
    z0, zeta0, zstar = complex(z0), complex(zeta0), complex(zstar)
    p = as_vector(known_column, "known_column")
    w = np.asarray(w, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    _check_star(z0, zeta0, zstar, tol)
    wp, vp = w @ p, v @ p
    for name, val, vec in (("w p", wp, w), ("v p", vp, v)):
        if abs(val) < tol * np.linalg.norm(p) * np.linalg.norm(vec):
            raise DegenerateAction(f"{name} vanishes")
    q = (z0 - zstar) * w / wp + (zstar - zeta0) * v / vp
    return make(z0, zeta0, p, q, tol)
