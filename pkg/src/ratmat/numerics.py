"""Small dense complex helpers: rank-one splitting, interpolation, roots."""

from dataclasses import dataclass

import numpy as np

from .errors import (DuplicateAbscissa, InconsistentSamples, NotRankOne,
                     ZeroMatrix, ZeroPolynomial)

#: default relative tolerance for rank-one tests and genericity rejections
RANK_TOL = 1e-9
#: relative separation demanded between computed divisor points
SEPARATION_TOL = 1e-6
ZERO_FLOOR = 1e-13


def as_vector(x, name="vector"):
    v = np.array(x, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    v.flags.writeable = False
    return v


def as_matrix(x, name="matrix"):
    a = np.array(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a.flags.writeable = False
    return a


def as_scalar(x, name="value"):
    c = complex(x)
    if not (np.isfinite(c.real) and np.isfinite(c.imag)):
        raise ValueError(f"{name} must be finite")
    return c


def max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def close_points(a, b, tol=RANK_TOL):
    """True when two complex points coincide up to ``tol`` relative to their size."""
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


def lex_key(z):
    return (z.real, z.imag)


@dataclass(frozen=True, eq=False)
class RankOnePair:
    """A rank-one matrix stored as ``column @ row`` with ``row[pivot_index] == 1``."""

    column: np.ndarray
    row: np.ndarray
    pivot_index: int

    @classmethod
    def from_vectors(cls, column, row):
        column = np.array(column, dtype=np.complex128).reshape(-1)
        row = np.array(row, dtype=np.complex128).reshape(-1)
        pivot = int(np.argmax(np.abs(row)))
        scale = row[pivot]
        if scale == 0:
            raise ZeroMatrix("row vector is zero")
        if scale != 1:
            column = column * scale
            row = row / scale
            row[pivot] = 1.0  # complex x / x is not always exactly 1
        return cls(as_vector(column, "column"), as_vector(row, "row"), pivot)

    def matrix(self):
        return np.outer(self.column, self.row)

    def __neg__(self):
        return RankOnePair(as_vector(-self.column), self.row, self.pivot_index)


def rank_one_decompose(M, rel_tol=RANK_TOL):
    """Split a numerically rank-one matrix into column times pivot-normalised row.

    The pivot is the entry of largest modulus in the dominant right singular
    vector; the row of ``M`` with the largest entry in that column is divided by
    it, so for exactly rank-one input the split is exact.
    """
    M = np.asarray(M, dtype=np.complex128)
    scale = max_abs(M)
    if scale < ZERO_FLOOR:
        raise ZeroMatrix(f"matrix is numerically zero (max-abs {scale:.3e})")
    s, vh = np.linalg.svd(M)[1:]
    if len(s) > 1 and s[1] > rel_tol * s[0]:
        raise NotRankOne(f"second singular value {s[1]:.3e} exceeds {rel_tol:g} x {s[0]:.3e}")
    pivot = int(np.argmax(np.abs(vh[0])))
    i = int(np.argmax(np.abs(M[:, pivot])))
    row = M[i, :] / M[i, pivot]
    row[pivot] = 1.0  # complex x / x is not always exactly 1
    column = M[:, pivot].copy()
    pair = RankOnePair(as_vector(column), as_vector(row), pivot)
    resid = max_abs(pair.matrix() - M)
    if resid > rel_tol * scale:
        raise NotRankOne(f"rank-one reconstruction residual {resid:.3e}")
    return pair


def poly_from_samples(points, degree, tol=1e-9):
    """Interpolating polynomial through ``points``, coefficients in ascending order.

    The first ``degree + 1`` samples define the polynomial via Newton divided
    differences; any further samples are used as a consistency check.
    """
    pts = [(complex(x), complex(y)) for x, y in points]
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if len(pts) < degree + 1:
        raise ValueError(f"need at least {degree + 1} samples, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    span = 1.0 + max_abs(xs)
    for i in range(len(xs)):
        for j in range(i):
            if abs(xs[i] - xs[j]) <= 1e-14 * span:
                raise DuplicateAbscissa(f"abscissae {i} and {j} coincide ({xs[i]})")
    n = degree + 1
    x0 = xs[:n]
    dd = ys[:n].astype(np.complex128)
    for level in range(1, n):
        dd[level:] = (dd[level:] - dd[level - 1:-1]) / (x0[level:] - x0[:n - level])
    coeffs = np.array([dd[-1]])
    for j in range(n - 2, -1, -1):
        # coeffs * (z - x0[j]) + dd[j]
        shifted = np.concatenate([[0j], coeffs])
        shifted[:-1] -= x0[j] * coeffs
        shifted[0] += dd[j]
        coeffs = shifted
    if len(xs) > n:
        resid = np.abs(poly_eval(coeffs, xs[n:]) - ys[n:])
        if np.max(resid) > tol * (1.0 + max_abs(ys)):
            raise InconsistentSamples(
                f"extra samples deviate by {np.max(resid):.3e} from degree-{degree} interpolant")
    return coeffs


def poly_eval(coeffs, z):
    acc = np.zeros_like(np.asarray(z, dtype=np.complex128))
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def _trim(coeffs):
    c = np.array(coeffs, dtype=np.complex128).reshape(-1)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        raise ZeroPolynomial("polynomial is identically zero")
    return c[: nz[-1] + 1]


def poly_roots(coeffs, newton_steps=3):
    """All roots (with multiplicity) of an ascending-coefficient polynomial.

    Companion-matrix eigenvalues polished by guarded Newton steps, returned in
    lexicographic (re, im) order.
    """
    c = _trim(coeffs)
    deg = len(c) - 1
    if deg == 0:
        return np.zeros(0, dtype=np.complex128)
    monic = c / c[-1]
    comp = np.zeros((deg, deg), dtype=np.complex128)
    comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -monic[:-1]
    roots = np.linalg.eigvals(comp)
    dc = monic[1:] * np.arange(1, deg + 1)
    for _ in range(newton_steps):
        val = poly_eval(monic, roots)
        der = poly_eval(dc, roots)
        ok = der != 0
        cand = roots.copy()
        cand[ok] = roots[ok] - val[ok] / der[ok]
        better = np.abs(poly_eval(monic, cand)) < np.abs(val)
        roots = np.where(better, cand, roots)
    return np.array(sorted(roots, key=lex_key), dtype=np.complex128)


def parallel_residual(u, v):
    """Distance between the unit directions of ``u`` and ``v`` after phase alignment.

    Zero exactly when the vectors are complex multiples of each other.
    """
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return float("inf")
    u = u / nu
    v = v / nv
    ip = np.vdot(v, u)
    phase = ip / abs(ip) if ip != 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


def projector(column, row):
    """The rank-one idempotent ``column row / (row column)``."""
    return np.outer(column, row) / (np.asarray(row) @ np.asarray(column))
