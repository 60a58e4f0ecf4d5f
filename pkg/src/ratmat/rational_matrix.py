"""Additive representation ``L(z) = L0 + sum_i a_i b_i / (z - z_i)`` and its inverse."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import AtPole, NonGeneric, NotRankOne, SingularGauge, ZeroMatrix
from .numerics import (RANK_TOL, SEPARATION_TOL, RankOnePair, as_vector,
                       close_points, lex_key, max_abs, poly_from_samples,
                       poly_roots, rank_one_decompose)

_PHASE = 0.2360679774997897  # fractional golden-ratio offset for sample angles


@dataclass(frozen=True)
class Divisor:
    """Paired poles and zeros of ``det L``; ``zeros[i]`` belongs with ``poles[i]``."""

    poles: tuple
    zeros: tuple


@dataclass(frozen=True, eq=False)
class RationalMatrixFunction:
    """Validated additive data.  Use :func:`construct` rather than the raw constructor.

    ``zeros[i]`` is the determinant zero paired with ``poles[i]``; the pairing
    only matters for multiplicative constructions.
    """

    L0: np.ndarray
    poles: np.ndarray
    residues: tuple
    zeros: np.ndarray

    @property
    def m(self):
        return self.L0.shape[0]

    @property
    def k(self):
        return self.poles.shape[0]

    @cached_property
    def columns(self):
        return np.array([r.column for r in self.residues], dtype=np.complex128).reshape(self.k, self.m)

    @cached_property
    def rows(self):
        return np.array([r.row for r in self.residues], dtype=np.complex128).reshape(self.k, self.m)

    def residue(self, i):
        return self.residues[i].matrix()

    @property
    def L_inf(self):
        """``-res_inf L dz``, i.e. the sum of the residues."""
        return self.columns.T @ self.rows

    @property
    def divisor(self):
        return Divisor(tuple(self.poles), tuple(self.zeros))

    def _check_regular(self, z, tol=RANK_TOL):
        for zi in self.poles:
            if close_points(z, zi, tol):
                raise AtPole(f"z={z} is at the pole {zi}")

    def evaluate(self, z, tol=RANK_TOL):
        if np.isinf(z):
            return np.diag(self.L0).astype(np.complex128)
        z = complex(z)
        self._check_regular(z, tol)
        return _kernels.eval_additive(self.L0, self.poles, self.columns, self.rows, [z])[0]

    __call__ = evaluate

    def evaluate_many(self, zs):
        """Stack of values at ``zs`` (no pole check)."""
        return _kernels.eval_additive(self.L0, self.poles, self.columns, self.rows, zs)

    def derivative(self, z):
        w = -1.0 / (complex(z) - self.poles) ** 2
        return np.einsum("k,ki,kj->ij", w, self.columns, self.rows)

    def det(self, z):
        return np.linalg.det(self.evaluate(z))

    @cached_property
    def inverse(self):
        return invert(self)

    def permuted(self, order):
        """Relabel the (zero, pole) pairs: position ``i`` takes old pair ``order[i]``."""
        order = list(order)
        return RationalMatrixFunction(self.L0, as_vector(self.poles[order]),
                                      tuple(self.residues[i] for i in order),
                                      as_vector(self.zeros[order]))

    def with_zeros(self, zeros):
        """Same function with a different pairing; ``zeros`` must be a permutation."""
        return construct(self.L0, self.poles, self.residues, zeros=zeros)

    def to_json(self):
        from .serialize import encode
        return {"L0": encode(self.L0), "poles": encode(self.poles),
                "residues": [{"column": encode(r.column), "row": encode(r.row)} for r in self.residues],
                "zeros": encode(self.zeros)}


@dataclass(frozen=True, eq=False)
class InverseData:
    """``M(z) = L(z)^-1 = M0 - sum_i c_i d_i / (z - zeta_i)``."""

    M0: np.ndarray
    zeros: np.ndarray
    residues: tuple
    poles: np.ndarray

    @property
    def m(self):
        return self.M0.shape[0]

    @cached_property
    def columns(self):
        return np.array([r.column for r in self.residues], dtype=np.complex128).reshape(-1, self.m)

    @cached_property
    def rows(self):
        return np.array([r.row for r in self.residues], dtype=np.complex128).reshape(-1, self.m)

    def residue(self, i):
        return self.residues[i].matrix()

    def evaluate(self, z, tol=RANK_TOL):
        if np.isinf(z):
            return np.diag(self.M0).astype(np.complex128)
        z = complex(z)
        for zi in self.zeros:
            if close_points(z, zi, tol):
                raise AtPole(f"z={z} is at the zero {zi} of det L")
        return self.evaluate_many([z])[0]

    __call__ = evaluate

    def evaluate_many(self, zs):
        return _kernels.eval_additive(self.M0, self.zeros, self.columns, self.rows, zs, sign=-1.0)

    def as_function(self):
        """``M`` itself as a rational matrix function (residues ``-M_i``)."""
        return construct(self.M0, self.zeros, [-r for r in self.residues], zeros=self.poles)

    def to_json(self):
        from .serialize import encode
        return {"M0": encode(self.M0), "zeros": encode(self.zeros),
                "residues": [{"column": encode(r.column), "row": encode(r.row)} for r in self.residues]}


def _as_pair(res, rel_tol):
    if isinstance(res, RankOnePair):
        return res
    if isinstance(res, dict):
        return RankOnePair.from_vectors(res["column"], res["row"])
    if isinstance(res, tuple) and len(res) == 2:
        return RankOnePair.from_vectors(*res)
    return rank_one_decompose(res, rel_tol)


def _diag_entries(L0):
    a = np.asarray(L0, dtype=np.complex128)
    if a.ndim == 2:
        if max_abs(a - np.diag(np.diag(a))) > 0:
            raise NonGeneric("L0 must be diagonal")
        a = np.diag(a)
    return as_vector(a, "L0")


def _check_distinct(points, what, tol=SEPARATION_TOL):
    for i in range(len(points)):
        for j in range(i):
            if close_points(points[i], points[j], tol):
                raise NonGeneric(f"{what}: points {points[j]} and {points[i]} collide")


def _sample_radius(L0, poles, cols, rows):
    if len(poles) == 0:
        return 1.0
    # zeros are the eigenvalues of diag(poles) - B L0^-1 A; bound them by Gershgorin
    K = np.diag(poles) - rows @ (cols / L0[None, :]).T
    gersh = np.max(np.sum(np.abs(K), axis=1))
    return 2.0 * max(float(np.max(np.abs(poles))), float(gersh)) + 1.0


def _hadamard_ratio(A):
    """``|det A|`` relative to the product of its column norms (lies in [0, 1])."""
    norms = np.prod(np.linalg.norm(A, axis=0))
    return abs(np.linalg.det(A)) / norms if norms else 0.0


def _refine_zero(L0, poles, cols, rows, z, steps=3):
    def value(x):
        return _kernels.eval_additive(L0, poles, cols, rows, [x])[0]

    def deriv(x):
        return np.einsum("k,ki,kj->ij", -1.0 / (x - poles) ** 2, cols, rows)

    best = _hadamard_ratio(value(z))
    for _ in range(steps):
        if best == 0.0:
            break
        try:
            tr = np.trace(np.linalg.solve(value(z), deriv(z)))
        except np.linalg.LinAlgError:
            break
        if tr == 0:
            break
        cand = z - 1.0 / tr
        r = _hadamard_ratio(value(cand))
        if not r < best:
            break
        z, best = cand, r
    return z


def compute_zeros(L0, poles, cols, rows):
    """Zeros of ``det L`` by sampling, interpolation and companion roots, then polished."""
    k = len(poles)
    if k == 0:
        return np.zeros(0, dtype=np.complex128)
    R = _sample_radius(L0, poles, cols, rows)
    n = k + 3
    xs = R * np.exp(2j * np.pi * (np.arange(n) + _PHASE) / n)
    vals = np.linalg.det(_kernels.eval_additive(L0, poles, cols, rows, xs))
    vals = vals * np.prod(xs[:, None] - poles[None, :], axis=1) / np.prod(L0)
    coeffs = poly_from_samples(list(zip(xs, vals)), k, tol=1e-7)
    roots = poly_roots(coeffs)
    for z in roots:
        for zi in poles:
            if close_points(z, zi, SEPARATION_TOL):
                raise NonGeneric(f"det L has a zero at the pole {zi}; the divisor is degenerate")
    roots = np.array([_refine_zero(L0, poles, cols, rows, z) for z in roots])
    return np.array(sorted(roots, key=lex_key), dtype=np.complex128)


def _pair_zeros(poles, computed, expected):
    k = len(poles)
    if expected is None:
        order = sorted(range(k), key=lambda i: lex_key(poles[i]))
        zeros = np.empty(k, dtype=np.complex128)
        for rank, i in enumerate(order):
            zeros[i] = computed[rank]
        return zeros
    expected = np.asarray(expected, dtype=np.complex128).reshape(-1)
    if len(expected) != k:
        raise NonGeneric(f"expected {k} zeros, got {len(expected)}")
    used = set()
    for e in expected:
        dist = [abs(e - c) if j not in used else np.inf for j, c in enumerate(computed)]
        j = int(np.argmin(dist))
        if not close_points(e, computed[j], SEPARATION_TOL):
            raise NonGeneric(f"requested zero {e} is not a zero of det L (nearest {computed[j]})")
        used.add(j)
    return expected.copy()


def construct(L0, poles, residues, zeros=None, rel_tol=RANK_TOL):
    """Validate additive data and compute the determinant divisor.

    ``residues`` may be rank-one matrices, ``(column, row)`` tuples, dicts with
    those keys or :class:`RankOnePair` objects.  ``zeros`` optionally fixes the
    pairing (it must match the computed zeros as a set); by default the i-th
    smallest zero is paired with the i-th smallest pole, lexicographically.
    """
    L0 = _diag_entries(L0)
    poles = as_vector(poles, "poles")
    if np.any(np.abs(L0) < rel_tol * (1.0 + max_abs(L0))):
        raise NonGeneric("L0 must be non-degenerate")
    _check_distinct(L0, "L0 eigenvalues")
    _check_distinct(poles, "poles")
    if len(residues) != len(poles):
        raise ValueError(f"{len(poles)} poles but {len(residues)} residues")
    pairs = tuple(_as_pair(r, rel_tol) for r in residues)
    for r in pairs:
        if r.column.shape[0] != L0.shape[0] or r.row.shape[0] != L0.shape[0]:
            raise ValueError("residue dimension does not match L0")
        if max_abs(r.column) == 0:
            raise ZeroMatrix("zero residue")
    cols = np.array([r.column for r in pairs], dtype=np.complex128).reshape(len(pairs), L0.shape[0])
    rows = np.array([r.row for r in pairs], dtype=np.complex128).reshape(len(pairs), L0.shape[0])
    computed = compute_zeros(L0, poles, cols, rows)
    _check_distinct(np.concatenate([poles, computed]), "determinant divisor")
    paired = _pair_zeros(poles, computed, zeros)
    return RationalMatrixFunction(L0, poles, pairs, as_vector(paired, "zeros"))


def evaluate(L, z):
    return L.evaluate(z)


def det_divisor(L):
    return L.divisor


def invert(L, rel_tol=RANK_TOL):
    """Residues of ``L^-1`` at the determinant zeros.

    ``c`` and ``d`` are the right and left null vectors of ``L(zeta)``; the
    scale comes from the constant term of ``L M = I`` at ``zeta``:
    ``M_i = -c d / (d L'(zeta) c)``.
    """
    res = []
    for zeta in L.zeros:
        A = L.evaluate(zeta)
        U, s, Vh = np.linalg.svd(A)
        if L.m > 1 and s[-2] <= rel_tol * s[0]:
            raise NonGeneric(f"L({zeta}) has a null space of dimension > 1")
        if s[-1] > 1e-7 * s[0]:
            raise NonGeneric(f"{zeta} is not a zero of det L (relative sigma_min {s[-1] / s[0]:.3e})")
        c = Vh[-1].conj()
        d = U[:, -1].conj()
        scale = d @ L.derivative(zeta) @ c
        if abs(scale) < rel_tol * np.linalg.norm(L.derivative(zeta)):
            raise NonGeneric(f"zero {zeta} of det L is not simple")
        try:
            res.append(RankOnePair.from_vectors(-c / scale, d))
        except ZeroMatrix as exc:  # pragma: no cover - d is a unit vector
            raise NotRankOne(str(exc)) from exc
    return InverseData(as_vector(1.0 / L.L0), L.zeros, tuple(res), L.poles)


def gauge_act(L, D):
    """Conjugate every residue by a constant diagonal matrix ``D``."""
    d = _diag_entries(D)
    if d.shape[0] != L.m:
        raise ValueError("gauge dimension mismatch")
    if np.min(np.abs(d)) < RANK_TOL * max_abs(d):
        raise SingularGauge("gauge matrix is singular")
    new = [(d * r.column, r.row / d) for r in L.residues]
    return construct(L.L0, L.poles, new, zeros=L.zeros)
