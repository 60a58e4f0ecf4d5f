"""Left/right divisors, sequential peeling into factors, and re-expansion of products.

Pair indices are 0-based positions in ``L.poles`` / ``L.zeros``.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .elementary_divisor import ElementaryDivisor, make
from .errors import DegenerateAction, DegeneratePairing, NonGeneric
from .numerics import (RANK_TOL, SEPARATION_TOL, RankOnePair, as_vector,
                       close_points, max_abs)
from .rational_matrix import construct


@dataclass(frozen=True, eq=False)
class Factorization:
    """``L(z) = diag(L0) C_1(z) ... C_k(z)``; ``pairing[i] = (zeta_i, z_i)`` of ``C_i``."""

    L0: np.ndarray
    factors: tuple
    pairing: tuple

    def evaluate_many(self, zs):
        if not self.factors:
            return _kernels.eval_factor_product(self.L0, [], np.zeros((0, len(self.L0))),
                                                np.zeros((0, len(self.L0))), zs)
        return _kernels.eval_factor_product(
            self.L0, [f.z0 for f in self.factors],
            np.array([f.p for f in self.factors]), np.array([f.q for f in self.factors]), zs)

    def evaluate(self, z):
        out = np.diag(self.L0).astype(np.complex128)
        for f in self.factors:
            out = out @ f.evaluate(z)
        return out

    __call__ = evaluate

    def to_json(self):
        from .serialize import encode
        return {"L0": encode(self.L0), "factors": [f.to_json() for f in self.factors],
                "pairing": [[encode(zeta), encode(pole)] for zeta, pole in self.pairing]}

    @classmethod
    def from_json(cls, data):
        from .serialize import decode_scalar, decode_vector
        factors = tuple(ElementaryDivisor.from_json(f) for f in data["factors"])
        pairing = tuple((decode_scalar(a), decode_scalar(b)) for a, b in data["pairing"])
        return cls(as_vector(decode_vector(data["L0"])), factors, pairing)


def _divisor(pole, zeta, p, q, what, index, tol):
    if abs(q @ p) < tol * np.linalg.norm(p) * np.linalg.norm(q):
        raise DegeneratePairing(
            f"{what} divisor for pair ({zeta}, {pole}) does not exist: bilinear pairing vanishes",
            stage=index)
    try:
        return make(pole, zeta, p, q, tol)
    except DegenerateAction as exc:  # pragma: no cover - guarded above
        raise DegeneratePairing(str(exc), stage=index) from exc


def right_divisor(L, inv, index, tol=RANK_TOL):
    """``B^r`` with ``L B^r(z)^-1`` regular at ``z_index``: numerator ``c b / (b c)``."""
    c = inv.residues[index].column
    b = L.residues[index].row
    return _divisor(L.poles[index], L.zeros[index], c, b, "right", index, tol)


def left_divisor(L, inv, index, tol=RANK_TOL):
    """``B^l`` with ``B^l(z)^-1 L`` regular at ``z_index``: numerator ``a d / (d a)``."""
    a = L.residues[index].column
    d = inv.residues[index].row
    return _divisor(L.poles[index], L.zeros[index], a, d, "left", index, tol)


def peel_residual(L, B, index):
    """Relative size of the residues of ``L B^-1`` at ``z_index`` and ``zeta_index``.

    Both vanish exactly when ``B`` is a right divisor for that pair.
    """
    Binv = B.inverse()
    Li = L.residue(index)
    at_pole = max_abs(Li @ Binv.evaluate(L.poles[index]))
    at_zero = max_abs(L.evaluate(L.zeros[index]) @ Binv.G)
    return max(at_pole / max_abs(Li), at_zero / (max_abs(L.evaluate(L.zeros[index])) * max_abs(Binv.G)))


def peel_right(L, index, tol=RANK_TOL):
    """Split ``L = L^r B^r`` and return ``(L^r, B^r)``; ``L^r`` loses the pair ``index``."""
    B = right_divisor(L, L.inverse, index, tol)
    resid = peel_residual(L, B, index)
    if resid > tol:
        raise DegeneratePairing(f"right divisor leaves a residue of relative size {resid:.3e}",
                                stage=index)
    Binv = B.inverse()
    keep = [j for j in range(L.k) if j != index]
    residues = [(L.residues[j].column, L.residues[j].row @ Binv.evaluate(L.poles[j])) for j in keep]
    rem = construct(L.L0, L.poles[keep], residues, zeros=L.zeros[keep])
    return rem, B


def _match(value, candidates, what):
    for j, c in enumerate(candidates):
        if close_points(value, c, SEPARATION_TOL):
            return j
    raise NonGeneric(f"{what} {value} not found among {list(candidates)}")


def apply_pairing(L, pairing):
    """Reorder and re-pair ``L`` so that pair ``i`` is ``pairing[i] = (zeta, pole)``."""
    pairing = [(complex(zeta), complex(pole)) for zeta, pole in pairing]
    if len(pairing) != L.k:
        raise NonGeneric(f"pairing has {len(pairing)} entries for {L.k} poles")
    pole_idx = [_match(pole, L.poles, "pole") for _, pole in pairing]
    zero_idx = [_match(zeta, L.zeros, "zero") for zeta, _ in pairing]
    if len(set(pole_idx)) != L.k or len(set(zero_idx)) != L.k:
        raise NonGeneric("pairing is not a bijection between zeros and poles")
    reordered = L.permuted(pole_idx)
    # the caller's values are kept once matched to the computed zeros
    return construct(reordered.L0, reordered.poles, reordered.residues,
                     zeros=[zeta for zeta, _ in pairing])


def full_factorization(L, pairing=None, tol=RANK_TOL):
    """Factors ``C_1 ... C_k`` of ``L``, peeled right-to-left so that ``C_k = B^r_k``.

    ``pairing`` lists ``(zeta, pole)`` for ``C_1 .. C_k``; ``None`` keeps the
    pairing and order stored in ``L``.
    """
    if pairing is not None:
        L = apply_pairing(L, pairing)
    pairs = tuple(zip(L.zeros, L.poles))
    factors = []
    cur = L
    for s in range(L.k - 1, -1, -1):
        try:
            cur, B = peel_right(cur, s, tol)
        except DegeneratePairing as exc:
            raise DegeneratePairing(f"stage {s}: {exc}", stage=s) from exc
        factors.append(B)
    return Factorization(L.L0, tuple(reversed(factors)), pairs)


def expand_product(chain, tol=RANK_TOL):
    """Additive form of a product of constant matrices and elementary divisors.

    The constants must multiply to a diagonal matrix (the value at infinity).
    Residues follow from the single factor carrying each pole; pole/zero pairs
    are listed in the order their divisors appear in ``chain``.
    """
    m = None
    const = None
    divs = []
    for pos, item in enumerate(chain):
        if isinstance(item, ElementaryDivisor):
            divs.append(pos)
            m = item.m
        else:
            A = np.asarray(item, dtype=np.complex128)
            const = A if const is None else const @ A
            m = A.shape[0]
    if const is None:
        const = np.eye(m, dtype=np.complex128)
    L0 = np.diag(const)
    if max_abs(const - np.diag(L0)) > tol * max_abs(const):
        raise NonGeneric("product is not diagonal at infinity")
    poles = [chain[i].z0 for i in divs]
    for i in range(len(poles)):
        for j in range(i):
            if close_points(poles[i], poles[j], SEPARATION_TOL):
                raise NonGeneric(f"factors share the pole {poles[i]}")

    def value(items, z):
        out = np.eye(m, dtype=np.complex128)
        for it in items:
            out = out @ (it.evaluate(z) if isinstance(it, ElementaryDivisor) else it)
        return out

    residues = []
    for pos in divs:
        B = chain[pos]
        left = value(chain[:pos], B.z0)
        right = value(chain[pos + 1:], B.z0)
        residues.append(RankOnePair.from_vectors(left @ B.p, B.q @ right))
    zeros = [chain[i].zeta0 for i in divs]
    return construct(L0, as_vector(poles), residues, zeros=zeros, rel_tol=tol)


def reconstruct(F, tol=RANK_TOL):
    """Re-expand a factorization into additive form."""
    return expand_product([np.diag(F.L0), *F.factors], tol)
