"""Two-pole refactorization dynamics and their Lagrangian description.

Write ``L = B2l L0 B1r``.  Swapping the outer factors gives the isospectral
step ``B1r(z) B2l(z) L0``; shifting the argument of the moved factor gives the
isomonodromic step ``B1r(z + 1) B2l(z) L0``, which moves ``(z1, zeta1)`` by -1.

Coordinates on the space of such ``L`` are the four projective vectors
``(c2, d1; a2, b1)`` taken from the residues of ``L`` and ``L^-1``.  Pair
``1`` is position 0 of ``L.poles`` and pair ``2`` is position 1.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .elementary_divisor import make
from .errors import (DegenerateAction, DegenerateCoordinates, LogOfZero,
                     ShiftCollision, WrongPoleCount)
from .factorization import expand_product, left_divisor, right_divisor
from .numerics import (RANK_TOL, SEPARATION_TOL, close_points, max_abs,
                       parallel_residual, projector)

log = logging.getLogger(__name__)

ETA_FORMS = ("lemma33", "printed")


@dataclass(frozen=True, eq=False)
class CoordinatePoint:
    """``X = (x2, x1row)`` and ``Y = (y2, y1row)``; from ``L`` these are ``(c2, d1)``, ``(a2, b1)``."""

    x2: np.ndarray
    x1row: np.ndarray
    y2: np.ndarray
    y1row: np.ndarray

    @property
    def X(self):
        return (self.x2, self.x1row)

    @property
    def Y(self):
        return (self.y2, self.y1row)


@dataclass(frozen=True)
class FlowParams:
    z1: complex
    z2: complex
    zeta1: complex
    zeta2: complex
    L0: np.ndarray
    t: int = 0
    mode: str = "isospectral"

    def __post_init__(self):
        if self.mode not in ("isospectral", "isomonodromic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "L0", np.asarray(self.L0, dtype=np.complex128))

    @classmethod
    def of(cls, L, t=0, mode="isospectral"):
        _check_quadratic(L)
        return cls(L.poles[0], L.poles[1], L.zeros[0], L.zeros[1], L.L0, t, mode)

    @property
    def z1_t(self):
        return self.z1 - self.t if self.mode == "isomonodromic" else self.z1

    @property
    def zeta1_t(self):
        return self.zeta1 - self.t if self.mode == "isomonodromic" else self.zeta1


def _check_quadratic(L):
    if L.k != 2:
        raise WrongPoleCount(f"refactorization needs exactly 2 poles, got {L.k}")


def coordinates_of(L, inv=None):
    """The coordinate tuple ``(c2, d1; a2, b1)`` of ``L``."""
    _check_quadratic(L)
    inv = L.inverse if inv is None else inv
    return CoordinatePoint(inv.residues[1].column, inv.residues[0].row,
                           L.residues[1].column, L.residues[0].row)


# ---------------------------------------------------------------------------
# Lagrangian
# ---------------------------------------------------------------------------

def _forms(X, Y, params, tol=RANK_TOL):
    x2, x1 = (np.asarray(v, dtype=np.complex128) for v in X)
    y2, y1 = (np.asarray(v, dtype=np.complex128) for v in Y)
    L0 = params.L0
    forms = (x1 @ (L0 * x2), y1 @ x2, y1 @ (y2 / L0), x1 @ y2)
    norms = (np.linalg.norm(x1) * np.linalg.norm(x2), np.linalg.norm(y1) * np.linalg.norm(x2),
             np.linalg.norm(y1) * np.linalg.norm(y2), np.linalg.norm(x1) * np.linalg.norm(y2))
    for f, n in zip(forms, norms):
        if abs(f) <= tol * n * (1.0 + max_abs(L0) + max_abs(1.0 / L0)):
            raise LogOfZero("a bilinear form in the Lagrangian vanishes")
    z1, z2, s1, s2 = params.z1_t, params.z2, params.zeta1_t, params.zeta2
    coefs = (z2 - z1, z1 - s2, s2 - s1, s1 - z2)
    return coefs, forms, (x2, x1, y2, y1)


def lagrangian_terms(X, Y, params):
    """The four ``(coefficient, bilinear value)`` pairs of the log sum."""
    coefs, forms, _ = _forms(X, Y, params)
    return list(zip(coefs, forms))


def lagrangian(X, Y, params):
    """Principal-branch value of the four-term log sum (diagnostic only)."""
    coefs, forms, _ = _forms(X, Y, params)
    return complex(sum(c * np.log(f) for c, f in zip(coefs, forms)))


def lagrangian_gradients(X, Y, params):
    """Holomorphic partials ``(dL/dx2, dL/dx1row, dL/dy2, dL/dy1row)``.

    Derivatives with respect to columns are rows and vice versa.
    """
    (c12, c2y, cyy, c1y), (f1, f2, f3, f4), (x2, x1, y2, y1) = _forms(X, Y, params)
    L0 = params.L0
    d_x2 = c12 * (x1 * L0) / f1 + c2y * y1 / f2
    d_x1 = c12 * (L0 * x2) / f1 + c1y * y2 / f4
    d_y2 = cyy * (y1 / L0) / f3 + c1y * x1 / f4
    d_y1 = c2y * x2 / f2 + cyy * (y2 / L0) / f3
    return d_x2, d_x1, d_y2, d_y1


def recover_vectors(C, params):
    """``(a1, b2row, c1, d2row)`` from the gradient of the Lagrangian at ``(X, Y)``."""
    try:
        d_x2, d_x1, d_y2, d_y1 = lagrangian_gradients(C.X, C.Y, params)
    except LogOfZero as exc:
        raise DegenerateCoordinates(str(exc)) from exc
    return -d_x1, d_x2, d_y1, -d_y2


def recovery_residuals(L):
    """Projector mismatch of the four recovered products against ``L`` and ``L^-1``.

    Returns a dict name -> max-abs difference of the rank-one idempotents.
    """
    inv = L.inverse
    C = coordinates_of(L, inv)
    a1, b2, c1, d2 = recover_vectors(C, FlowParams.of(L))
    a2, b1 = L.residues[1].column, L.residues[0].row
    c2, d1 = inv.residues[1].column, inv.residues[0].row

    def gap(col, row, R):
        return max_abs(projector(col, row) - R / np.trace(R))

    return {"a1b1": gap(a1, b1, L.residue(0)), "a2b2": gap(a2, b2, L.residue(1)),
            "c1d1": gap(c1, d1, inv.residue(0)), "c2d2": gap(c2, d2, inv.residue(1))}


# ---------------------------------------------------------------------------
# eta: coordinates -> L
# ---------------------------------------------------------------------------

def _eta_factors(Qprev, Q, params, form, tol=RANK_TOL):
    a2p, b1p = (np.asarray(v, dtype=np.complex128) for v in Qprev)
    a2, b1 = (np.asarray(v, dtype=np.complex128) for v in Q)
    L0 = params.L0
    z1, z2, s1, s2 = params.z1_t, params.z2, params.zeta1_t, params.zeta2
    w = a2p / L0
    v = a2 / L0
    dens = {"b1' a2": (b1p @ a2, b1p, a2), "b1 L0^-1 a2": (b1 @ v, b1, v),
            "b1 L0^-1 a2'": (b1 @ w, b1, w)}
    for name, (val, r, c) in dens.items():
        if abs(val) <= tol * np.linalg.norm(r) * np.linalg.norm(c):
            raise DegenerateCoordinates(f"{name} vanishes")
    left_row = (z2 - s1) * b1p / (b1p @ a2) + (s1 - s2) * (b1 / L0) / (b1 @ v)
    if form == "lemma33":
        right_G = np.outer((z1 - s2) * w / (b1 @ w) + (s2 - s1) * v / (b1 @ v), b1)
    elif form == "printed":
        # the displayed last term carries b2 (recovered from the Lagrangian) instead of b1
        C = CoordinatePoint(w, b1p, a2, b1)
        b2 = recover_vectors(C, params)[1]
        if abs(b2 @ v) <= tol * np.linalg.norm(b2) * np.linalg.norm(v):
            raise DegenerateCoordinates("b2 L0^-1 a2 vanishes")
        right_G = (z1 - s2) * np.outer(w, b1) / (b1 @ w) + (s2 - s1) * np.outer(v, b2) / (b2 @ v)
    else:
        raise ValueError(f"unknown eta form {form!r}; expected one of {ETA_FORMS}")
    return left_row, right_G


def eta_value(Qprev, Q, params, z, form="lemma33"):
    """Value at ``z`` of the two-factor product defining ``eta``."""
    a2 = np.asarray(Q[0], dtype=np.complex128)
    left_row, right_G = _eta_factors(Qprev, Q, params, form)
    m = a2.shape[0]
    left = np.eye(m) + np.outer(a2, left_row) / (z - params.z2)
    right = np.eye(m) + right_G / (z - params.z1_t)
    return left @ np.diag(params.L0) @ right


def eta(Qprev, Q, params, form="lemma33"):
    """``L`` from the configuration pair ``(Qprev, Q) = ((L0 c2, d1), (a2, b1))``.

    Only the ``lemma33`` form (row ``b1`` throughout the right factor) yields an
    elementary divisor; the ``printed`` form has a rank-two numerator in
    general and is rejected with :class:`DegenerateCoordinates`.
    """
    a2 = np.asarray(Q[0], dtype=np.complex128)
    left_row, right_G = _eta_factors(Qprev, Q, params, form)
    z1, z2, s1, s2 = params.z1_t, params.z2, params.zeta1_t, params.zeta2
    s = np.linalg.svd(right_G, compute_uv=False)
    if len(s) > 1 and s[1] > RANK_TOL * s[0]:
        raise DegenerateCoordinates(
            f"{form} form: right factor numerator has rank 2 (sigma2/sigma1 = {s[1] / s[0]:.3e})")
    try:
        B2 = make(z2, s2, a2, left_row)
        i = int(np.argmax(np.abs(right_G).max(axis=1)))
        j = int(np.argmax(np.abs(right_G[i])))
        B1 = make(z1, s1, right_G[:, j], right_G[i] / right_G[i, j])
    except DegenerateAction as exc:
        raise DegenerateCoordinates(str(exc)) from exc
    L = expand_product([B2, np.diag(params.L0), B1])
    return L.permuted([1, 0])


def eta_roundtrip(L, form="lemma33", n_points=10, rng=None):
    """Max-abs mismatch between ``L`` and ``eta`` applied to ``L``'s own coordinates."""
    C = coordinates_of(L)
    params = FlowParams.of(L)
    Qprev = (params.L0 * C.x2, C.x1row)
    Q = (C.y2, C.y1row)
    rng = np.random.default_rng(0) if rng is None else rng
    zs = _regular_points(L, n_points, rng)
    ref = L.evaluate_many(zs)
    got = np.array([eta_value(Qprev, Q, params, z, form) for z in zs])
    return max_abs(got - ref) / max(1.0, max_abs(ref))


def resolve_eta_form(L, tol=1e-9):
    """Run both forms on ``L`` and report which reproduces it."""
    outcome = {}
    for form in ETA_FORMS:
        try:
            outcome[form] = eta_roundtrip(L, form)
        except DegenerateCoordinates:
            outcome[form] = float("inf")
    chosen = min(outcome, key=outcome.get)
    log.info("eta form resolution: %s -> using %s",
             ", ".join(f"{k}={v:.3e}" for k, v in outcome.items()), chosen)
    return chosen if outcome[chosen] <= tol else None, outcome


def _regular_points(L, n, rng, margin=0.5):
    pts = np.concatenate([L.poles, L.zeros])
    R = 2.0 + np.max(np.abs(pts))
    out = []
    while len(out) < n:
        z = complex(rng.uniform(-R, R), rng.uniform(-R, R))
        if np.min(np.abs(pts - z)) > margin:
            out.append(z)
    return np.array(out)


# ---------------------------------------------------------------------------
# steps
# ---------------------------------------------------------------------------

def _divisors(L):
    _check_quadratic(L)
    inv = L.inverse
    return right_divisor(L, inv, 0), left_divisor(L, inv, 1)


def isospectral_step(L):
    """``B1r(z) B2l(z) L0``; the divisor and its pairing are unchanged."""
    B1r, B2l = _divisors(L)
    return expand_product([B1r, B2l, np.diag(L.L0)])


def check_shift(z1, z2, zeta1, zeta2, step=None):
    pts = {"z1-1": z1 - 1, "z2": z2, "zeta1-1": zeta1 - 1, "zeta2": zeta2}
    names = list(pts)
    for i in range(4):
        for j in range(i):
            a, b = pts[names[i]], pts[names[j]]
            if close_points(a, b, SEPARATION_TOL):
                raise ShiftCollision(f"shifted divisor point {names[i]}={a} collides with "
                                     f"{names[j]}={b}", step=step)


def isomonodromic_step(L, step=None):
    """``B1r(z + 1) B2l(z) L0``; pair 1 moves to ``(zeta1 - 1, z1 - 1)``."""
    _check_quadratic(L)
    check_shift(L.poles[0], L.poles[1], L.zeros[0], L.zeros[1], step)
    B1r, B2l = _divisors(L)
    return expand_product([B1r.shifted(1.0), B2l, np.diag(L.L0)])


def step(L, mode):
    if mode == "isospectral":
        return isospectral_step(L)
    if mode == "isomonodromic":
        return isomonodromic_step(L)
    raise ValueError(f"unknown mode {mode!r}")


def trajectory(L, n, mode="isospectral"):
    """``[L, step(L), step(step(L)), ...]`` with ``n`` steps."""
    if n < 1:
        raise ValueError("n must be at least 1")
    out = [L]
    for i in range(n):
        try:
            out.append(step(out[-1], mode))
        except ShiftCollision as exc:
            exc.step = i + 1
            raise
    return out


def refactorization_residuals(L, Lt):
    """Projector-level versions of ``c1 ~ a1~``, ``b1 ~ d1~``, ``a2 ~ L0 c2~``, ``d2 L0 ~ b2~``."""
    inv, invt = L.inverse, Lt.inverse
    L0 = L.L0
    c1, b1 = inv.residues[0].column, L.residues[0].row
    a1t, d1t = Lt.residues[0].column, invt.residues[0].row
    a2, d2 = L.residues[1].column, inv.residues[1].row
    c2t, b2t = invt.residues[1].column, Lt.residues[1].row
    return {
        "G1r=G1l~": max_abs(projector(c1, b1) - projector(a1t, d1t)),
        "c1~a1~": parallel_residual(c1, a1t),
        "b1~d1~": parallel_residual(b1, d1t),
        "a2~L0c2~": parallel_residual(a2, L0 * c2t),
        "d2L0~b2~": parallel_residual(d2 * L0, b2t),
    }


def euler_lagrange_residuals(Ls, mode="isospectral"):
    """Discrete Euler-Lagrange residuals along a trajectory ``Ls``.

    ``Q_t = (a2, b1)`` of ``Ls[t]``; the Lagrangian is evaluated with its first
    slot in unabsorbed form ``(L0^-1 a2, b1)``.  For each interior ``t`` returns
    ``(relative, angle)``: the size of the summed gradient relative to its
    parts, and the projective distance between one part and minus the other.
    """
    out = []
    for t in range(1, len(Ls) - 1):
        L_prev, L_cur, L_next = Ls[t - 1], Ls[t], Ls[t + 1]
        L0 = L_cur.L0

        def Q(L):
            return L.residues[1].column, L.residues[0].row

        a2p, b1p = Q(L_prev)
        a2, b1 = Q(L_cur)
        a2n, b1n = Q(L_next)
        # the pair (Q_{s-1}, Q_s) is the (X, Y) coordinate of Ls[s], so its divisor applies
        p_prev = FlowParams(*_base_divisor(Ls[0]), L0, t, mode)
        p_cur = FlowParams(*_base_divisor(Ls[0]), L0, t + 1, mode)
        _, _, dy2, dy1 = lagrangian_gradients((a2p / L0, b1p), (a2, b1), p_prev)
        dx2, dx1, _, _ = lagrangian_gradients((a2 / L0, b1), (a2n, b1n), p_cur)
        row_parts = (dy2, dx2 / L0)
        col_parts = (dy1, dx1)
        rel = max(np.linalg.norm(row_parts[0] + row_parts[1]) / np.linalg.norm(row_parts[0]),
                  np.linalg.norm(col_parts[0] + col_parts[1]) / np.linalg.norm(col_parts[0]))
        ang = max(parallel_residual(row_parts[0], -row_parts[1]),
                  parallel_residual(col_parts[0], -col_parts[1]))
        out.append((rel, ang))
    return out


def _base_divisor(L):
    return L.poles[0], L.poles[1], L.zeros[0], L.zeros[1]


class ProjectiveNormalizer:
    """Keeps one pivot entry of a projective vector at 1 along a trajectory.

    The pivot is the entry of largest modulus at the first call; it is moved
    only when its modulus falls below ``threshold`` times the current maximum.
    """

    def __init__(self, threshold=0.1):
        self.threshold = threshold
        self.pivot = None

    def __call__(self, v):
        v = np.asarray(v, dtype=np.complex128)
        mags = np.abs(v)
        if self.pivot is None or mags[self.pivot] < self.threshold * mags.max():
            self.pivot = int(np.argmax(mags))
        return v / v[self.pivot]
