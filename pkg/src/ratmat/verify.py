"""Invariant suite: each check returns a residual, compared against a fixed tolerance.

Checks that do not apply to an instance (wrong shape, or coordinates on which
a construction is singular) are reported as skipped with the reason, never
as passes.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dpv, refactorization as rf, spectral
from .elementary_divisor import from_action, from_action_left
from .errors import GenericityHalt, RatmatError
from .factorization import full_factorization, left_divisor, reconstruct, right_divisor
from .numerics import max_abs
from .rational_matrix import gauge_act
from .sampling import (random_divisor, random_instance, random_quadratic,
                       random_state, rng_for)

log = logging.getLogger(__name__)

TOLERANCES = {
    "inverse_identity": 1e-10,
    "det_at_zeros": 1e-8,
    "factorization_roundtrip": 1e-9,
    "quadratic_identity": 1e-10,
    "divisor_det": 1e-12,
    "divisor_inverse": 1e-12,
    "divisor_eigen_action": 1e-12,
    "divisor_from_action": 1e-12,
    "divisor_from_action_left": 1e-12,
    "gradient_recovery": 1e-8,
    "gradient_finite_difference": 1e-5,
    "eta_roundtrip": 1e-9,
    "isospectral_divisor": 1e-9,
    "refactorization_consistency": 1e-8,
    "euler_lagrange_angle": 1e-6,
    "spectral_roundtrip": 1e-10,
    "spectral_closed_forms": 1e-12,
    "spectral_inverse_forms": 1e-9,
    "spectral_trace_identity": 1e-12,
    "gauge_covariance": 1e-10,
    "dpv_oracle": 1e-8,
    "dpv_rho_k": 1e-9,
    "mu_identities": 1e-8,
    "linf_decomposition": 1e-10,
}

PROBE_MARGIN = 0.1


def _sample_points(L, n, rng, margin=0.3):
    pts = np.concatenate([L.poles, L.zeros])
    R = 2.0 + float(np.max(np.abs(pts)))
    out = []
    while len(out) < n:
        z = complex(rng.uniform(-R, R), rng.uniform(-R, R))
        if np.min(np.abs(pts - z)) > margin:
            out.append(z)
    return np.array(out)


# ---------------------------------------------------------------------------
# individual residuals
# ---------------------------------------------------------------------------

def inverse_identity(L, rng, n=20, normwise=True):
    """Max-abs of ``L(z) M(z) - I``; ``normwise`` divides by ``|L(z)| |M(z)|`` (always >= 1).

    The normwise form stays meaningful on ill-conditioned draws, where even a
    dense LU inverse cannot reach an absolute 1e-10.
    """
    zs = _sample_points(L, n, rng)
    Ls, Ms = L.evaluate_many(zs), L.inverse.evaluate_many(zs)
    err = np.abs(Ls @ Ms - np.eye(L.m)).max(axis=(1, 2))
    if normwise:
        err = err / np.maximum(1.0, np.linalg.norm(Ls, 2, axis=(1, 2)) * np.linalg.norm(Ms, 2, axis=(1, 2)))
    return float(err.max())


def det_at_zeros(L):
    worst = 0.0
    for s in L.zeros:
        A = L.evaluate(s)
        sig = np.linalg.svd(A, compute_uv=False)
        worst = max(worst, abs(np.linalg.det(A)) / sig[0] ** L.m)
    return worst


def factorization_roundtrip(L, rng, n=10):
    R = reconstruct(full_factorization(L))
    zs = _sample_points(L, n, rng)
    ref = L.evaluate_many(zs)
    return max_abs(R.evaluate_many(zs) - ref) / max(1.0, max_abs(ref))


def quadratic_identity(L, rng, n=10):
    """``L = B2l L0 B1r`` sampled at ``n`` points."""
    inv = L.inverse
    B1r, B2l = right_divisor(L, inv, 0), left_divisor(L, inv, 1)
    zs = _sample_points(L, n, rng)
    L0 = np.diag(L.L0)
    ref = L.evaluate_many(zs)
    got = np.array([B2l(z) @ L0 @ B1r(z) for z in zs])
    return max_abs(got - ref) / max(1.0, max_abs(ref))


def divisor_residuals(B, rng):
    """Determinant, inverse, eigen-action and reconstruction residuals of one divisor."""
    pts = np.array([B.z0, B.zeta0])
    zs = []
    while len(zs) < 5:
        z = complex(*rng.uniform(-6, 6, 2))
        if np.min(np.abs(pts - z)) > 0.3:
            zs.append(z)
    Binv = B.inverse()
    det_r = inv_r = eig_r = 0.0
    for z in zs:
        ratio = (z - B.zeta0) / (z - B.z0)
        det_r = max(det_r, abs(B.det(z) - ratio) / max(1.0, abs(ratio)))
        inv_r = max(inv_r, max_abs(B(z) @ Binv(z) - np.eye(B.m)))
        eig_r = max(eig_r, max_abs(B(z) @ B.p - ratio * B.p) / max(1.0, max_abs(ratio * B.p)),
                    max_abs(B.q @ B(z) - ratio * B.q) / max(1.0, max_abs(ratio * B.q)))
    eig_r = max(eig_r, max_abs(B(B.zeta0) @ B.p) / max(1.0, max_abs(B.p)))
    zstar = zs[0]
    # probe vector kept clear of the degenerate locus q w = 0 (and w p = 0 for the mirror)
    while True:
        w = rng.standard_normal(B.m) + 1j * rng.standard_normal(B.m)
        nw = np.linalg.norm(w)
        if (abs(B.q @ w) >= PROBE_MARGIN * nw * np.linalg.norm(B.q)
                and abs(w @ B.p) >= PROBE_MARGIN * nw * np.linalg.norm(B.p)):
            break
    scale = max(1.0, max_abs(B.G))
    B1 = from_action(B.z0, B.zeta0, zstar, B.q, w, B(zstar) @ w)
    B2 = from_action_left(B.z0, B.zeta0, zstar, B.p, w, w @ B(zstar))
    return {"divisor_det": det_r, "divisor_inverse": inv_r, "divisor_eigen_action": eig_r,
            "divisor_from_action": max_abs(B1.G - B.G) / scale,
            "divisor_from_action_left": max_abs(B2.G - B.G) / scale}


def gradient_fd_residual(X, Y, params, h=1e-6):
    """Worst relative gap between analytic and central-difference partials.

    Differences of the Lagrangian are taken as ``sum c log(f+ / f-)`` so that
    no branch cut is crossed.
    """
    grads = rf.lagrangian_gradients(X, Y, params)
    slots = [np.array(v, dtype=np.complex128) for v in (*X, *Y)]

    def terms(s):
        return rf.lagrangian_terms((s[0], s[1]), (s[2], s[3]), params)

    worst = 0.0
    for idx, g in enumerate(grads):
        for j in range(len(g)):
            for direction in (1.0, 1j):
                plus = [v.copy() for v in slots]
                minus = [v.copy() for v in slots]
                plus[idx][j] += h * direction
                minus[idx][j] -= h * direction
                diff = sum(c * np.log(fp / fm)
                           for (c, fp), (_, fm) in zip(terms(plus), terms(minus)))
                est = diff / (2 * h * direction)
                worst = max(worst, abs(est - g[j]) / max(np.linalg.norm(g), 1e-300))
    return worst


def euler_lagrange_angle(L, n=3):
    """Worst angle over an isospectral and, when no shift collides, an isomonodromic run."""
    worst = max(a for _, a in rf.euler_lagrange_residuals(rf.trajectory(L, n, "isospectral")))
    try:
        Ls = rf.trajectory(L, n, "isomonodromic")
    except GenericityHalt:
        return worst
    return max(worst, *(a for _, a in rf.euler_lagrange_residuals(Ls, "isomonodromic")))


def spectral_residuals(L, rng):
    T, P = spectral.extract_spectral(L)
    rebuilt = spectral.from_spectral(T, P)
    T2, P2 = spectral.extract_spectral(rebuilt)
    vals = lambda T_, P_: np.array([getattr(T_, f) for f in ("rho1", "rho2", "zeta1", "zeta2", "z1", "z2",
                                                            "k1", "k2", "mu")] + [P_.gamma, P_.pi])
    v1, v2 = vals(T, P), vals(T2, P2)
    out = {"spectral_roundtrip": float(np.max(np.abs(v1 - v2) / np.maximum(1.0, np.abs(v1))))}
    A = spectral.residues_direct(T, P)
    B = spectral.residues_phi(T, P)
    out["spectral_closed_forms"] = max(max_abs(a - b) for a, b in zip(A, B)) / max(1.0, max_abs(A[0]))
    inv = L.inverse
    ref = [inv.residue(0), inv.residue(1)]
    got = spectral.inverse_residues_direct(T, P)
    tr = spectral.inverse_residues_transfer(T, P)
    out["spectral_inverse_forms"] = max(
        max(max_abs(a - b), max_abs(c - b)) / max(1.0, max_abs(b)) for a, b, c in zip(got, ref, tr))
    lhs, rhs = T.k1 + T.k2, (T.z1 - T.zeta1) + (T.z2 - T.zeta2)
    out["spectral_trace_identity"] = abs(lhs - rhs) / max(1.0, abs(rhs))
    t = complex(rng.uniform(0.5, 2.0), rng.uniform(-1, 1))
    Tg, Pg = spectral.extract_spectral(gauge_act(L, [1.0, t]))
    cov = max(abs(Tg.mu - t * T.mu) / abs(t * T.mu), abs(Pg.gamma - P.gamma) / max(1, abs(P.gamma)),
              abs(Pg.pi - P.pi) / max(1, abs(P.pi)), abs(Tg.k1 - T.k1) / max(1, abs(T.k1)),
              abs(Tg.k2 - T.k2) / max(1, abs(T.k2)))
    out["gauge_covariance"] = float(cov)
    return out


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

class Collector:
    """Per-invariant worst residual plus skip reasons."""

    def __init__(self):
        self.max = {}
        self.skipped = {}
        self.notes = {}

    def add(self, name, value):
        value = float(value)
        if not np.isfinite(value):
            value = float("inf")
        self.max[name] = max(self.max.get(name, 0.0), value)

    def skip(self, name, reason):
        self.skipped.setdefault(name, reason)

    def merge(self, other):
        for k, v in other.max.items():
            self.add(k, v)
        for k, v in other.skipped.items():
            self.skip(k, v)
        for k, v in other.notes.items():
            self.notes.setdefault(k, set()).update(v)

    def note(self, key, value):
        self.notes.setdefault(key, set()).add(value)

    def report(self):
        rows = []
        for name in TOLERANCES:
            if name in self.max:
                r = self.max[name]
                rows.append({"invariant": name, "max_residual": r, "pass": bool(r <= TOLERANCES[name]),
                             "tolerance": TOLERANCES[name]})
            elif name in self.skipped:
                rows.append({"invariant": name, "max_residual": None, "pass": None,
                             "tolerance": TOLERANCES[name], "skipped": self.skipped[name]})
        return rows


def _guard(col, names, fn, *args):
    try:
        res = fn(*args)
    except (RatmatError, ZeroDivisionError) as exc:
        for n in names:
            col.skip(n, f"{type(exc).__name__}: {exc}")
        return None
    return res


def check_instance(L, rng, eta_form="auto", dpv_steps=1, col=None):
    """Run every applicable invariant on ``L``."""
    col = Collector() if col is None else col
    col.add("inverse_identity", inverse_identity(L, rng))
    col.add("det_at_zeros", det_at_zeros(L))
    r = _guard(col, ["factorization_roundtrip"], factorization_roundtrip, L, rng)
    if r is not None:
        col.add("factorization_roundtrip", r)
    quad = ["quadratic_identity", "linf_decomposition", "gradient_recovery", "gradient_finite_difference", "eta_roundtrip",
            "isospectral_divisor", "refactorization_consistency", "euler_lagrange_angle"]
    if L.k != 2:
        for n in quad:
            col.skip(n, "needs exactly two poles")
    else:
        _check_quadratic(L, rng, eta_form, col)
    spec = ["spectral_roundtrip", "spectral_closed_forms", "spectral_inverse_forms",
            "spectral_trace_identity", "gauge_covariance", "dpv_oracle", "dpv_rho_k", "mu_identities"]
    if L.k != 2 or L.m != 2:
        for n in spec:
            col.skip(n, "needs a rank-two matrix with two poles")
    else:
        res = _guard(col, spec, spectral_residuals, L, rng)
        if res is not None:
            for k, v in res.items():
                col.add(k, v)
            _check_dpv(dpv.state_of(L), dpv_steps, col, L)
    return col


def _check_quadratic(L, rng, eta_form, col):
    col.add("quadratic_identity", quadratic_identity(L, rng))
    col.add("linf_decomposition", dpv.linf_decomposition_residual(L))
    r = _guard(col, ["gradient_recovery"], rf.recovery_residuals, L)
    if r is not None:
        col.add("gradient_recovery", max(r.values()))
    C = rf.coordinates_of(L)
    params = rf.FlowParams.of(L)
    r = _guard(col, ["gradient_finite_difference"], gradient_fd_residual, C.X, C.Y, params)
    if r is not None:
        col.add("gradient_finite_difference", r)
    if eta_form == "auto":
        res = _guard(col, ["eta_roundtrip"], rf.resolve_eta_form, L)
        if res is not None:
            chosen, outcome = res
            if all(np.isinf(v) for v in outcome.values()):
                col.skip("eta_roundtrip", "DegenerateCoordinates: both forms hit a vanishing pairing")
            else:
                col.note("eta_form", chosen or "none")
                col.add("eta_roundtrip", min(outcome.values()))
    else:
        r = _guard(col, ["eta_roundtrip"], rf.eta_roundtrip, L, eta_form)
        if r is not None:
            col.add("eta_roundtrip", r)
    Lt = _guard(col, ["isospectral_divisor", "refactorization_consistency"], rf.isospectral_step, L)
    if Lt is not None:
        col.add("isospectral_divisor", max(max_abs(Lt.poles - L.poles), max_abs(Lt.zeros - L.zeros)))
        col.add("refactorization_consistency", max(rf.refactorization_residuals(L, Lt).values()))
    r = _guard(col, ["euler_lagrange_angle"], euler_lagrange_angle, L)
    if r is not None:
        col.add("euler_lagrange_angle", r)


def _check_dpv(S, steps, col, L=None):
    names = ["dpv_oracle", "dpv_rho_k", "mu_identities"]
    try:
        reports = dpv.trajectory(S, steps)
    except GenericityHalt as exc:
        reports = exc.reports
        if not reports:
            for n in names:
                col.skip(n, f"{type(exc).__name__} at step {exc.step}: {exc}")
            return
        col.note("dpv_halts", f"{type(exc).__name__}@{exc.step}")
    for rep in reports:
        col.add("dpv_oracle", rep.max_discrepancy)
        col.add("dpv_rho_k", rep.discrepancies["rho_k_drift"])
        col.note("pi_form", rep.form_used)
    Lm = spectral.from_spectral(S.T, S.P) if L is None else L
    r = _guard(col, ["mu_identities"], dpv.mu_identity_check, Lm)
    if r is not None:
        col.add("mu_identities", r)


def random_case(seed, index, eta_form="auto"):
    """Instance ``index`` of the random suite; the kind cycles with the index."""
    rng = rng_for(seed, index)
    col = Collector()
    kind = index % 4
    for _ in range(5):
        B = random_divisor(rng, m=int(rng.integers(2, 5)))
        for k, v in divisor_residuals(B, rng).items():
            col.add(k, v)
    if kind == 0:
        m, k = int(rng.integers(2, 5)), int(rng.integers(1, 5))
        check_instance(random_instance(rng, m, k), rng, eta_form, col=col)
    elif kind == 1:
        check_instance(random_instance(rng, int(rng.integers(3, 5)), 2), rng, eta_form, col=col)
    elif kind == 2:
        check_instance(random_quadratic(rng), rng, eta_form, col=col)
    else:
        S = random_state(rng, steps=5)
        _check_dpv(S, 5, col)
    return col


def run_random(n, seed=0, workers=1, eta_form="auto"):
    """Aggregate :func:`random_case` over ``n`` indices (order-independent result)."""
    t0 = time.perf_counter()
    total = Collector()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(random_case, [seed] * n, range(n), [eta_form] * n))
    else:
        parts = [random_case(seed, i, eta_form) for i in range(n)]
    for p in parts:
        total.merge(p)
    log.info("random suite: %d instances in %.2fs", n, time.perf_counter() - t0)
    return total


def notes_json(col):
    return {k: sorted(v) for k, v in sorted(col.notes.items())}


def passed(rows):
    return all(r["pass"] is not False for r in rows)
