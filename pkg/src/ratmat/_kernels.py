"""Batched evaluation kernels.

Two interchangeable implementations live here: vectorised numpy and explicit
loops compiled with numba.  The loop versions are plain Python and stay
importable (and testable) without numba.

Backend selection happens once at import time:

* ``RATMAT_BACKEND=numpy`` forces the numpy path;
* ``RATMAT_BACKEND=numba`` (default) uses numba when it can be imported and
  silently falls back to numpy otherwise.
"""

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is installed in CI
    HAS_NUMBA = False

_requested = os.environ.get("RATMAT_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"RATMAT_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numba" if (_requested == "numba" and HAS_NUMBA) else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def eval_additive_numpy(diag, poles, cols, rows, zs, sign):
    """diag(diag) + sign * sum_i outer(cols[i], rows[i]) / (z - poles[i]) for z in zs."""
    n = zs.shape[0]
    m = diag.shape[0]
    out = np.zeros((n, m, m), dtype=np.complex128)
    idx = np.arange(m)
    out[:, idx, idx] = diag
    if poles.shape[0]:
        w = sign / (zs[:, None] - poles[None, :])
        out += np.einsum("nk,ki,kj->nij", w, cols, rows)
    return out


def eval_factor_product_numpy(diag, poles, ps, qs, zs):
    """diag(diag) @ prod_i (I + outer(ps[i], qs[i]) / (z - poles[i])) for z in zs."""
    n = zs.shape[0]
    m = diag.shape[0]
    out = np.zeros((n, m, m), dtype=np.complex128)
    idx = np.arange(m)
    out[:, idx, idx] = diag
    for i in range(poles.shape[0]):
        xp = out @ ps[i]
        out = out + np.einsum("ni,j->nij", xp / (zs - poles[i])[:, None], qs[i])
    return out


def dpv_recurrence_numpy(rho1, rho2, z1, z2, zeta1, zeta2, k1, k2, mu, gamma, pi):
    """Vectorised one-step dPV update; returns (mu_t, gamma_t, pi_printed, pi_swapped)."""
    mu_t = mu * rho1 * (pi - rho2) / (rho2 * (pi - rho1))
    gamma_t = (z2 + zeta2
               + rho1 * (k1 - z1 + zeta2) / (pi - rho1)
               + rho2 * (k2 - z1 + zeta2 + 1.0) / (pi - rho2)
               - gamma)
    z1_t = z1 - 1.0
    zeta1_t = zeta1 - 1.0
    ratio = (gamma_t - z2) * (gamma_t - zeta2) / ((gamma_t - z1_t) * (gamma_t - zeta1_t))
    pi_printed = rho1 * rho2 * ratio / pi
    pi_swapped = rho1 * rho2 / (ratio * pi)
    return mu_t, gamma_t, pi_printed, pi_swapped


# ---------------------------------------------------------------------------
# loop implementations (numba targets)
# ---------------------------------------------------------------------------

def eval_additive_loops(diag, poles, cols, rows, zs, sign):
    n = zs.shape[0]
    m = diag.shape[0]
    k = poles.shape[0]
    out = np.zeros((n, m, m), dtype=np.complex128)
    for t in range(n):
        z = zs[t]
        for i in range(m):
            out[t, i, i] = diag[i]
        for s in range(k):
            w = sign / (z - poles[s])
            for i in range(m):
                ci = w * cols[s, i]
                for j in range(m):
                    out[t, i, j] += ci * rows[s, j]
    return out


def eval_factor_product_loops(diag, poles, ps, qs, zs):
    n = zs.shape[0]
    m = diag.shape[0]
    k = poles.shape[0]
    out = np.zeros((n, m, m), dtype=np.complex128)
    xp = np.empty(m, dtype=np.complex128)
    for t in range(n):
        z = zs[t]
        for i in range(m):
            out[t, i, i] = diag[i]
        for s in range(k):
            w = 1.0 / (z - poles[s])
            for i in range(m):
                acc = 0j
                for j in range(m):
                    acc += out[t, i, j] * ps[s, j]
                xp[i] = acc * w
            for i in range(m):
                for j in range(m):
                    out[t, i, j] += xp[i] * qs[s, j]
    return out


def dpv_recurrence_loops(rho1, rho2, z1, z2, zeta1, zeta2, k1, k2, mu, gamma, pi):
    n = gamma.shape[0]
    mu_t = np.empty(n, dtype=np.complex128)
    gamma_t = np.empty(n, dtype=np.complex128)
    pi_printed = np.empty(n, dtype=np.complex128)
    pi_swapped = np.empty(n, dtype=np.complex128)
    for t in range(n):
        p = pi[t]
        r1 = rho1[t]
        r2 = rho2[t]
        mu_t[t] = mu[t] * r1 * (p - r2) / (r2 * (p - r1))
        g = (z2[t] + zeta2[t]
             + r1 * (k1[t] - z1[t] + zeta2[t]) / (p - r1)
             + r2 * (k2[t] - z1[t] + zeta2[t] + 1.0) / (p - r2)
             - gamma[t])
        gamma_t[t] = g
        ratio = (g - z2[t]) * (g - zeta2[t]) / ((g - z1[t] + 1.0) * (g - zeta1[t] + 1.0))
        pi_printed[t] = r1 * r2 * ratio / p
        pi_swapped[t] = r1 * r2 / (ratio * p)
    return mu_t, gamma_t, pi_printed, pi_swapped


if HAS_NUMBA:
    eval_additive_numba = njit(cache=True)(eval_additive_loops)
    eval_factor_product_numba = njit(cache=True)(eval_factor_product_loops)
    dpv_recurrence_numba = njit(cache=True)(dpv_recurrence_loops)
else:  # pragma: no cover
    eval_additive_numba = eval_additive_loops
    eval_factor_product_numba = eval_factor_product_loops
    dpv_recurrence_numba = dpv_recurrence_loops


if BACKEND == "numba":
    _eval_additive = eval_additive_numba
    _eval_factor_product = eval_factor_product_numba
    _dpv_recurrence = dpv_recurrence_numba
else:
    _eval_additive = eval_additive_numpy
    _eval_factor_product = eval_factor_product_numpy
    _dpv_recurrence = dpv_recurrence_numpy


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def eval_additive(diag, poles, cols, rows, zs, sign=1.0):
    m = len(diag)
    cols = _c(cols).reshape(-1, m)
    rows = _c(rows).reshape(-1, m)
    return _eval_additive(_c(diag), _c(poles).reshape(-1), cols, rows,
                          _c(zs).reshape(-1), complex(sign))


def eval_factor_product(diag, poles, ps, qs, zs):
    m = len(diag)
    return _eval_factor_product(_c(diag), _c(poles).reshape(-1), _c(ps).reshape(-1, m),
                                _c(qs).reshape(-1, m), _c(zs).reshape(-1))


def dpv_recurrence(rho1, rho2, z1, z2, zeta1, zeta2, k1, k2, mu, gamma, pi):
    args = np.broadcast_arrays(*(_c(np.atleast_1d(a)) for a in
                                 (rho1, rho2, z1, z2, zeta1, zeta2, k1, k2, mu, gamma, pi)))
    return _dpv_recurrence(*(np.ascontiguousarray(a) for a in args))
