"""``ratmat`` command line: build, factorize, flow, verify.

Exit status: 0 on success, 1 on invalid input or a failing invariant, 2 when
an iterated map leaves the generic stratum (the step index is reported).
Errors are written to stderr as a JSON object.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import dpv, refactorization as rf, spectral
from .errors import GenericityHalt, RatmatError
from .factorization import full_factorization
from .rational_matrix import construct
from .serialize import decode_scalar, decode_vector, dumps, encode, fmt, fmt_real, write_csv
from .verify import check_instance, notes_json, passed, run_random

log = logging.getLogger("ratmat")

SPECTRAL_KEYS = ("rho", "z", "zeta", "k", "mu", "gamma", "pi")


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# input
# ---------------------------------------------------------------------------

def _scalar(x):
    if isinstance(x, list) and len(x) == 1:
        x = x[0]
    return decode_scalar(x)


def _pair(x, name):
    v = decode_vector(x)
    if v.shape != (2,):
        raise InputError(f"'{name}' must hold two entries")
    return v


def _residue(r):
    if isinstance(r, dict):
        return decode_vector(r["column"]), decode_vector(r["row"])
    return np.array([decode_vector(row) for row in r])


def spectral_from_json(data):
    rho, z, zeta, k = (_pair(data[n], n) for n in ("rho", "z", "zeta", "k"))
    T = spectral.SpectralType(rho1=rho[0], rho2=rho[1], zeta1=zeta[0], zeta2=zeta[1],
                              z1=z[0], z2=z[1], k1=k[0], k2=k[1], mu=_scalar(data["mu"]))
    return T, spectral.SpectralPoint(_scalar(data["gamma"]), _scalar(data["pi"]))


def instance_from_json(data):
    """``L`` from residue form (``L0``, ``poles``, ``residues``) or spectral form."""
    if not isinstance(data, dict):
        raise InputError("input must be a JSON object")
    if "residue" in data:
        data = data["residue"]
    if all(key in data for key in SPECTRAL_KEYS):
        return spectral.from_spectral(*spectral_from_json(data))
    missing = [key for key in ("L0", "poles", "residues") if key not in data]
    if missing:
        raise InputError(f"missing keys {missing}; give L0/poles/residues or {list(SPECTRAL_KEYS)}")
    zeros = decode_vector(data["zeros"]) if data.get("zeros") is not None else None
    return construct(decode_vector(data["L0"]), decode_vector(data["poles"]),
                     [_residue(r) for r in data["residues"]], zeros=zeros)


def pairing_from_json(data):
    if not isinstance(data, dict) or data.get("pairing") is None:
        return None
    return [(decode_scalar(a), decode_scalar(b)) for a, b in data["pairing"]]


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def canonical(L):
    inv = L.inverse
    out = {"residue": L.to_json(), "inverse": inv.to_json(),
           "divisor": {"poles": encode(L.poles), "zeros": encode(L.zeros)}}
    if L.m == 2 and L.k == 2:
        try:
            T, P = spectral.extract_spectral(L)
            out["type"] = T.to_json()
            out["spectral"] = P.to_json()
        except RatmatError as exc:
            out["spectral_unavailable"] = f"{type(exc).__name__}: {exc}"
    return out


def cmd_build(args):
    L = instance_from_json(_load(args.input))
    _write(dumps(canonical(L)), args.output)
    return 0


def cmd_factorize(args):
    data = _load(args.input)
    L = instance_from_json(data)
    pairing = pairing_from_json(data)
    if args.pairing:
        pairing = [(decode_scalar(a), decode_scalar(b)) for a, b in json.loads(args.pairing)]
    _write(dumps(full_factorization(L, pairing).to_json()), args.output)
    return 0


def _dpv_rows(reports, S0):
    rows = [_dpv_row(S0, 0.0, "")]
    for rep in reports:
        rows.append(_dpv_row(rep.recurrence_result, rep.max_discrepancy, rep.form_used))
    return rows


def _dpv_row(S, disc, form):
    T, P = S.T, S.P
    return [S.step, fmt(T.z1), fmt(T.zeta1), fmt_real(P.gamma.real), fmt_real(P.gamma.imag),
            fmt_real(P.pi.real), fmt_real(P.pi.imag), fmt_real(T.mu.real), fmt_real(T.mu.imag),
            fmt_real(disc), form]


DPV_HEADER = ["step", "z1", "zeta1", "gamma_re", "gamma_im", "pi_re", "pi_im", "mu_re", "mu_im",
              "oracle_discrepancy", "form_used"]


def _refactor_rows(Ls):
    m = Ls[0].m
    header = ["step", "z1", "zeta1"]
    for name in ("a2", "b1"):
        for i in range(m):
            header += [f"{name}_{i}_re", f"{name}_{i}_im"]
    norm_a, norm_b = rf.ProjectiveNormalizer(), rf.ProjectiveNormalizer()
    rows = []
    for t, L in enumerate(Ls):
        a2 = norm_a(L.residues[1].column)
        b1 = norm_b(L.residues[0].row)
        row = [t, fmt(L.poles[0]), fmt(L.zeros[0])]
        for v in (a2, b1):
            for x in v:
                row += [fmt_real(x.real), fmt_real(x.imag)]
        rows.append(row)
    return header, rows


def cmd_flow(args):
    if args.steps < 1:
        raise InputError("--steps must be at least 1")
    data = _load(args.input)
    L = instance_from_json(data)
    if args.mode == "dpv":
        spec = data.get("residue", data) if isinstance(data, dict) else data
        if all(key in spec for key in SPECTRAL_KEYS):
            S0 = dpv.DpvState(*spectral_from_json(spec))  # exact input, not a re-extraction
        else:
            S0 = dpv.state_of(L)
        try:
            reports = dpv.trajectory(S0, args.steps, args.form)
        except GenericityHalt as exc:
            _write(write_csv(DPV_HEADER, _dpv_rows(exc.reports, S0)), args.output)
            raise
        _write(write_csv(DPV_HEADER, _dpv_rows(reports, S0)), args.output)
        return 0
    Ls = [L]
    try:
        for i in range(args.steps):
            Ls.append(rf.step(Ls[-1], args.mode))
    except GenericityHalt as exc:
        exc.step = i + 1
        _write(write_csv(*_refactor_rows(Ls)), args.output)
        raise
    _write(write_csv(*_refactor_rows(Ls)), args.output)
    return 0


def cmd_verify(args):
    if args.random is not None:
        if args.random < 1:
            raise InputError("--random must be at least 1")
        col = run_random(args.random, args.seed, args.workers, args.eta_form)
    else:
        L = instance_from_json(_load(args.input))
        col = check_instance(L, np.random.default_rng(args.seed), args.eta_form,
                             dpv_steps=args.steps)
    rows = col.report()
    for key, vals in notes_json(col).items():
        log.info("%s: %s", key, ", ".join(vals))
    _write(json.dumps(rows, indent=2) + "\n", args.output)
    return 0 if passed(rows) else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="ratmat", description="Rational matrix functions with simple poles.")
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("input", help="instance JSON (residue or spectral form)")
        sp.add_argument("-o", "--output", default=None, help="output path (default stdout)")

    b = sub.add_parser("build", parents=[shared], help="validate an instance and print its canonical JSON")
    common(b)
    b.set_defaults(func=cmd_build)

    f = sub.add_parser("factorize", parents=[shared], help="factor into elementary divisors")
    common(f)
    f.add_argument("--pairing", help='JSON list of [zeta, pole] pairs, e.g. "[[2,0],[3,1]]"')
    f.set_defaults(func=cmd_factorize)

    fl = sub.add_parser("flow", parents=[shared], help="iterate a refactorization map and write a CSV trajectory")
    common(fl)
    fl.add_argument("--mode", choices=("isospectral", "isomonodromic", "dpv"), default="dpv")
    fl.add_argument("--steps", type=int, default=1)
    fl.add_argument("--form", choices=dpv.FORMS, default="oracle_arbitrated",
                    help="pi update used in dpv mode")
    fl.set_defaults(func=cmd_flow)

    v = sub.add_parser("verify", parents=[shared], help="run the invariant suite")
    v.add_argument("input", nargs="?", help="instance JSON; omit with --random")
    v.add_argument("-o", "--output", default=None)
    v.add_argument("--random", type=int, default=None, metavar="N", help="check N generated instances")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--steps", type=int, default=1, help="dpv steps checked on an input instance")
    v.add_argument("--eta-form", choices=("auto",) + rf.ETA_FORMS, default="auto")
    v.set_defaults(func=cmd_verify)
    return p


def _error(exc, code, **extra):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code, **extra}
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command == "verify" and args.random is None and args.input is None:
        parser.error("verify needs an input file or --random N")
    try:
        return args.func(args)
    except GenericityHalt as exc:
        return _error(exc, 2, step=exc.step)
    except (RatmatError, InputError, KeyError, TypeError, ValueError) as exc:
        extra = {"stage": exc.stage} if getattr(exc, "stage", None) is not None else {}
        return _error(exc, 1, **extra)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
