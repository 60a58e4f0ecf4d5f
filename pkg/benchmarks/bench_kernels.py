"""Compare the compiled-loop and vectorised-numpy kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both implementations are called directly, so the ``RATMAT_BACKEND`` setting
does not matter here.  Compilation time is excluded by a warm-up call.
"""

import argparse
import json
import time

import numpy as np

from ratmat import _kernels as K


def _cvec(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def cases(rng):
    for m, k, n in ((2, 2, 1_000), (2, 2, 100_000), (4, 4, 20_000), (8, 6, 5_000)):
        diag = _cvec(rng, m)
        poles = _cvec(rng, k)
        a, b = _cvec(rng, k, m), _cvec(rng, k, m)
        zs = _cvec(rng, n) * 5
        yield (f"additive m={m} k={k} n={n}", K.eval_additive_numpy, K.eval_additive_numba,
               (diag, poles, a, b, zs, 1.0 + 0j))
        yield (f"factor_product m={m} k={k} n={n}", K.eval_factor_product_numpy,
               K.eval_factor_product_numba, (diag, poles, a, b, zs))
    for n in (1_000, 100_000, 1_000_000):
        args = tuple(_cvec(rng, n) for _ in range(11))
        yield f"dpv_recurrence n={n}", K.dpv_recurrence_numpy, K.dpv_recurrence_numba, args


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", default=None, help="also write results to this path")
    args = ap.parse_args(argv)

    if not K.HAS_NUMBA:
        print("numba is not importable; only the numpy path can be timed")
    rng = np.random.default_rng(args.seed)
    results = []
    print(f"{'case':40s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s} {'rel diff':>10s}")
    for name, f_np, f_nb, fargs in cases(rng):
        ref = f_np(*fargs)
        got = f_nb(*fargs)  # warm-up and compile
        pairs = zip(ref, got) if isinstance(ref, tuple) else [(ref, got)]
        diff = max(float(np.max(np.abs(r - g) / np.maximum(1.0, np.abs(r)))) for r, g in pairs)
        t_np = best_of(f_np, fargs, args.repeat)
        t_nb = best_of(f_nb, fargs, args.repeat)
        results.append({"case": name, "numpy_s": t_np, "numba_s": t_nb, "rel_diff": diff})
        print(f"{name:40s} {t_np * 1e3:12.3f} {t_nb * 1e3:12.3f} {t_np / t_nb:8.2f} {diff:10.1e}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
