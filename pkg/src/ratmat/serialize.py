"""JSON and CSV encoding.  Complex numbers travel as ``[re, im]`` pairs."""

import csv
import io
import json

import numpy as np


def encode(x):
    """Recursively turn complex scalars/arrays into nested ``[re, im]`` lists."""
    if isinstance(x, np.ndarray):
        return [encode(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (float, int, np.floating, np.integer)) and not isinstance(x, bool):
        return [float(x), 0.0]
    return x


def decode_scalar(x):
    """A bare number or an ``[re, im]`` pair."""
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if (isinstance(x, (list, tuple)) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        return complex(x[0], x[1])
    raise ValueError(f"cannot decode {x!r} as a complex number")


def decode_vector(x):
    """A list whose entries are bare numbers or ``[re, im]`` pairs."""
    if not isinstance(x, (list, tuple)):
        raise ValueError(f"expected a list, got {x!r}")
    return np.array([decode_scalar(v) for v in x], dtype=np.complex128)


def decode_matrix(x):
    if not isinstance(x, (list, tuple)):
        raise ValueError(f"expected a list of rows, got {x!r}")
    return np.array([decode_vector(r) for r in x], dtype=np.complex128)


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def fmt(x):
    """17 significant digits: a lossless round trip for doubles."""
    x = complex(x) + 0.0  # drops negative zeros
    if x.imag == 0:
        return f"{x.real:.17g}"
    return f"{x.real:.17g}{x.imag:+.17g}j"


def fmt_real(x):
    return f"{float(x) + 0.0:.17g}"


def write_csv(header, rows, stream=None):
    out = stream if stream is not None else io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if stream is None:
        return out.getvalue()
    return None
