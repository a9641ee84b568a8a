"""CSV and JSON files for driving terms, curves and traces.

Numbers are written with 17 significant digits so a round trip through a
file is exact.  CSV files may start with one header row.
"""

import csv
import json
import math

import numpy as np

from .core import DrivingTerm, Trace
from .errors import FormatError, LoewnerError
from .inverse import CurveSamples

__all__ = ["read_table", "write_table", "read_driving", "write_driving", "read_curve",
           "write_curve", "read_trace", "write_trace", "read_json", "write_json", "fmt"]

DRIVING_HEADER = ("t", "lambda")
CURVE_HEADER = ("re", "im")
TRACE_HEADER = ("t", "re", "im")


def fmt(x):
    """Shortest text that reads back to the same float (at most 17 significant digits).

    >>> fmt(0.1), fmt(2.0), fmt(1 / 3)
    ('0.1', '2', '0.3333333333333333')
    """
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def read_table(path, ncols):
    """Rows of ``ncols`` floats; an optional first header row is skipped."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                if not rows and lineno == 1:
                    continue
                raise FormatError(f"non-numeric field in {row!r}", lineno) from None
            if len(vals) != ncols:
                raise FormatError(f"expected {ncols} columns, found {len(vals)}", lineno)
            if not all(math.isfinite(v) for v in vals):
                raise FormatError("non-finite value", lineno)
            rows.append(vals)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def write_table(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(v) for v in row])


def _wrap(func, path):
    try:
        return func()
    except FormatError:
        raise
    except LoewnerError as exc:
        raise FormatError(f"{path}: {exc}") from None


def read_driving(path):
    a = read_table(path, 2)
    return _wrap(lambda: DrivingTerm(a[:, 0], a[:, 1]), path)


def write_driving(path, lam):
    write_table(path, DRIVING_HEADER, [lam.t, lam.values])


def read_curve(path):
    a = read_table(path, 2)
    return _wrap(lambda: CurveSamples(a[:, 0] + 1j * a[:, 1]), path)


def write_curve(path, points):
    z = points.points if isinstance(points, CurveSamples) else np.asarray(points)
    write_table(path, CURVE_HEADER, [z.real, z.imag])


def read_trace(path):
    a = read_table(path, 3)
    return _wrap(lambda: Trace(a[:, 0], a[:, 1] + 1j * a[:, 2]), path)


def write_trace(path, trace):
    write_table(path, TRACE_HEADER, [trace.t, trace.z.real, trace.z.imag])


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_plain(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
