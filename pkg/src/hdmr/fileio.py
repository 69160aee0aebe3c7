"""Sample-set CSV files, JSON reports and atomic writes.

A sample-set file starts with one header line

    # d=3,m=20,weighted=1

followed by ``m`` comma-separated rows of ``d`` coordinates, plus a weight
column when ``weighted=1``. Floats are written with 17 significant digits so
a parse/write round trip reproduces the file.
"""

import json
import os
import re
import tempfile

import numpy as np

from .mixture import DiracMixture

__all__ = [
    "SampleSetError",
    "read_sample_set",
    "write_sample_set",
    "format_sample_set",
    "atomic_write_text",
    "write_json",
    "read_json",
]

WEIGHT_RENORM_TOL = 1e-6
NORM_RENORM_TOL = 1e-6

_HEADER = re.compile(r"^#\s*d\s*=\s*(\d+)\s*,\s*m\s*=\s*(\d+)\s*,\s*weighted\s*=\s*([01])\s*$")


class SampleSetError(ValueError):
    """Malformed sample-set file; the message names the offending line."""


def _fmt(x):
    return format(float(x), ".17g")


def format_sample_set(mix, weighted=True):
    lines = [f"# d={mix.d},m={mix.m},weighted={int(bool(weighted))}"]
    P = mix.points
    for j in range(mix.m):
        row = [_fmt(v) for v in P[:, j]]
        if weighted:
            row.append(_fmt(mix.weights[j]))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_sample_set(path, mix, weighted=None):
    """Write ``mix``; ``weighted=None`` writes a weight column unless all weights are equal."""
    if weighted is None:
        weighted = not np.all(mix.weights == mix.weights[0])
    atomic_write_text(path, format_sample_set(mix, weighted))


def read_sample_set(path):
    """Parse a sample-set file. Returns ``(DiracMixture, weighted_flag)``.

    Rows whose norm is within 1e-6 of one are normalized, and weights are
    renormalized when their sum is within 1e-6 of one; anything further off
    is rejected.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SampleSetError(f"{path}: empty file")
    m_head = _HEADER.match(lines[0])
    if not m_head:
        raise SampleSetError(f"{path}:1: expected header '# d=<int>,m=<int>,weighted=<0|1>'")
    d, m, weighted = int(m_head.group(1)), int(m_head.group(2)), m_head.group(3) == "1"
    if d < 2 or m < 1:
        raise SampleSetError(f"{path}:1: need d >= 2 and m >= 1")
    ncol = d + int(weighted)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != ncol:
            raise SampleSetError(f"{path}:{lineno}: expected {ncol} values, found {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise SampleSetError(f"{path}:{lineno}: non-numeric value in {line!r}") from None
        if not all(np.isfinite(vals)):
            raise SampleSetError(f"{path}:{lineno}: non-finite value")
        norm = float(np.linalg.norm(vals[:d]))
        if abs(norm - 1.0) > NORM_RENORM_TOL:
            raise SampleSetError(f"{path}:{lineno}: point has norm {norm:.6g}, not a unit vector")
        if weighted and vals[d] < 0:
            raise SampleSetError(f"{path}:{lineno}: negative weight")
        rows.append(vals)
    if len(rows) != m:
        raise SampleSetError(f"{path}: header announces m={m} rows, found {len(rows)}")
    A = np.array(rows, dtype=float)
    P = A[:, :d].T
    norms = np.linalg.norm(P, axis=0)
    if np.any(np.abs(norms - 1.0) > 0.0):
        P = P / norms
    if weighted:
        w = A[:, d]
        total = w.sum()
        if abs(total - 1.0) > WEIGHT_RENORM_TOL:
            raise SampleSetError(f"{path}: weights sum to {total:.12g}, not 1")
        w = w / total
    else:
        w = np.full(m, 1.0 / m)
    return DiracMixture(P, w), weighted


def atomic_write_text(path, text):
    """Write through a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)
