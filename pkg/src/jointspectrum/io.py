"""Flat-file formats: matrix-set JSON, result CSV/JSON, run manifests.

All writes go through a temp file in the target directory followed by
os.replace, so a crashed run never leaves a partial artifact under the
final name.  Numeric cells are serialized finite or as the literal
"inf"/"-inf"; a NaN anywhere is a bug and raises instead of being written.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
import time

import numpy as np

from . import __version__
from .enumeration import MatrixSet, matrix_set
from .errors import DimMismatch, NumericalFailure, ParseError, SingularInput
from .geometry import body_from_dict, body_to_dict


def fmt_cell(x):
    """One CSV cell: floats via repr (round-trip exact), never NaN."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isnan(v):
            raise NumericalFailure("refusing to serialize NaN")
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(x)


def sanitize(obj):
    """Recursively make an object JSON-safe under the no-NaN/inf-literal rule."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            raise NumericalFailure("refusing to serialize NaN")
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    raise ParseError(f"cannot serialize object of type {type(obj).__name__}")


def atomic_write_text(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(path: str, obj):
    atomic_write_text(path, json.dumps(sanitize(obj), indent=2, allow_nan=False) + "\n")


def write_csv(path: str, header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_cell(c) for c in row])
    atomic_write_text(path, buf.getvalue())


# ------------------------------------------------------------- matrix sets


def parse_matrix_set(obj: dict) -> MatrixSet:
    """Build a MatrixSet from the {"d", "matrices", "weights"?, "labels"?} schema."""
    if not isinstance(obj, dict):
        raise ParseError("matrix-set file must hold a JSON object")
    for key in ("d", "matrices"):
        if key not in obj:
            raise ParseError(f"missing required field {key!r}")
    d = obj["d"]
    if not isinstance(d, int) or d < 2:
        raise ParseError(f"field 'd': expected an int >= 2, got {d!r}")
    mats = obj["matrices"]
    if not isinstance(mats, list) or not mats:
        raise ParseError("field 'matrices': expected a nonempty list")
    stack = []
    for i, m in enumerate(mats):
        a = np.asarray(m, dtype=float)
        if a.shape != (d, d):
            raise DimMismatch(
                f"matrix {i}: expected shape ({d}, {d}), got {a.shape}"
            )
        if not np.all(np.isfinite(a)):
            raise ParseError(f"matrix {i}: non-finite entries")
        stack.append(a)
    weights = obj.get("weights")
    labels = obj.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != len(stack):
            raise ParseError("field 'labels': expected one string per matrix")
        labels = tuple(str(s) for s in labels)
    if weights is not None:
        if not isinstance(weights, list) or len(weights) != len(stack):
            raise ParseError("field 'weights': expected one float per matrix")
    try:
        return matrix_set(stack, weights=weights, labels=labels)
    except SingularInput as exc:
        # re-run matrix by matrix so the message carries the index
        for i, a in enumerate(stack):
            try:
                matrix_set([a])
            except SingularInput:
                raise SingularInput(f"matrix {i}: {exc}") from exc
        raise


def load_matrix_set(path: str) -> MatrixSet:
    """Read and normalize a matrix-set JSON file.

    Raises ParseError (with the JSON line on syntax errors, the field name
    on schema errors), SingularInput with the matrix index, or DimMismatch.
    """
    try:
        with open(path) as f:
            obj = json.load(f)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    return parse_matrix_set(obj)


def matrix_set_to_dict(S: MatrixSet) -> dict:
    out = {"d": S.dim, "matrices": [g.entries.tolist() for g in S.gens]}
    if S.weights is not None:
        out["weights"] = list(S.weights)
    if S.labels is not None:
        out["labels"] = list(S.labels)
    return out


def save_matrix_set(path: str, S: MatrixSet):
    """Serialize normalized entries; load(save(S)) == S to 1e-12 entrywise."""
    dump_json(path, matrix_set_to_dict(S))


# ---------------------------------------------------------------- manifests


def make_manifest(command: str, input_path: str, params: dict, wall_clock_s: float) -> dict:
    """Everything needed to reproduce a run, plus timing/version stamps."""
    return {
        "command": command,
        "input": os.path.abspath(input_path),
        "params": sanitize(params),
        "version": __version__,
        "wall_clock_s": float(wall_clock_s),
        "created_unix": time.time(),
    }


def save_body(path: str, body):
    dump_json(path, body_to_dict(body))


def load_body(path: str):
    with open(path) as f:
        return body_from_dict(json.load(f))
