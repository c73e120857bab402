"""Input validation helpers.

Small checkers in the spirit of ``sklearn.utils.validation``: every public
entry point funnels raw user input (lists, arrays, matrix sets) through these
before doing numerical work, so error messages stay uniform.
"""
from __future__ import annotations

import numpy as np

from .errors import DimMismatch, EmptyInput, ParseError

MAX_DIM = 6  # C(6,3) = 20, the largest compound dimension we ever touch


def check_square_matrix(M, name="matrix"):
    """Return ``M`` as a float ndarray, verifying it is square, finite, d >= 2."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimMismatch(f"{name}: expected a square matrix, got shape {A.shape}")
    d = A.shape[0]
    if d < 2:
        raise DimMismatch(f"{name}: dimension must be >= 2, got {d}")
    if d > MAX_DIM:
        raise DimMismatch(f"{name}: dimension {d} exceeds the supported cap {MAX_DIM}")
    if not np.all(np.isfinite(A)):
        raise ParseError(f"{name}: non-finite entries")
    return A


def check_square_stack(X, name="X"):
    """Return ``X`` as an ndarray of shape (k, d, d) of finite floats.

    Accepts a list of matrices or a 3-d array; this is the common ``X`` of
    the estimator layer (one generator per leading index).
    """
    A = np.asarray(X, dtype=float)
    if A.ndim == 2:
        A = A[None]
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise DimMismatch(f"{name}: expected shape (k, d, d), got {A.shape}")
    if A.shape[0] == 0:
        raise EmptyInput(f"{name}: need at least one matrix")
    check_square_matrix(A[0], name=f"{name}[0]")
    if not np.all(np.isfinite(A)):
        raise ParseError(f"{name}: non-finite entries")
    return A


def check_weights(weights, k, name="weights"):
    """Validate a probability vector of length ``k``; returns an ndarray."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (k,):
        raise ParseError(f"{name}: expected {k} entries, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ParseError(f"{name}: entries must be finite and nonnegative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ParseError(f"{name}: must sum to 1 within 1e-12 (got {w.sum()!r})")
    return w


def check_point(x, d, name="point", tol=1e-6):
    """Coerce ``x`` (ChamberVector or array-like) to a trace-zero d-vector.

    Sum-zero is enforced loosely; ordering is *not* required here because
    grid-cell centers may sit outside the chamber.
    """
    coords = getattr(x, "coords", x)
    v = np.asarray(coords, dtype=float)
    if v.shape != (d,):
        raise DimMismatch(f"{name}: expected a vector of length {d}, got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ParseError(f"{name}: non-finite entries")
    if abs(v.sum()) > tol:
        raise ParseError(f"{name}: coordinates must sum to 0 (got {v.sum()!r})")
    return v


def check_grid_spec(grid, d):
    """Validate a rate-grid spec: (d-1) axes of (lo, hi, cells).

    Returns (lo, hi, cells) arrays over the first d-1 chamber coordinates.
    A single (lo, hi, cells) triple is accepted for d = 2.
    """
    spec = list(grid)
    if len(spec) == 3 and np.isscalar(spec[0]):
        spec = [tuple(spec)]
    if len(spec) != d - 1:
        raise ParseError(f"grid: expected {d - 1} axes for d={d}, got {len(spec)}")
    lo, hi, cells = [], [], []
    for ax, item in enumerate(spec):
        a, b, c = item
        a, b, c = float(a), float(b), int(c)
        if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
            raise ParseError(f"grid axis {ax}: need finite lo < hi, got ({a}, {b})")
        if c < 1:
            raise ParseError(f"grid axis {ax}: need at least one cell")
        lo.append(a)
        hi.append(b)
        cells.append(c)
    return np.array(lo), np.array(hi), tuple(cells)
