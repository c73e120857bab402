"""Convex bodies in the trace-zero hyperplane via support functions.

A body is stored as its support-function values h_j = sup_x <x, u_j> over a
fixed, deterministic set of unit directions u_j spanning the hyperplane
{ sum x_i = 0 }.  For convex bodies the Hausdorff distance equals the sup
norm of support-function differences, so no facet enumeration is ever
needed; the price is an outer approximation whose error is controlled by
the direction resolution m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import (
    BadResolution,
    DegenerateBody,
    DirsetMismatch,
    EmptyInput,
    NumericalFailure,
)
from .validation import check_point


def helmert_basis(d: int) -> np.ndarray:
    """Orthonormal basis (rows) of the trace-zero hyperplane of R^d."""
    H = np.zeros((d - 1, d))
    for k in range(1, d):
        H[k - 1, :k] = 1.0
        H[k - 1, k] = -float(k)
        H[k - 1] /= math.sqrt(k * (k + 1.0))
    return H


@dataclass(frozen=True)
class DirectionSet:
    """Deterministic unit directions in the sum-zero hyperplane.

    Negation-closed; regeneration from (dim, resolution, seed) is exact, which
    is what makes serialized bodies reconstructible.
    """

    dim: int
    seed: int
    dirs: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.dirs, dtype=float)
        U = U.copy()
        U.setflags(write=False)
        object.__setattr__(self, "dirs", U)

    @property
    def resolution(self) -> int:
        return self.dirs.shape[0]


def make_directions(d: int, m: int, seed: int = 0) -> DirectionSet:
    """Build a DirectionSet of m unit vectors in the hyperplane.

    d = 2 admits only the pair +-(1,-1)/sqrt(2), which is always returned
    (requesting more is clamped to 2).  For d >= 3 a deterministic
    low-discrepancy sample of the unit sphere of the hyperplane is produced:
    evenly spaced half-circle angles for d = 3, a scrambled-Sobol Gaussian
    map for d >= 4; both get a seeded offset and are symmetrized under
    negation, so m must be even.

    Raises BadResolution if m < 2(d-1) or m is odd.
    """
    if d < 2:
        raise BadResolution(f"need d >= 2, got {d}")
    if m < 2 * (d - 1):
        raise BadResolution(f"need m >= 2(d-1) = {2 * (d - 1)}, got {m}")
    if m % 2 != 0:
        raise BadResolution(f"need even m for a negation-closed set, got {m}")
    if d == 2:
        u = np.array([1.0, -1.0]) / math.sqrt(2.0)
        return DirectionSet(dim=2, seed=seed, dirs=np.stack([u, -u]))

    H = helmert_basis(d)
    half = m // 2
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, d, m])))
    if d == 3:
        # the hyperplane is a plane: evenly spaced angles are optimal
        offset = rng.uniform(0.0, math.pi / half)
        ang = offset + math.pi * np.arange(half) / half
        z = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        nbits = max(1, math.ceil(math.log2(half)))
        sob = qmc.Sobol(d=d - 1, scramble=True, seed=rng)
        pts = sob.random_base2(nbits)[:half]
        z = ndtri(np.clip(pts, 1e-12, 1.0 - 1e-12))
        norms = np.linalg.norm(z, axis=1)
        bad = norms < 1e-9
        z[bad] = np.eye(d - 1)[0]
        norms[bad] = 1.0
        z /= norms[:, None]
    U = z @ H
    return DirectionSet(dim=d, seed=seed, dirs=np.concatenate([U, -U]))


@dataclass(frozen=True)
class SupportBody:
    """Convex body as support values over a DirectionSet, plus witnesses.

    ``points`` retains one extreme witness per direction (deduplicated), so
    h_j = max over witnesses of <x, u_j> holds exactly by construction.
    """

    dirset: DirectionSet
    h: np.ndarray
    points: tuple = None

    def __post_init__(self):
        hv = np.asarray(self.h, dtype=float).copy()
        if hv.shape != (self.dirset.resolution,):
            raise DirsetMismatch(
                f"h has shape {hv.shape}, direction set has {self.dirset.resolution}"
            )
        hv.setflags(write=False)
        object.__setattr__(self, "h", hv)
        if self.points is not None:
            P = tuple(np.asarray(p, dtype=float) for p in self.points)
            object.__setattr__(self, "points", P)

    @property
    def dim(self) -> int:
        return self.dirset.dim


def _check_same_dirset(a: DirectionSet, b: DirectionSet):
    if a is b:
        return
    if a.dim != b.dim or a.resolution != b.resolution or a.seed != b.seed:
        raise DirsetMismatch(
            f"direction sets differ: (d={a.dim}, m={a.resolution}, seed={a.seed})"
            f" vs (d={b.dim}, m={b.resolution}, seed={b.seed})"
        )
    if not np.array_equal(a.dirs, b.dirs):
        raise DirsetMismatch("direction sets share parameters but not vectors")


def body_from_points(pts, dirset: DirectionSet) -> SupportBody:
    """Hull of a point cloud, as support values with per-direction witnesses."""
    rows = [check_point(p, dirset.dim) for p in pts]
    if not rows:
        raise EmptyInput("no points given")
    X = np.asarray(rows)
    vals = X @ dirset.dirs.T  # (npts, m)
    arg = np.argmax(vals, axis=0)
    h = vals[arg, np.arange(dirset.resolution)]
    witnesses = tuple(X[i] for i in sorted(set(arg.tolist())))
    return SupportBody(dirset=dirset, h=h, points=witnesses)


def hausdorff_distance(A: SupportBody, B: SupportBody) -> float:
    """sup-norm of support-function differences.

    Equals the true Hausdorff distance between the outer bodies; for the
    underlying convex hulls it is exact up to a discretization error that is
    monotone non-increasing in the direction resolution m.
    """
    _check_same_dirset(A.dirset, B.dirset)
    return float(np.max(np.abs(A.h - B.h)))


def contains(B: SupportBody, x, tol: float = 0.0) -> bool:
    """Outer membership test: <x, u_j> <= h_j + tol for every direction."""
    v = check_point(x, B.dim)
    return bool(np.all(B.dirset.dirs @ v <= B.h + tol))


def interior_margin(B: SupportBody, x) -> float:
    """min_j (h_j - <x, u_j>), in support-function (h) units.

    Strictly positive margin certifies x interior to the outer body; since
    the outer body only over-approximates the hull by the discretization
    error, a margin exceeding that error certifies interiority in the hull.
    """
    v = check_point(x, B.dim)
    return float(np.min(B.h - B.dirset.dirs @ v))


def merge_bodies(A: SupportBody, B: SupportBody) -> SupportBody:
    """Hull of the union: elementwise max of h, witnesses re-selected.

    Associative and commutative, so chunked accumulation of point clouds is
    deterministic regardless of the merge order.
    """
    _check_same_dirset(A.dirset, B.dirset)
    pts = list(A.points or ()) + list(B.points or ())
    if pts:
        return body_from_points(pts, A.dirset)
    return SupportBody(dirset=A.dirset, h=np.maximum(A.h, B.h), points=None)


def asymptotic_cone(B: SupportBody) -> SupportBody:
    """Trace of the cone over B on the unit sphere.

    Witnesses are radially normalized (near-origin ones dropped), and the
    hull of the normalized set is returned over the same direction set.  Two
    bodies spanning the same cone map to the same output up to
    discretization error; scaling a body leaves the output unchanged
    exactly.
    """
    if B.points is None:
        raise EmptyInput("asymptotic_cone needs retained witnesses")
    kept = []
    for p in B.points:
        norm = float(np.linalg.norm(p))
        if norm > 1e-12:
            kept.append(p / norm)
    if not kept:
        raise DegenerateBody("all witnesses lie at the origin")
    return body_from_points(kept, B.dirset)


def body_to_dict(B: SupportBody) -> dict:
    """JSON-ready form: {"d", "m", "seed", "h", "witnesses"}."""
    return {
        "d": B.dim,
        "m": B.dirset.resolution,
        "seed": B.dirset.seed,
        "h": [float(v) for v in B.h],
        "witnesses": [[float(c) for c in p] for p in (B.points or ())],
    }


def body_from_dict(obj: dict) -> SupportBody:
    """Rebuild a body; the direction set is regenerated from (d, m, seed)."""
    try:
        dirset = make_directions(int(obj["d"]), int(obj["m"]), int(obj["seed"]))
        h = np.asarray(obj["h"], dtype=float)
        wit = tuple(np.asarray(p, dtype=float) for p in obj.get("witnesses", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise NumericalFailure(f"malformed body dict: {exc}") from exc
    return SupportBody(dirset=dirset, h=h, points=wit or None)
