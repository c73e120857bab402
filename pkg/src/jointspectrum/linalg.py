"""Cartan/Jordan projections, exterior powers and proximality for SL(d,R).

The Cartan projection kappa(g) is the vector of logarithms of singular
values of g, sorted decreasingly; the Jordan projection lambda(g) uses
eigenvalue moduli instead.  Both live in the closed Weyl chamber

    a+ = { x in R^d : sum x_i = 0, x_1 >= ... >= x_d },

and both are invariant under scaling g by a nonzero scalar, which is what
makes the overflow-safe product bookkeeping in the rest of the library
possible: projections of a renormalized product equal projections of the
true product exactly.

Proximality follows the (r, eps) convention: a matrix is (r, eps)-proximal
when its top eigenvalue modulus is simple (relative gap tolerance
``EIGEN_GAP_TOL``), the ratio of its second to first singular value is at
most eps, and the top eigenline stays at sine-distance at least r from the
invariant complement spanned by the remaining generalized eigenspaces.
Loxodromic means (r, eps)-proximal in every exterior power k = 1..d-1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BadIndex, NumericalFailure, SingularInput
from .validation import check_square_matrix

# Relative gap under which the two largest eigenvalue moduli count as tied.
EIGEN_GAP_TOL = 1e-8


def _freeze(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class UnimodularMatrix:
    """An element of SL(d,R) stored as ``entries`` plus a factored-out scalar.

    The represented group element is ``exp(log_scale/d) * entries``.  Two
    provenances occur:

    * ``normalize_det`` output: |det entries| = 1 and ``log_scale`` holds
      d*log of the scalar removed from the raw input;
    * long products: entries are kept at unit max-norm to avoid overflow, so
      |det entries| drifts to exp(-log_scale) while the represented product
      stays in SL(d,R).

    Every projection in this module reads ``entries`` only — the scalar
    cancels — so the two provenances are interchangeable downstream.
    """

    dim: int
    entries: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        A = check_square_matrix(self.entries, name="entries")
        if A.shape[0] != self.dim:
            raise SingularInput(f"dim {self.dim} does not match entries {A.shape}")
        if not math.isfinite(self.log_scale):
            raise SingularInput("log_scale must be finite")
        object.__setattr__(self, "entries", _freeze(A))

    @property
    def det_sign(self) -> int:
        """Sign of det(entries); negative determinants are legal (PGL convention)."""
        return int(np.sign(np.linalg.det(self.entries)))


@dataclass(frozen=True)
class ChamberVector:
    """A point of the closed Weyl chamber a+ (log units).

    coords sum to zero (tol 1e-9) and are weakly decreasing (slack 1e-12).
    """

    coords: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.coords, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise SingularInput(f"chamber vector must be a d-vector, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NumericalFailure("chamber vector has non-finite coordinates")
        if abs(v.sum()) > 1e-9:
            raise NumericalFailure(f"chamber coordinates must sum to 0, got {v.sum()!r}")
        if np.any(np.diff(v) > 1e-12):
            raise NumericalFailure("chamber coordinates must be weakly decreasing")
        object.__setattr__(self, "coords", _freeze(v))

    @property
    def dim(self) -> int:
        return self.coords.size

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)

    def __len__(self) -> int:
        return self.coords.size


def chamber_vector(values) -> ChamberVector:
    """Build a ChamberVector from raw logs: sort decreasingly and recenter.

    Sorting repairs the sub-1e-12 order inversions that floating point
    produces at ties; recentering removes the O(eps) sum drift.
    """
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    return ChamberVector(v - v.mean())


def normalize_det(M) -> UnimodularMatrix:
    """Scale an invertible matrix into SL(d,R), logging the removed scalar.

    Parameters
    ----------
    M : array-like, shape (d, d)
        Any invertible real matrix.

    Returns
    -------
    UnimodularMatrix
        entries = M / s with s = |det M|^(1/d), log_scale = log|det M|
        (= d log s).  Negative determinants are kept as-is and flagged via
        ``det_sign``; projections only ever see absolute values.

    Raises
    ------
    SingularInput
        If |det M| underflows (< 1e-300) or entries are non-finite.
    """
    A = check_square_matrix(M)
    d = A.shape[0]
    sign, logabsdet = np.linalg.slogdet(A)
    if sign == 0 or not np.isfinite(logabsdet) or logabsdet < math.log(1e-300):
        raise SingularInput("matrix is singular or |det| underflows")
    E = A * math.exp(-logabsdet / d)
    return UnimodularMatrix(dim=d, entries=E, log_scale=float(logabsdet))


def _entries(g) -> np.ndarray:
    if isinstance(g, UnimodularMatrix):
        return g.entries
    return check_square_matrix(g)


def cartan_projection(g) -> ChamberVector:
    """Cartan projection kappa(g): sorted logs of singular values, centered.

    Centering (subtracting the mean log) removes any scalar factor carried
    by the stored entries, so the result is exact for renormalized products.

    Raises
    ------
    NumericalFailure
        If the SVD does not converge or a singular value underflows to 0.
    """
    A = _entries(g)
    try:
        sv = np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK hiccup
        raise NumericalFailure(f"SVD failed: {exc}") from exc
    if sv[-1] <= 0.0:
        raise NumericalFailure("singular value underflowed to zero")
    return chamber_vector(np.log(sv))


def jordan_projection(g) -> ChamberVector:
    """Jordan projection lambda(g): sorted logs of eigenvalue moduli, centered."""
    A = _entries(g)
    try:
        mu = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailure(f"eigenvalue routine failed: {exc}") from exc
    mod = np.abs(mu)
    if np.any(mod <= 0.0):
        raise NumericalFailure("eigenvalue modulus underflowed to zero")
    return chamber_vector(np.log(mod))


def exterior_power(g, k: int) -> np.ndarray:
    """k-th exterior power (compound matrix) of g.

    Entry (I, J) is the k x k minor of g on row set I and column set J,
    index sets in lexicographic order, so the result is the matrix of
    wedge_k(g) in the canonical basis of wedge^k R^d.  Returns a plain
    ndarray of size C(d,k); the caller owns any scale bookkeeping.
    """
    A = _entries(g)
    d = A.shape[0]
    if not 1 <= k <= d:
        raise BadIndex(f"k must lie in 1..{d}, got {k}")
    if k == 1:
        return np.array(A)
    subsets = list(itertools.combinations(range(d), k))
    D = len(subsets)
    blocks = np.empty((D, D, k, k))
    for i, rows in enumerate(subsets):
        for j, cols in enumerate(subsets):
            blocks[i, j] = A[np.ix_(rows, cols)]
    return np.linalg.det(blocks)


@dataclass(frozen=True)
class RepProximality:
    """Proximality numbers of one exterior power wedge^k(g)."""

    k: int
    sv_ratio: float
    eigen_gap: float
    top_evec_distance: float
    eps_proximal: bool
    r_eps_proximal: bool
    degenerate: bool


@dataclass(frozen=True)
class ProximalityReport:
    """(r, eps)-proximality of g in every fundamental representation."""

    per_rep: tuple
    loxodromic: bool
    r: float
    eps: float


def _top_split_distance(C: np.ndarray, cutoff: float) -> float:
    """Sine distance between the top eigenline of C and its invariant complement.

    Two sorted real Schur forms: one with the (simple, real) top eigenvalue
    leading — its first Schur vector is the top eigenvector — and one with
    the remaining spectrum leading, whose last Schur vector is the unit
    normal of the invariant complement.  |<v, normal>| is the sine of the
    principal angle between the eigenline and the complement hyperplane.
    """
    D = C.shape[0]
    if D == 1:
        return 1.0

    def top_first(re, im):
        return np.hypot(re, im) >= cutoff

    def top_last(re, im):
        return np.hypot(re, im) < cutoff

    try:
        _, Z1, sdim1 = scipy.linalg.schur(C, output="real", sort=top_first)
        _, Z2, sdim2 = scipy.linalg.schur(C, output="real", sort=top_last)
    except (scipy.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover
        raise NumericalFailure(f"Schur reordering failed: {exc}") from exc
    if sdim1 != 1 or sdim2 != D - 1:
        raise NumericalFailure(
            f"Schur split selected {sdim1}/{sdim2} eigenvalues; expected 1/{D - 1}"
        )
    v = Z1[:, 0]
    normal = Z2[:, -1]
    return float(min(1.0, abs(np.dot(v, normal))))


def _rep_stats(C: np.ndarray, r: float, eps: float, k: int) -> RepProximality:
    try:
        sv = np.linalg.svd(C, compute_uv=False)
        mod = np.sort(np.abs(np.linalg.eigvals(C)))[::-1]
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailure(f"proximality stats failed: {exc}") from exc
    sv_ratio = float(sv[1] / sv[0]) if C.shape[0] > 1 else 0.0
    eigen_gap = float(mod[1] / mod[0]) if C.shape[0] > 1 else 0.0
    degenerate = eigen_gap > 1.0 - EIGEN_GAP_TOL
    if degenerate:
        # tied top moduli: not proximal, the split distance is undefined
        dist = 0.0
    else:
        dist = _top_split_distance(C, cutoff=(mod[0] + mod[1]) / 2.0)
    eps_ok = (not degenerate) and sv_ratio <= eps
    return RepProximality(
        k=k,
        sv_ratio=sv_ratio,
        eigen_gap=eigen_gap,
        top_evec_distance=dist,
        eps_proximal=eps_ok,
        r_eps_proximal=eps_ok and dist >= r,
        degenerate=degenerate,
    )


def proximality_report(g, r: float, eps: float) -> ProximalityReport:
    """Classify g as (r, eps)-proximal/loxodromic across all exterior powers.

    Parameters
    ----------
    g : UnimodularMatrix or array-like
    r : float in (0, 1]
        Minimum sine distance between the top eigenline and the invariant
        complement.
    eps : float > 0
        Maximum allowed second-to-first singular value ratio.

    Returns
    -------
    ProximalityReport
        One RepProximality per k = 1..d-1; ``loxodromic`` is their AND.
        A tied top eigenvalue modulus (relative gap below EIGEN_GAP_TOL) is
        reported as degenerate and classified not proximal, never raised.
    """
    if not (0.0 < r <= 1.0) or eps <= 0.0:
        raise BadIndex(f"need 0 < r <= 1 and eps > 0, got r={r}, eps={eps}")
    A = _entries(g)
    d = A.shape[0]
    reps = tuple(_rep_stats(exterior_power(A, k), r, eps, k) for k in range(1, d))
    return ProximalityReport(
        per_rep=reps,
        loxodromic=all(rp.r_eps_proximal for rp in reps),
        r=float(r),
        eps=float(eps),
    )


def is_loxodromic(g, r: float, eps: float) -> bool:
    """Convenience wrapper: (r, eps)-proximal in every wedge^k, k = 1..d-1."""
    return proximality_report(g, r, eps).loxodromic
