"""Estimator-style front ends over the computational kernels.

Every class follows the scikit-learn contract: ``__init__`` only stores
hyperparameters (so ``get_params``/``set_params``/``clone`` work), ``fit``
validates inputs and grows trailing-underscore attributes, and the
prediction-flavored methods gate on ``check_is_fitted``.  ``X`` is a stack
of (d, d) matrices — the generating set — or a prebuilt MatrixSet; where a
walk is involved, ``sample_weight`` supplies the step distribution mu.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .enumeration import (
    DEFAULT_BUDGET,
    MatrixSet,
    joint_spectrum_estimate,
    matrix_set,
)
from .errors import EmptyInput
from .geometry import interior_margin, make_directions
from .jsr import jsr_bounds
from .walks import (
    WalkConfig,
    default_thetas,
    ldp_decay_fit,
    legendre_transform,
    log_mgf_estimate,
    lyapunov_estimate,
    rate_function_estimate,
)


def _as_matrix_set(X, sample_weight=None) -> MatrixSet:
    if isinstance(X, MatrixSet):
        if sample_weight is not None:
            return MatrixSet(
                dim=X.dim, gens=X.gens, weights=tuple(sample_weight), labels=X.labels
            )
        return X
    return matrix_set(X, weights=sample_weight)


def default_dirs(d: int) -> int:
    return 64 * (d - 1)


class JointSpectrumEstimator(BaseEstimator):
    """Fit J-hat(S) by product enumeration; predict membership of points.

    Parameters mirror ``joint_spectrum_estimate``; ``dirs=None`` means the
    64(d-1) default.  After ``fit``: ``kappa_body_``, ``lambda_body_``,
    ``levels_`` (all SpectrumEstimates up to n), ``d_kl_``, ``d_step_``,
    ``mode_``.  ``predict(P)`` labels chamber points as inside (1) or
    outside (0) the fitted kappa body; ``decision_function`` returns the
    interior margin (negative outside).
    """

    def __init__(self, n=8, dirs=None, seed=0, budget=DEFAULT_BUDGET, tol=0.0):
        self.n = n
        self.dirs = dirs
        self.seed = seed
        self.budget = budget
        self.tol = tol

    def fit(self, X, y=None):
        S = _as_matrix_set(X)
        m = self.dirs if self.dirs is not None else default_dirs(S.dim)
        dirset = make_directions(S.dim, m, seed=self.seed)
        self.levels_ = joint_spectrum_estimate(
            S, self.n, dirset, budget=self.budget, seed=self.seed
        )
        last = self.levels_[-1]
        self.kappa_body_ = last.kappa_body
        self.lambda_body_ = last.lambda_body
        self.d_kl_ = last.d_kl
        self.d_step_ = last.d_step
        self.mode_ = last.mode
        return self

    def decision_function(self, P):
        check_is_fitted(self)
        return np.array([interior_margin(self.kappa_body_, p) for p in P])

    def predict(self, P):
        return (self.decision_function(P) >= -self.tol).astype(int)


class JointSpectralRadius(BaseEstimator):
    """Branch-and-bound bracket of log r(S).

    After ``fit``: ``lower_``, ``upper_``, ``witness_``, ``explored_``,
    ``history_``; ``interval_`` is (lower_, upper_).
    """

    def __init__(self, depth=10, prune_delta=0.005):
        self.depth = depth
        self.prune_delta = prune_delta

    def fit(self, X, y=None):
        S = _as_matrix_set(X)
        out = jsr_bounds(S.entries_stack(), self.depth, prune_delta=self.prune_delta)
        self.lower_ = out.lower
        self.upper_ = out.upper
        self.witness_ = out.witness
        self.explored_ = out.explored
        self.history_ = out.history
        self.bounds_ = out
        return self

    @property
    def interval_(self):
        check_is_fitted(self, "lower_")
        return (self.lower_, self.upper_)


class LyapunovVectorEstimator(BaseEstimator):
    """Monte Carlo Lyapunov vector of the mu-random walk.

    ``sample_weight`` (in ``fit``) is the step distribution; uniform when
    omitted.  After ``fit``: ``vector_`` (ChamberVector), ``stderr_``.
    """

    def __init__(self, n=100, samples=1000, seed=0, workers=1):
        self.n = n
        self.samples = samples
        self.seed = seed
        self.workers = workers

    def fit(self, X, y=None, sample_weight=None):
        S = _as_matrix_set(X, sample_weight)
        out = lyapunov_estimate(
            WalkConfig(set=S, n=self.n, samples=self.samples, seed=self.seed),
            workers=self.workers,
        )
        self.vector_ = out["vec"]
        self.stderr_ = out["stderr"]
        return self


class RateFunctionEstimator(BaseEstimator):
    """Empirical LDP rate function on a grid; predict i_hat at points.

    ``grid`` is (d-1) axes of (lo, hi, cells); required before ``fit``.
    After ``fit``: ``grid_`` (RateGrid).  ``predict(P)`` reads i_hat at the
    cells containing the points (+inf for off-box or unvisited cells).
    """

    def __init__(
        self, grid=None, n=60, samples=10_000, seed=0, projection="kappa", workers=1
    ):
        self.grid = grid
        self.n = n
        self.samples = samples
        self.seed = seed
        self.projection = projection
        self.workers = workers

    def fit(self, X, y=None, sample_weight=None):
        if self.grid is None:
            raise EmptyInput("RateFunctionEstimator needs a grid before fit")
        S = _as_matrix_set(X, sample_weight)
        cfg = WalkConfig(set=S, n=self.n, samples=self.samples, seed=self.seed)
        self.grid_ = rate_function_estimate(
            cfg, self.grid, projection=self.projection, workers=self.workers
        )
        return self

    def predict(self, P):
        check_is_fitted(self)
        out = np.empty(len(P))
        for i, p in enumerate(P):
            cell = self.grid_.locate(p)
            out[i] = np.inf if cell is None else self.grid_.i_hat[cell]
        return out


class LogMgfEstimator(BaseEstimator):
    """Empirical limiting log-MGF; predict is the Legendre conjugate.

    ``thetas=None`` uses the +-Helmert-ray default grid.  After ``fit``:
    ``estimate_`` (MgfEstimate), ``lambda_hat_``.  ``predict(P)`` returns
    I*(p) — a lower bound of the rate function at each chamber point.
    """

    def __init__(self, n=60, samples=10_000, seed=0, thetas=None, workers=1):
        self.n = n
        self.samples = samples
        self.seed = seed
        self.thetas = thetas
        self.workers = workers

    def fit(self, X, y=None, sample_weight=None):
        S = _as_matrix_set(X, sample_weight)
        thetas = self.thetas if self.thetas is not None else default_thetas(S.dim)
        cfg = WalkConfig(set=S, n=self.n, samples=self.samples, seed=self.seed)
        self.estimate_ = log_mgf_estimate(cfg, thetas, workers=self.workers)
        self.lambda_hat_ = self.estimate_.lambda_hat
        return self

    def predict(self, P):
        check_is_fitted(self)
        return legendre_transform(self.estimate_, P)


class ExceedanceDecay(BaseEstimator):
    """Fit the exponential decay of P(||kappa(Y_n)/n - center|| > eps).

    ``center=None`` estimates the Lyapunov vector first (same walk budget,
    seed offset by 1 so the fit never reuses its own calibration draws).
    After ``fit``: ``slope_``, ``intercept_``, ``points_``, ``dropped_``,
    ``all_zero_``.
    """

    def __init__(
        self,
        eps=0.15,
        n_list=(50, 100, 200, 400),
        center=None,
        samples=10_000,
        seed=0,
        workers=1,
    ):
        self.eps = eps
        self.n_list = n_list
        self.center = center
        self.samples = samples
        self.seed = seed
        self.workers = workers

    def fit(self, X, y=None, sample_weight=None):
        S = _as_matrix_set(X, sample_weight)
        horizon = int(max(self.n_list))
        center = self.center
        if center is None:
            calib = lyapunov_estimate(
                WalkConfig(set=S, n=horizon, samples=self.samples, seed=self.seed + 1),
                workers=self.workers,
            )
            center = calib["vec"]
        cfg = WalkConfig(set=S, n=horizon, samples=self.samples, seed=self.seed)
        out = ldp_decay_fit(
            cfg, self.eps, self.n_list, center, workers=self.workers
        )
        self.center_ = center
        self.slope_ = out["slope"]
        self.intercept_ = out["intercept"]
        self.points_ = out["points"]
        self.dropped_ = out["dropped"]
        self.all_zero_ = out["all_zero"]
        return self
