"""Monte Carlo over mu-random walks Y_n = X_n ... X_1.

The engine tracks, for every walker, the running products of all exterior
powers wedge^k(Y), k = 1..d-1, each renormalized by its max-abs entry at
every step with the log accumulated separately.  Cartan partial sums are
then exact at any horizon:

    kappa_1 + ... + kappa_k (Y_m) = log_scale_k + log sigma_1(state_k),

and differencing recovers kappa itself (same for lambda via top eigenvalue
moduli).  Unlike a plain orthonormal-frame/log-diagonal update, this ladder
carries no O(1) bias — it reproduces exact-SVD kappa to machine precision
at every checkpoint, not just asymptotically.

Randomness: every walker owns the stream PCG64(SeedSequence([seed,
walker_id])) and turns uniforms into generator indices through the
cumulative weight table.  Results are therefore bit-identical however the
walkers are chunked or spread over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .enumeration import MatrixSet, _products_from_words
from .errors import DimMismatch, EmptyInput, NumericalFailure
from .geometry import helmert_basis
from .linalg import chamber_vector, exterior_power, proximality_report
from .validation import check_grid_spec, check_point

_CHUNK = 4096  # walkers per engine batch


@dataclass(frozen=True)
class WalkConfig:
    """A mu-random-walk experiment: which set, how long, how many, what seed."""

    set: MatrixSet
    n: int
    samples: int
    seed: int = 0
    checkpoints: tuple = None

    def __post_init__(self):
        if self.n < 1 or self.samples < 1:
            raise EmptyInput(f"need n >= 1 and samples >= 1, got ({self.n}, {self.samples})")
        cps = self.checkpoints if self.checkpoints is not None else (self.n,)
        cps = tuple(int(c) for c in cps)
        if not cps or list(cps) != sorted(set(cps)) or cps[0] < 1 or cps[-1] > self.n:
            raise EmptyInput(f"checkpoints must be sorted distinct ints in 1..{self.n}")
        object.__setattr__(self, "checkpoints", cps)
        self.set.probabilities  # validates weights if present


def _cumulative_weights(S: MatrixSet) -> np.ndarray:
    c = np.cumsum(S.probabilities)
    c[-1] = 1.0
    return c


def _walker_indices(seed: int, walker_id: int, n: int, cumw: np.ndarray) -> np.ndarray:
    """The documented per-walker counter scheme: uniforms through the cdf."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, walker_id])))
    return np.searchsorted(cumw, rng.random(n), side="right")


def _compound_stack(S: MatrixSet):
    """wedge^k of every generator, k = 1..d-1."""
    stacks = []
    for k in range(1, S.dim):
        stacks.append(np.stack([exterior_power(g, k) for g in S.gens]))
    return stacks


def _step_renorm(state: np.ndarray, logs: np.ndarray):
    m = np.max(np.abs(state), axis=(1, 2))
    if np.any(m <= 0.0) or not np.all(np.isfinite(m)):
        raise NumericalFailure("walk state collapsed or overflowed")
    return state / m[:, None, None], logs + np.log(m)


def _partials_to_coords(partials: np.ndarray, m: int) -> np.ndarray:
    """(W, d-1) partial sums P_k of a projection -> normalized (W, d) coords."""
    W, dm1 = partials.shape
    padded = np.zeros((W, dm1 + 2))
    padded[:, 1:-1] = partials  # P_0 = P_d = 0 (unimodular products)
    coords = np.diff(padded, axis=1)
    coords = np.sort(coords, axis=1)[:, ::-1]  # repair sub-ulp tie inversions
    coords -= coords.mean(axis=1, keepdims=True)
    return coords / m


def _walk_chunk(comps, idx: np.ndarray, checkpoints, projection: str) -> np.ndarray:
    """Ladder evaluation of one chunk of walkers; returns (C, W, d)."""
    W, n = idx.shape
    d = comps[0].shape[1]
    states = [np.tile(np.eye(c.shape[1]), (W, 1, 1)) for c in comps]
    logs = [np.zeros(W) for _ in comps]
    cps = set(checkpoints)
    out = np.empty((len(checkpoints), W, d))
    row = 0
    for t in range(n):
        for k in range(len(comps)):
            states[k] = np.matmul(comps[k][idx[:, t]], states[k])
            states[k], logs[k] = _step_renorm(states[k], logs[k])
        m = t + 1
        if m in cps:
            partials = np.empty((W, d - 1))
            for k in range(len(comps)):
                if projection == "kappa":
                    top = np.linalg.svd(states[k], compute_uv=False)[:, 0]
                else:
                    top = np.max(np.abs(np.linalg.eigvals(states[k])), axis=1)
                if np.any(top <= 0.0):
                    raise NumericalFailure(f"zero leading value at step {m}")
                partials[:, k] = logs[k] + np.log(top)
            out[row] = _partials_to_coords(partials, m)
            row += 1
    return out


def sample_projections(
    cfg: WalkConfig,
    projection: str = "kappa",
    checkpoints=None,
    workers: int = 1,
) -> np.ndarray:
    """Normalized projections kappa(Y_m)/m (or lambda) for all walkers.

    Returns an array of shape (len(checkpoints), samples, d).  Walker i
    always consumes its own stream, so the output is independent of the
    chunk size and of ``workers``.
    """
    if projection not in ("kappa", "lambda"):
        raise EmptyInput(f"projection must be 'kappa' or 'lambda', got {projection!r}")
    cps = tuple(checkpoints) if checkpoints is not None else cfg.checkpoints
    cfgd = WalkConfig(set=cfg.set, n=cfg.n, samples=cfg.samples, seed=cfg.seed, checkpoints=cps)
    comps = _compound_stack(cfg.set)
    cumw = _cumulative_weights(cfg.set)
    out = np.empty((len(cfgd.checkpoints), cfg.samples, cfg.set.dim))

    def job(lo: int, hi: int):
        idx = np.stack(
            [_walker_indices(cfg.seed, w, cfg.n, cumw) for w in range(lo, hi)]
        )
        out[:, lo:hi] = _walk_chunk(comps, idx, cfgd.checkpoints, projection)

    spans = [(lo, min(lo + _CHUNK, cfg.samples)) for lo in range(0, cfg.samples, _CHUNK)]
    if workers <= 1 or len(spans) == 1:
        for lo, hi in spans:
            job(lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda s: job(*s), spans))
    return out


def run_walk(cfg: WalkConfig, walker_id: int):
    """One walker's kappa(Y_m)/m at every checkpoint, as ChamberVectors."""
    comps = _compound_stack(cfg.set)
    cumw = _cumulative_weights(cfg.set)
    idx = _walker_indices(cfg.seed, walker_id, cfg.n, cumw)[None, :]
    arr = _walk_chunk(comps, idx, cfg.checkpoints, "kappa")
    return [chamber_vector(arr[c, 0]) for c in range(arr.shape[0])]


def lyapunov_estimate(cfg: WalkConfig, workers: int = 1) -> dict:
    """Mean of kappa(Y_n)/n over walkers: the Lyapunov vector estimate.

    Returns {"vec": ChamberVector, "stderr": per-coordinate standard error}.
    """
    rows = sample_projections(cfg, checkpoints=(cfg.n,), workers=workers)[0]
    vec = rows.mean(axis=0)
    if cfg.samples > 1:
        stderr = rows.std(axis=0, ddof=1) / math.sqrt(cfg.samples)
    else:
        stderr = np.zeros(cfg.set.dim)
    return {"vec": chamber_vector(vec), "stderr": stderr}


# ------------------------------------------------------------------ LDP grid


@dataclass(frozen=True)
class RateGrid:
    """Empirical rate function -(1/n) log(freq) on a box in a+.

    The box lives in the first d-1 chamber coordinates (the last one is
    determined by the zero sum).  Zero-count cells carry i_hat = +inf.
    ``outside`` counts samples that missed the box; the caller promised the
    box contains J-hat(S), so nonzero values flag an undersized box.
    """

    lo: np.ndarray
    hi: np.ndarray
    cells: tuple
    counts: np.ndarray
    i_hat: np.ndarray
    n: int
    samples: int
    projection: str
    outside: int = 0

    def __post_init__(self):
        if int(self.counts.sum()) + self.outside != self.samples:
            raise NumericalFailure("grid counts do not add up to the sample count")

    @property
    def noise_floor(self) -> float:
        """Smallest resolvable rate: (1/n) log(samples)."""
        return math.log(self.samples) / self.n

    @property
    def widths(self) -> np.ndarray:
        return (self.hi - self.lo) / np.array(self.cells, dtype=float)

    @property
    def cell_diagonal(self) -> float:
        """Euclidean diagonal of one cell, lifted to the trace-zero hyperplane."""
        w = self.widths
        return float(math.sqrt(float(np.sum(w**2)) + float(np.sum(w)) ** 2))

    def cell_center(self, index) -> np.ndarray:
        """Full d-coordinate center of a cell (last coordinate from zero sum)."""
        idx = np.asarray(index, dtype=float)
        head = self.lo + (idx + 0.5) * self.widths
        return np.concatenate([head, [-head.sum()]])

    @property
    def argmin(self) -> tuple:
        flat = int(np.argmin(self.i_hat))
        return tuple(int(i) for i in np.unravel_index(flat, self.cells))

    @property
    def argmin_value(self) -> float:
        return float(self.i_hat[self.argmin])

    def locate(self, x) -> tuple:
        """Cell index of a point, or None if it falls off the box."""
        v = check_point(x, len(self.lo) + 1)
        idx = np.floor((v[:-1] - self.lo) / self.widths).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.array(self.cells)):
            return None
        return tuple(int(i) for i in idx)


def rate_function_estimate(
    cfg: WalkConfig, grid, projection: str = "kappa", workers: int = 1
) -> RateGrid:
    """Histogram estimator of the LDP rate function at horizon cfg.n.

    ``grid`` is (d-1) axes of (lo, hi, cells) over the leading chamber
    coordinates; the caller is responsible for the box containing J-hat(S).
    i_hat = -(1/n) log(count/samples) on hit cells, +inf elsewhere; the
    resolution floor (1/n) log(samples) is exposed as ``noise_floor``.
    """
    d = cfg.set.dim
    lo, hi, cells = check_grid_spec(grid, d)
    rows = sample_projections(cfg, projection=projection, checkpoints=(cfg.n,), workers=workers)[0]
    head = rows[:, : d - 1]
    widths = (hi - lo) / np.array(cells, dtype=float)
    idx = np.floor((head - lo) / widths).astype(int)
    inside = np.all((idx >= 0) & (idx < np.array(cells)), axis=1)
    counts = np.zeros(cells, dtype=np.int64)
    np.add.at(counts, tuple(idx[inside].T), 1)
    with np.errstate(divide="ignore"):
        i_hat = np.where(
            counts > 0, -np.log(counts / cfg.samples) / cfg.n, np.inf
        )
    return RateGrid(
        lo=lo,
        hi=hi,
        cells=cells,
        counts=counts,
        i_hat=i_hat,
        n=cfg.n,
        samples=cfg.samples,
        projection=projection,
        outside=int(cfg.samples - inside.sum()),
    )


def ldp_decay_fit(cfg: WalkConfig, eps: float, n_list, center, workers: int = 1) -> dict:
    """Least-squares fit of log P(||kappa(Y_n)/n - center|| > eps) against n.

    ``center`` is the pre-estimated Lyapunov vector.  All horizons are read
    off one walk per sample (checkpoints at every n in n_list), so cfg.n
    must equal max(n_list).  Zero-count horizons are dropped from the fit
    and listed under "dropped"; if every horizon has zero exceedances the
    result carries all_zero = True and no slope (eps is too large for the
    set — a report, not a failure).
    """
    ns = tuple(int(v) for v in n_list)
    if len(ns) < 3 or list(ns) != sorted(set(ns)):
        raise EmptyInput(f"n_list must be >= 3 strictly increasing horizons, got {n_list}")
    if eps <= 0.0:
        raise EmptyInput(f"need eps > 0, got {eps}")
    if cfg.n != ns[-1]:
        raise EmptyInput(f"cfg.n must equal max(n_list) = {ns[-1]}, got {cfg.n}")
    c = check_point(center, cfg.set.dim)
    arr = sample_projections(cfg, checkpoints=ns, workers=workers)
    points = []
    dropped = []
    for i, n in enumerate(ns):
        dev = np.linalg.norm(arr[i] - c, axis=1)
        count = int(np.sum(dev > eps))
        if count > 0:
            points.append((n, count, math.log(count / cfg.samples)))
        else:
            dropped.append(n)
    all_zero = not points
    slope = intercept = None
    if len(points) >= 2:
        xs = np.array([p[0] for p in points], dtype=float)
        ys = np.array([p[2] for p in points])
        slope, intercept = (float(v) for v in np.polyfit(xs, ys, 1))
    return {
        "eps": float(eps),
        "points": points,
        "dropped": dropped,
        "all_zero": all_zero,
        "slope": slope,
        "intercept": intercept,
    }


# ------------------------------------------------------------------- log-MGF


@dataclass(frozen=True)
class MgfEstimate:
    """Empirical limiting log-MGF lambda_hat(theta) at one horizon."""

    thetas: tuple
    lambda_hat: np.ndarray
    n: int
    samples: int


def default_thetas(d: int, t_max: float = 2.5, per_ray: int = 10):
    """Dual grid: 0 plus +-t * (each Helmert axis), t linearly spaced.

    Magnitudes are capped at ``t_max`` because the empirical MGF is tail
    undersampled for large |theta|; the resulting conjugate is documented
    as a lower bound of I either way.
    """
    H = helmert_basis(d)
    mags = np.linspace(t_max / per_ray, t_max, per_ray)
    out = [np.zeros(d)]
    for axis in H:
        for t in mags:
            out.append(t * axis)
            out.append(-t * axis)
    return out


def log_mgf_estimate(cfg: WalkConfig, thetas, workers: int = 1) -> MgfEstimate:
    """lambda_hat(theta) = (1/n) log mean exp <theta, kappa(Y_n)>.

    Computed by logsumexp (max-shifted), so lambda_hat(0) = 0 exactly and
    large <theta, kappa> cannot overflow.
    """
    T = np.stack([check_point(t, cfg.set.dim, tol=1e-9) for t in thetas])
    rows = sample_projections(cfg, checkpoints=(cfg.n,), workers=workers)[0]
    kappa = rows * cfg.n  # unnormalized kappa(Y_n)
    vals = kappa @ T.T  # (samples, ntheta)
    lam = (logsumexp(vals, axis=0) - math.log(cfg.samples)) / cfg.n
    return MgfEstimate(
        thetas=tuple(map(np.asarray, T)),
        lambda_hat=lam,
        n=cfg.n,
        samples=cfg.samples,
    )


def legendre_transform(m: MgfEstimate, xs) -> np.ndarray:
    """Convex conjugate I*(x) = max_theta (<theta, x> - lambda_hat(theta)).

    A finite theta grid yields a lower bound of the true conjugate; with
    0 in the grid, I* >= 0 everywhere and I*(mean) stays near 0.
    """
    T = np.stack(m.thetas)
    d = T.shape[1]
    X = np.stack([check_point(x, d) for x in xs])
    vals = X @ T.T - m.lambda_hat[None, :]
    return np.max(vals, axis=1)


# ------------------------------------------- proximality / additivity stats


def _pair_words(seed: int, pair_id: int, word_len: int, n_gens: int, cumw) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, pair_id])))
    return np.searchsorted(cumw, rng.random((2, word_len)), side="right")


def word_kappa(S: MatrixSet, words: np.ndarray) -> np.ndarray:
    """Unnormalized kappa of the products spelled by index words (W, L).

    Words multiply left-to-right (word (a, b) means G_a @ G_b), matching
    ``enumerate_products``; the exterior ladder keeps every partial sum
    exact however long the word is.
    """
    comps = _compound_stack(S)
    W = words.shape[0]
    partials = np.empty((W, S.dim - 1))
    for k, G in enumerate(comps):
        state = G[words[:, 0]].copy()
        logs = np.zeros(W)
        state, logs = _step_renorm(state, logs)
        for t in range(1, words.shape[1]):
            state = np.matmul(state, G[words[:, t]])
            state, logs = _step_renorm(state, logs)
        top = np.linalg.svd(state, compute_uv=False)[:, 0]
        partials[:, k] = logs + np.log(top)
    return _partials_to_coords(partials, 1)


def additivity_defect_stats(
    S: MatrixSet,
    pair_samples: int,
    word_len: int,
    r: float,
    eps: float,
    seed: int = 0,
    bins: int = 24,
) -> dict:
    """Distribution of ||kappa(gh) - kappa(g) - kappa(h)|| over random pairs.

    g and h are independent length-``word_len`` words (pair i uses the
    stream [seed, i]).  The defect is reported over all pairs and, to
    exhibit almost-additivity, separately over pairs where g, h and gh are
    all (r, eps)-loxodromic; ``max_defect_lox`` is None when no pair
    qualifies.
    """
    if pair_samples < 1 or word_len < 1:
        raise EmptyInput("need pair_samples >= 1 and word_len >= 1")
    cumw = _cumulative_weights(S)
    gens = S.entries_stack()
    pairs = np.stack(
        [_pair_words(seed, i, word_len, len(S), cumw) for i in range(pair_samples)]
    )  # (P, 2, L)
    wg, wh = pairs[:, 0], pairs[:, 1]
    kg = word_kappa(S, wg)
    kh = word_kappa(S, wh)
    kgh = word_kappa(S, np.concatenate([wg, wh], axis=1))
    defect = np.linalg.norm(kgh - kg - kh, axis=1)

    Eg, _ = _products_from_words(wg, gens)
    Eh, _ = _products_from_words(wh, gens)
    lox = np.empty(pair_samples, dtype=bool)
    for i in range(pair_samples):
        lox[i] = (
            proximality_report(Eg[i], r, eps).loxodromic
            and proximality_report(Eh[i], r, eps).loxodromic
            and proximality_report(Eg[i] @ Eh[i], r, eps).loxodromic
        )
    edges = np.linspace(0.0, float(defect.max()) + 1e-12, bins + 1)
    count_all, _ = np.histogram(defect, bins=edges)
    count_lox, _ = np.histogram(defect[lox], bins=edges)
    return {
        "max_defect_all": float(defect.max()),
        "max_defect_lox": float(defect[lox].max()) if np.any(lox) else None,
        "pairs": int(pair_samples),
        "lox_pairs": int(lox.sum()),
        "histogram": {
            "edges": edges,
            "count_all": count_all,
            "count_lox": count_lox,
        },
    }


def ams_loxodromy_search(
    S: MatrixSet,
    F: MatrixSet,
    word_len: int,
    samples: int,
    r: float,
    eps: float,
    seed: int = 0,
) -> dict:
    """Fraction of random words gamma fixed to loxodromic by some f in F.

    Empirical version of the finite-perturbation phenomenon: for each
    sampled length-``word_len`` word gamma, search F for an f with gamma*f
    (r, eps)-loxodromic.  Failures are returned as index words under
    "worst_words".
    """
    if F.dim != S.dim:
        raise DimMismatch(f"F has dim {F.dim}, S has dim {S.dim}")
    if samples < 1 or word_len < 1:
        raise EmptyInput("need samples >= 1 and word_len >= 1")
    cumw = _cumulative_weights(S)
    gens = S.entries_stack()
    words = np.stack(
        [_pair_words(seed, i, word_len, len(S), cumw)[0] for i in range(samples)]
    )
    E, _ = _products_from_words(words, gens)
    fixed = 0
    worst = []
    for i in range(samples):
        if any(
            proximality_report(E[i] @ f.entries, r, eps).loxodromic for f in F.gens
        ):
            fixed += 1
        else:
            worst.append(tuple(int(j) for j in words[i]))
    return {"fraction_fixed": fixed / samples, "worst_words": worst}
