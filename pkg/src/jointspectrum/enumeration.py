"""Product sets S^n and the joint-spectrum approximants.

Level n of the joint spectrum is approximated by the hulls

    K_n = hull{ kappa(g)/n : g in S^n },   L_n = hull{ lambda(g)/n : g in S^n },

enumerated exhaustively while |S|^n fits the budget and by seeded uniform
word sampling beyond.  Products are renormalized by their max-abs entry at
every step (the log accumulates in ``log_scale``), and both projections are
computed on the renormalized entries — they are scale invariant, so the
bookkeeping is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, NumericalFailure
from .geometry import DirectionSet, SupportBody, hausdorff_distance, asymptotic_cone
from .linalg import UnimodularMatrix, normalize_det
from .validation import check_square_stack, check_weights

DEFAULT_BUDGET = 2_000_000

_CHUNK = 32768  # products per batched SVD/eig call


@dataclass(frozen=True)
class MatrixSet:
    """A finite generating set with optional weights (the measure mu)."""

    dim: int
    gens: tuple
    weights: np.ndarray = None
    labels: tuple = None

    def __post_init__(self):
        if not self.gens:
            raise EmptyInput("matrix set needs at least one generator")
        for g in self.gens:
            if not isinstance(g, UnimodularMatrix) or g.dim != self.dim:
                raise EmptyInput(f"generators must be UnimodularMatrix of dim {self.dim}")
        object.__setattr__(self, "gens", tuple(self.gens))
        if self.weights is not None:
            w = check_weights(self.weights, len(self.gens))
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)
        if self.labels is not None:
            lab = tuple(str(s) for s in self.labels)
            if len(lab) != len(self.gens):
                raise EmptyInput("labels must match generators one-to-one")
            object.__setattr__(self, "labels", lab)

    def __len__(self):
        return len(self.gens)

    @property
    def probabilities(self) -> np.ndarray:
        """Weights, defaulting to uniform."""
        if self.weights is not None:
            return np.array(self.weights)
        k = len(self.gens)
        return np.full(k, 1.0 / k)

    def entries_stack(self) -> np.ndarray:
        return np.stack([g.entries for g in self.gens])


def matrix_set(matrices, weights=None, labels=None) -> MatrixSet:
    """Build a MatrixSet from raw arrays, normalizing each determinant."""
    stack = check_square_stack(matrices)
    gens = tuple(normalize_det(m) for m in stack)
    return MatrixSet(dim=stack.shape[1], gens=gens, weights=weights, labels=labels)


@dataclass(frozen=True)
class SpectrumEstimate:
    """One level of the joint-spectrum approximation."""

    n: int
    kappa_body: SupportBody
    lambda_body: SupportBody
    d_kl: float
    d_step: float
    product_count: int
    mode: str  # "exhaustive" | "sampled"


def _word_rng(seed: int, length: int):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, length])))


def _sampled_word_chunks(n_gens: int, length: int, count: int, seed: int, chunk: int):
    """Uniform word sample in chunks, deterministic given (seed, length).

    PCG64 draws are sequential, so the concatenation over chunks equals a
    single bulk draw — the sample does not depend on the chunk size.
    """
    rng = _word_rng(seed, length)
    done = 0
    while done < count:
        take = min(chunk, count - done)
        yield rng.integers(0, n_gens, size=(take, length))
        done += take


def _renorm(E: np.ndarray, L: np.ndarray):
    # log_scale convention: represented product = exp(L/d) * E, so pulling
    # a scalar m out of E adds d*log(m) to L
    m = np.max(np.abs(E), axis=(1, 2))
    if np.any(m <= 0.0) or not np.all(np.isfinite(m)):
        raise NumericalFailure("product collapsed to zero or overflowed")
    return E / m[:, None, None], L + E.shape[1] * np.log(m)


def _extend_level(E: np.ndarray, L: np.ndarray, gens: np.ndarray):
    """All one-letter right extensions of the given products."""
    P, d, _ = E.shape
    k = gens.shape[0]
    out = np.matmul(E[:, None], gens[None, :]).reshape(P * k, d, d)
    return _renorm(out, np.repeat(L, k))


def _products_from_words(words: np.ndarray, gens: np.ndarray):
    """Ladder evaluation of explicit words (rows of generator indices)."""
    W, n = words.shape
    d = gens.shape[1]
    E = gens[words[:, 0]].copy()
    L = np.zeros(W)
    E, L = _renorm(E, L)
    for t in range(1, n):
        E = np.matmul(E, gens[words[:, t]])
        E, L = _renorm(E, L)
    return E, L


def enumerate_products(S: MatrixSet, n: int, budget: int = DEFAULT_BUDGET, seed: int = 0):
    """Yield (UnimodularMatrix, word_length) over S^n.

    Exhaustive (lexicographic) when |S|^n <= budget, otherwise ``budget``
    uniformly sampled words (seeded).  Yielded entries are max-abs
    renormalized with the accumulated log in ``log_scale``; the represented
    product exp(log_scale/d) * entries stays in SL(d,R), so no entry ever
    overflows.  The mode is never silently mixed; see ``product_mode``.
    """
    if n < 1:
        raise EmptyInput(f"need n >= 1, got {n}")
    if budget < len(S):
        raise EmptyInput(f"budget must be at least |S| = {len(S)}")
    gens = S.entries_stack()
    k = len(S)
    if k**n <= budget:
        chunks = _exhaustive_word_chunks(k, n, _CHUNK)
    else:
        chunks = _sampled_word_chunks(k, n, budget, seed, _CHUNK)
    for words in chunks:
        E, L = _products_from_words(words, gens)
        for i in range(words.shape[0]):
            yield UnimodularMatrix(dim=S.dim, entries=E[i], log_scale=float(L[i])), n


def _exhaustive_word_chunks(n_gens: int, length: int, chunk: int):
    """All words of the given length in lexicographic order, chunked."""
    total = n_gens**length
    powers = n_gens ** np.arange(length - 1, -1, -1, dtype=np.int64)
    for lo in range(0, total, chunk):
        ranks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        yield (ranks[:, None] // powers[None, :]) % n_gens


def product_mode(S: MatrixSet, n: int, budget: int = DEFAULT_BUDGET) -> str:
    return "exhaustive" if len(S) ** n <= budget else "sampled"


class _BodyAccumulator:
    """Streaming max-merge of support values and per-direction witnesses."""

    def __init__(self, dirset: DirectionSet):
        self.dirset = dirset
        m = dirset.resolution
        self.h = np.full(m, -np.inf)
        self.best = np.zeros((m, dirset.dim))

    def add(self, X: np.ndarray):
        vals = X @ self.dirset.dirs.T  # (chunk, m)
        arg = np.argmax(vals, axis=0)
        cand = vals[arg, np.arange(vals.shape[1])]
        better = cand > self.h
        self.h[better] = cand[better]
        self.best[better] = X[arg[better]]

    def body(self) -> SupportBody:
        if not np.all(np.isfinite(self.h)):
            raise EmptyInput("no points accumulated")
        uniq = np.unique(self.best, axis=0)
        return SupportBody(
            dirset=self.dirset, h=self.h.copy(), points=tuple(uniq)
        )


def _level_points(E: np.ndarray, L: np.ndarray, n: int):
    """Normalized kappa and lambda point clouds for one level."""
    sv = np.linalg.svd(E, compute_uv=False)
    if np.any(sv[:, -1] <= 0.0):
        bad = int(np.argmax(sv[:, -1] <= 0.0))
        raise NumericalFailure(f"singular value underflow in product {bad} at level {n}")
    logs = np.log(sv)
    kap = np.sort(logs, axis=1)[:, ::-1]
    kap = (kap - kap.mean(axis=1, keepdims=True)) / n
    mod = np.abs(np.linalg.eigvals(E))
    if np.any(mod <= 0.0):
        bad = int(np.argmax(np.min(mod, axis=1) <= 0.0))
        raise NumericalFailure(f"eigenvalue underflow in product {bad} at level {n}")
    lam = np.sort(np.log(mod), axis=1)[:, ::-1]
    lam = (lam - lam.mean(axis=1, keepdims=True)) / n
    return kap, lam


def joint_spectrum_estimate(
    S: MatrixSet,
    n_max: int,
    dirset: DirectionSet,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> list:
    """SpectrumEstimate per level n = 1..n_max; the last level is J-hat(S).

    Exhaustive levels extend the previous level's products; once |S|^n
    exceeds the budget the level switches to sampled mode (budget-many
    seeded words, an inner approximation — the mode is recorded).  Whether
    the generated semigroup is Zariski dense is the caller's responsibility;
    a stubbornly large d_kl is the practical symptom of a violation.
    """
    if n_max < 1:
        raise EmptyInput(f"need n_max >= 1, got {n_max}")
    if budget < len(S):
        raise EmptyInput(f"budget must be at least |S| = {len(S)}")
    gens = S.entries_stack()
    k = len(S)
    out = []
    prev_kappa = None
    E = L = None  # running exhaustive level
    for n in range(1, n_max + 1):
        mode = product_mode(S, n, budget)
        if mode == "exhaustive":
            if E is None:
                E, L = _renorm(gens.copy(), np.zeros(k))
            else:
                E, L = _extend_level(E, L, gens)
            pieces = (
                (E[lo : lo + _CHUNK], L[lo : lo + _CHUNK])
                for lo in range(0, E.shape[0], _CHUNK)
            )
        else:
            E = L = None  # exhaustive chain broken; sample this level
            pieces = (
                _products_from_words(words, gens)
                for words in _sampled_word_chunks(k, n, budget, seed, _CHUNK)
            )
        acc_k = _BodyAccumulator(dirset)
        acc_l = _BodyAccumulator(dirset)
        count = 0
        for pe, pl in pieces:
            count += pe.shape[0]
            kap, lam = _level_points(pe, pl, n)
            acc_k.add(kap)
            acc_l.add(lam)
        kappa_body = acc_k.body()
        lambda_body = acc_l.body()
        d_kl = hausdorff_distance(kappa_body, lambda_body)
        d_step = (
            math.inf if prev_kappa is None else hausdorff_distance(kappa_body, prev_kappa)
        )
        out.append(
            SpectrumEstimate(
                n=n,
                kappa_body=kappa_body,
                lambda_body=lambda_body,
                d_kl=d_kl,
                d_step=d_step,
                product_count=count,
                mode=mode,
            )
        )
        prev_kappa = kappa_body
    return out


def cone_invariance_check(
    S: MatrixSet,
    S_prime: MatrixSet,
    n: int,
    dirset: DirectionSet,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> float:
    """Hausdorff distance between the asymptotic cones of J-hat(S), J-hat(S').

    S_prime is expected to generate the same semigroup (e.g. S plus words in
    S); under that hypothesis the Benoist cone is shared and the distance
    should be small and shrink with n.
    """
    a = joint_spectrum_estimate(S, n, dirset, budget=budget, seed=seed)[-1]
    b = joint_spectrum_estimate(S_prime, n, dirset, budget=budget, seed=seed)[-1]
    return hausdorff_distance(
        asymptotic_cone(a.kappa_body), asymptotic_cone(b.kappa_body)
    )


def append_word(S: MatrixSet, word) -> MatrixSet:
    """Extend S with the product of the given generator indices."""
    gens = S.entries_stack()
    idx = np.asarray(list(word), dtype=int)
    if idx.ndim != 1 or idx.size == 0 or np.any(idx < 0) or np.any(idx >= len(S)):
        raise EmptyInput(f"word must index generators 0..{len(S) - 1}")
    E, L = _products_from_words(idx[None, :], gens)
    extra = UnimodularMatrix(dim=S.dim, entries=E[0], log_scale=float(L[0]))
    return MatrixSet(dim=S.dim, gens=S.gens + (extra,))
