"""jspec: run joint-spectrum experiments from matrix-set JSON files.

Every subcommand reads one input file, writes its artifacts into --out
(created if missing), and finishes with a manifest.json recording the
resolved parameters, library version, and wall clock — enough to replay
the run exactly.  Artifacts are written atomically and are byte-identical
across reruns with the same parameters (the manifest's timing fields are
the only exception).

Exit codes: 0 success, 2 invalid input or parameters, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .enumeration import (
    DEFAULT_BUDGET,
    _exhaustive_word_chunks,
    _products_from_words,
    _sampled_word_chunks,
    append_word,
    cone_invariance_check,
    joint_spectrum_estimate,
)
from .errors import JointSpectrumError
from .estimators import default_dirs
from .geometry import make_directions
from .io import dump_json, load_matrix_set, make_manifest, write_csv
from .jsr import berger_wang_check, jsr_bounds
from .linalg import proximality_report
from .walks import (
    WalkConfig,
    additivity_defect_stats,
    ams_loxodromy_search,
    default_thetas,
    ldp_decay_fit,
    legendre_transform,
    log_mgf_estimate,
    lyapunov_estimate,
    rate_function_estimate,
)

# bad inputs or parameters exit 2; mid-computation breakdowns exit 3
_VALIDATION_EXITS = (
    "ParseError",
    "EmptyInput",
    "DimMismatch",
    "BadIndex",
    "BadResolution",
    "DirsetMismatch",
    "SingularInput",
)


def parse_grid(text: str):
    """--grid syntax: comma-separated axes, each lo:hi:cells."""
    axes = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 3:
            raise argparse.ArgumentTypeError(
                f"grid axis {part!r}: expected lo:hi:cells"
            )
        try:
            axes.append((float(bits[0]), float(bits[1]), int(bits[2])))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"grid axis {part!r}: {exc}") from exc
    return axes


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="jspec",
        description="Joint-spectrum experiments on finite sets of unimodular matrices.",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def cmd(name, help_text):
        c = sub.add_parser(name, help=help_text)
        c.add_argument("--input", required=True, help="matrix-set JSON file")
        c.add_argument("--out", required=True, help="output directory")
        c.add_argument("--seed", type=int, default=0)
        return c

    c = cmd("spectrum", "enumerate S^n and emit the kappa/lambda bodies per level")
    c.add_argument("--n", type=int, default=8)
    c.add_argument("--dirs", type=int, default=None, help="directions (default 64(d-1))")
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    c = cmd("jsr", "branch-and-bound bracket of the log joint spectral radius")
    c.add_argument("--depth", type=int, default=10)
    c.add_argument("--prune-delta", type=float, default=0.005)

    c = cmd("bergerwang", "compare spectrum support data against exterior-power JSR")
    c.add_argument("--k", type=int, default=None, help="representation index (default all)")
    c.add_argument("--n", type=int, default=8)
    c.add_argument("--depth", type=int, default=10)
    c.add_argument("--dirs", type=int, default=None)
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    c.add_argument("--prune-delta", type=float, default=0.005)

    c = cmd("lyapunov", "Monte Carlo Lyapunov vector of the mu-random walk")
    c.add_argument("--n", type=int, default=100)
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--workers", type=int, default=1)

    c = cmd("rate", "empirical LDP rate function on a chamber grid")
    c.add_argument("--n", type=int, default=60)
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--grid", type=parse_grid, required=True, help="lo:hi:cells[,lo:hi:cells...]")
    c.add_argument("--projection", choices=("kappa", "lambda"), default="kappa")
    c.add_argument("--workers", type=int, default=1)

    c = cmd("mgf", "empirical limiting log-MGF over the default dual grid")
    c.add_argument("--n", type=int, default=60)
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--workers", type=int, default=1)

    c = cmd("decay", "exceedance-probability decay fit over n, n/2, n/4, n/8")
    c.add_argument("--n", type=int, default=400, help="largest horizon")
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--eps", type=float, default=0.15)
    c.add_argument("--workers", type=int, default=1)

    c = cmd("proximal", "(r,eps)-proximality reports for products up to length n")
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--r", type=float, default=0.05)
    c.add_argument("--eps", type=float, default=0.2)
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    c = cmd("defect", "additivity-defect statistics over random word pairs")
    c.add_argument("--n", type=int, default=10, help="word length")
    c.add_argument("--samples", type=int, default=300, help="number of pairs")
    c.add_argument("--r", type=float, default=0.05)
    c.add_argument("--eps", type=float, default=0.2)

    c = cmd("ams", "search for loxodromy-fixing right factors (F = S plus identity)")
    c.add_argument("--n", type=int, default=10, help="word length")
    c.add_argument("--samples", type=int, default=200)
    c.add_argument("--r", type=float, default=0.05)
    c.add_argument("--eps", type=float, default=0.2)

    c = cmd("cone", "asymptotic-cone distance between S and S plus a product word")
    c.add_argument("--n", type=int, default=8)
    c.add_argument("--dirs", type=int, default=None)
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    return p


def _dirset_for(S, dirs, seed):
    m = dirs if dirs is not None else default_dirs(S.dim)
    return make_directions(S.dim, m, seed=seed)


def _word_label(word) -> str:
    return "-".join(str(int(t)) for t in word)


# ----------------------------------------------------------------- commands


def _run_spectrum(S, a, out):
    dirset = _dirset_for(S, a.dirs, a.seed)
    levels = joint_spectrum_estimate(S, a.n, dirset, budget=a.budget, seed=a.seed)
    rows = []
    for est in levels:
        kt = max(p[0] for p in est.kappa_body.points)
        lt = max(p[0] for p in est.lambda_body.points)
        rows.append(
            (est.n, est.mode, est.product_count, est.d_kl, est.d_step, kt, lt)
        )
    write_csv(
        os.path.join(out, "spectrum.csv"),
        ("n", "mode", "product_count", "d_kl", "d_step", "kappa_top", "lambda_top"),
        rows,
    )
    from .io import save_body

    save_body(os.path.join(out, "body.json"), levels[-1].kappa_body)
    save_body(os.path.join(out, "lambda_body.json"), levels[-1].lambda_body)
    return {"n": a.n, "dirs": dirset.resolution, "budget": a.budget, "seed": a.seed}


def _run_jsr(S, a, out):
    b = jsr_bounds(S.entries_stack(), a.depth, prune_delta=a.prune_delta)
    write_csv(
        os.path.join(out, "bounds.csv"),
        ("depth", "explored", "lower", "upper"),
        b.history,
    )
    dump_json(
        os.path.join(out, "jsr.json"),
        {
            "lower": b.lower,
            "upper": b.upper,
            "witness": list(b.witness),
            "depth": b.depth,
            "explored": b.explored,
            "prune_delta": b.prune_delta,
        },
    )
    return {"depth": a.depth, "prune_delta": a.prune_delta, "seed": a.seed}


def _run_bergerwang(S, a, out):
    dirset = _dirset_for(S, a.dirs, a.seed)
    est = joint_spectrum_estimate(S, a.n, dirset, budget=a.budget, seed=a.seed)[-1]
    ks = (a.k,) if a.k is not None else tuple(range(1, S.dim))
    rows = []
    for k in ks:
        r = berger_wang_check(S, k, a.depth, est, prune_delta=a.prune_delta)
        rows.append(
            (k, r["lhs"], r["lower"], r["upper"], r["gap"], r["disc_err"], a.n, a.depth)
        )
    write_csv(
        os.path.join(out, "bergerwang.csv"),
        ("k", "lhs", "rhs_lower", "rhs_upper", "gap", "disc_err", "n", "depth"),
        rows,
    )
    return {
        "k": a.k,
        "n": a.n,
        "depth": a.depth,
        "dirs": dirset.resolution,
        "budget": a.budget,
        "prune_delta": a.prune_delta,
        "seed": a.seed,
    }


def _run_lyapunov(S, a, out):
    res = lyapunov_estimate(
        WalkConfig(set=S, n=a.n, samples=a.samples, seed=a.seed), workers=a.workers
    )
    vec, err = res["vec"].coords, res["stderr"]
    write_csv(
        os.path.join(out, "lyapunov.csv"),
        ("coordinate", "value", "stderr"),
        [(i + 1, vec[i], err[i]) for i in range(len(vec))],
    )
    return {"n": a.n, "samples": a.samples, "workers": a.workers, "seed": a.seed}


def _run_rate(S, a, out):
    cfg = WalkConfig(set=S, n=a.n, samples=a.samples, seed=a.seed)
    grid = rate_function_estimate(cfg, a.grid, projection=a.projection, workers=a.workers)
    rows = []
    for idx in np.ndindex(grid.cells):
        center = grid.cell_center(idx)
        rows.append(
            tuple(int(i) for i in idx)
            + tuple(center)
            + (int(grid.counts[idx]), grid.i_hat[idx])
        )
    d = S.dim
    header = (
        tuple(f"cell_{j + 1}" for j in range(d - 1))
        + tuple(f"center_{j + 1}" for j in range(d))
        + ("count", "i_hat")
    )
    write_csv(os.path.join(out, "rate.csv"), header, rows)
    dump_json(
        os.path.join(out, "rate.json"),
        {
            "lo": grid.lo,
            "hi": grid.hi,
            "cells": list(grid.cells),
            "n": grid.n,
            "samples": grid.samples,
            "projection": grid.projection,
            "outside": grid.outside,
            "noise_floor": grid.noise_floor,
            "argmin": list(grid.argmin),
            "argmin_value": grid.argmin_value,
            "i_hat": grid.i_hat,
        },
    )
    return {
        "n": a.n,
        "samples": a.samples,
        "grid": [list(g) for g in a.grid],
        "projection": a.projection,
        "workers": a.workers,
        "seed": a.seed,
    }


def _run_mgf(S, a, out):
    cfg = WalkConfig(set=S, n=a.n, samples=a.samples, seed=a.seed)
    est = log_mgf_estimate(cfg, default_thetas(S.dim), workers=a.workers)
    d = S.dim
    rows = [
        tuple(th) + (lam,) for th, lam in zip(est.thetas, est.lambda_hat)
    ]
    header = tuple(f"theta_{j + 1}" for j in range(d)) + ("lambda_hat",)
    write_csv(os.path.join(out, "mgf.csv"), header, rows)
    return {"n": a.n, "samples": a.samples, "workers": a.workers, "seed": a.seed}


def _run_decay(S, a, out):
    n_list = tuple(sorted({max(3, a.n // 8), max(3, a.n // 4), max(3, a.n // 2), a.n}))
    calib = lyapunov_estimate(
        WalkConfig(set=S, n=a.n, samples=a.samples, seed=a.seed + 1),
        workers=a.workers,
    )
    cfg = WalkConfig(set=S, n=a.n, samples=a.samples, seed=a.seed)
    res = ldp_decay_fit(cfg, a.eps, n_list, calib["vec"], workers=a.workers)
    write_csv(
        os.path.join(out, "decay.csv"),
        ("n", "count", "log_phat"),
        res["points"],
    )
    dump_json(
        os.path.join(out, "decay.json"),
        {
            "eps": res["eps"],
            "n_list": list(n_list),
            "slope": res["slope"],
            "intercept": res["intercept"],
            "all_zero": res["all_zero"],
            "dropped": res["dropped"],
            "center": calib["vec"].coords,
        },
    )
    return {
        "n": a.n,
        "n_list": list(n_list),
        "samples": a.samples,
        "eps": a.eps,
        "workers": a.workers,
        "seed": a.seed,
    }


def _run_proximal(S, a, out):
    gens = S.entries_stack()
    k_gens = len(S)
    rows = []
    for length in range(1, a.n + 1):
        if k_gens**length <= a.budget:
            chunks = _exhaustive_word_chunks(k_gens, length, 4096)
        else:
            chunks = _sampled_word_chunks(k_gens, length, a.budget, a.seed, 4096)
        for words in chunks:
            E, _ = _products_from_words(words, gens)
            for i in range(words.shape[0]):
                rep = proximality_report(E[i], a.r, a.eps)
                for st in rep.per_rep:
                    rows.append(
                        (
                            _word_label(words[i]),
                            length,
                            st.k,
                            st.sv_ratio,
                            st.top_evec_distance,
                            st.eps_proximal,
                            st.r_eps_proximal,
                            rep.loxodromic,
                        )
                    )
    write_csv(
        os.path.join(out, "proximal.csv"),
        (
            "word",
            "length",
            "k",
            "sv_ratio",
            "evec_distance",
            "eps_proximal",
            "r_eps_proximal",
            "loxodromic",
        ),
        rows,
    )
    return {"n": a.n, "r": a.r, "eps": a.eps, "budget": a.budget, "seed": a.seed}


def _run_defect(S, a, out):
    res = additivity_defect_stats(
        S, pair_samples=a.samples, word_len=a.n, r=a.r, eps=a.eps, seed=a.seed
    )
    h = res["histogram"]
    rows = [
        (h["edges"][i], h["edges"][i + 1], h["count_all"][i], h["count_lox"][i])
        for i in range(len(h["count_all"]))
    ]
    write_csv(
        os.path.join(out, "defect.csv"),
        ("bin_lo", "bin_hi", "count_all", "count_lox"),
        rows,
    )
    dump_json(
        os.path.join(out, "defect.json"),
        {
            "max_defect_all": res["max_defect_all"],
            "max_defect_lox": res["max_defect_lox"],
            "pairs": res["pairs"],
            "lox_pairs": res["lox_pairs"],
            "word_len": a.n,
            "r": a.r,
            "eps": a.eps,
        },
    )
    return {"n": a.n, "samples": a.samples, "r": a.r, "eps": a.eps, "seed": a.seed}


def _run_ams(S, a, out):
    from .enumeration import MatrixSet
    from .linalg import UnimodularMatrix

    eye = UnimodularMatrix(dim=S.dim, entries=np.eye(S.dim))
    F = MatrixSet(dim=S.dim, gens=S.gens + (eye,))
    res = ams_loxodromy_search(
        S, F, word_len=a.n, samples=a.samples, r=a.r, eps=a.eps, seed=a.seed
    )
    dump_json(
        os.path.join(out, "ams.json"),
        {
            "fraction_fixed": res["fraction_fixed"],
            "worst_words": [list(w) for w in res["worst_words"]],
            "word_len": a.n,
            "samples": a.samples,
            "r": a.r,
            "eps": a.eps,
        },
    )
    return {"n": a.n, "samples": a.samples, "r": a.r, "eps": a.eps, "seed": a.seed}


def _run_cone(S, a, out):
    word = (0, 1) if len(S) >= 2 else (0, 0)
    S_prime = append_word(S, word)
    dirset = _dirset_for(S, a.dirs, a.seed)
    dist = cone_invariance_check(S, S_prime, a.n, dirset, budget=a.budget, seed=a.seed)
    dump_json(
        os.path.join(out, "cone.json"),
        {"n": a.n, "distance": dist, "appended_word": list(word)},
    )
    return {
        "n": a.n,
        "dirs": dirset.resolution,
        "budget": a.budget,
        "appended_word": list(word),
        "seed": a.seed,
    }


_RUNNERS = {
    "spectrum": _run_spectrum,
    "jsr": _run_jsr,
    "bergerwang": _run_bergerwang,
    "lyapunov": _run_lyapunov,
    "rate": _run_rate,
    "mgf": _run_mgf,
    "decay": _run_decay,
    "proximal": _run_proximal,
    "defect": _run_defect,
    "ams": _run_ams,
    "cone": _run_cone,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        S = load_matrix_set(args.input)
        os.makedirs(args.out, exist_ok=True)
        params = _RUNNERS[args.command](S, args, args.out)
    except JointSpectrumError as exc:
        kind = type(exc).__name__
        print(f"jspec {args.command}: {kind}: {exc}", file=sys.stderr)
        return 2 if kind in _VALIDATION_EXITS else 3
    except np.linalg.LinAlgError as exc:
        print(f"jspec {args.command}: LinAlgError: {exc}", file=sys.stderr)
        return 3
    manifest = make_manifest(
        args.command, args.input, params, time.perf_counter() - t0
    )
    dump_json(os.path.join(args.out, "manifest.json"), manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
