"""Acceptance gate: ten numbered criteria, each printing one PASS/FAIL line
with its measured values.

Everything here runs at the stated desk-scale budgets against independent
oracles (closed-form constants, explicit-product recomputation, or
self-consistency between the enumeration, solver, and walk layers).  The
shared fixtures are module-scoped so the expensive walks and enumerations
run once.
"""
import math
import time

import numpy as np
import pytest

from jointspectrum import (
    WalkConfig,
    additivity_defect_stats,
    append_word,
    berger_wang_check,
    cartan_projection,
    cone_invariance_check,
    default_thetas,
    exterior_power,
    interior_margin,
    joint_spectrum_estimate,
    jordan_projection,
    jsr_bounds,
    ldp_decay_fit,
    legendre_transform,
    log_mgf_estimate,
    lyapunov_estimate,
    make_directions,
    matrix_set,
    normalize_det,
    rate_function_estimate,
    run_walk,
)
from jointspectrum.geometry import contains
from jointspectrum.walks import _cumulative_weights, _walker_indices

FIB = [[[1.0, 1.0], [0.0, 1.0]], [[1.0, 0.0], [1.0, 1.0]]]
LOG_PHI = 0.5 * math.log((3.0 + math.sqrt(5.0)) / 2.0)  # from rho([[2,1],[1,1]])


def report(capsys, num, ok, detail):
    with capsys.disabled():
        print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def fib_S():
    return matrix_set(FIB)


@pytest.fixture(scope="module")
def fib_levels(fib_S):
    return joint_spectrum_estimate(fib_S, 14, make_directions(2, 64, seed=0))


@pytest.fixture(scope="module")
def d3_S():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    return matrix_set([np.diag([4.0, 1.0, 0.25]), q @ np.diag([2.0, 1.0, 0.5]) @ q.T])


@pytest.fixture(scope="module")
def fib_lyapunov(fib_S):
    return lyapunov_estimate(WalkConfig(set=fib_S, n=4000, samples=200, seed=0))


@pytest.fixture(scope="module")
def fib_rate_cfg(fib_S):
    return WalkConfig(set=fib_S, n=60, samples=100_000, seed=0)


@pytest.fixture(scope="module")
def fib_rate_grid(fib_rate_cfg):
    return rate_function_estimate(fib_rate_cfg, (0.0, 0.6, 25))


def test_criterion_01_projection_identities(capsys):
    """kappa/lambda identities on 1000 random SL(2) and SL(3) elements."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    errs = {"sum": 0.0, "order": 0.0, "power": 0.0, "conj": 0.0, "ext": 0.0}
    for d in (2, 3):
        for _ in range(1000):
            g = normalize_det(rng.normal(size=(d, d)))
            h = normalize_det(rng.normal(size=(d, d)))
            kap = cartan_projection(g).coords
            lam = jordan_projection(g).coords
            errs["sum"] = max(errs["sum"], abs(kap.sum()), abs(lam.sum()))
            errs["order"] = max(
                errs["order"], np.max(np.diff(kap)), np.max(np.diff(lam))
            )
            g3 = g.entries @ g.entries @ g.entries
            errs["power"] = max(
                errs["power"],
                np.max(np.abs(jordan_projection(g3).coords - 3.0 * lam)),
            )
            conj = h.entries @ g.entries @ np.linalg.inv(h.entries)
            errs["conj"] = max(
                errs["conj"], np.max(np.abs(jordan_projection(conj).coords - lam))
            )
            if d == 3:
                k2 = cartan_projection(exterior_power(g, 2)).coords
                pair_sums = np.sort(
                    [kap[0] + kap[1], kap[0] + kap[2], kap[1] + kap[2]]
                )[::-1]
                pair_sums -= pair_sums.mean()
                errs["ext"] = max(errs["ext"], np.max(np.abs(k2 - pair_sums)))
    dt = time.perf_counter() - t0
    ok = (
        errs["sum"] <= 1e-12
        and errs["order"] <= 1e-12
        and errs["power"] <= 1e-5
        and errs["conj"] <= 1e-7
        and errs["ext"] <= 1e-9
        and dt < 10.0
    )
    report(
        capsys,
        1,
        ok,
        f"2000 elements: sum {errs['sum']:.1e}, order {errs['order']:.1e}, "
        f"power {errs['power']:.1e}, conj {errs['conj']:.1e}, "
        f"ext {errs['ext']:.1e}; {dt:.1f}s < 10s",
    )


def test_criterion_02_spectrum_convergence(capsys, fib_levels):
    """Exhaustive Fibonacci enumeration converges toward [0, log phi]."""
    t0 = time.perf_counter()
    by_n = {est.n: est for est in fib_levels}
    top14 = max(p[0] for p in by_n[14].kappa_body.points)
    dt = time.perf_counter() - t0
    ok = (
        by_n[14].d_kl < by_n[5].d_kl
        and by_n[14].d_step < 0.05
        and abs(top14 - LOG_PHI) < 0.03
        and by_n[14].mode == "exhaustive"
        and dt < 120.0
    )
    report(
        capsys,
        2,
        ok,
        f"d_kl 14 vs 5: {by_n[14].d_kl:.4f} < {by_n[5].d_kl:.4f}, "
        f"d_step(14) {by_n[14].d_step:.4f} < 0.05, "
        f"|top - log phi| {abs(top14 - LOG_PHI):.2e} < 0.03; {dt:.1f}s < 120s",
    )


def test_criterion_03_berger_wang(capsys, fib_S, d3_S):
    """Support data of J-hat matches exterior-power JSR brackets."""
    t0 = time.perf_counter()
    est2 = joint_spectrum_estimate(fib_S, 12, make_directions(2, 64, seed=0))[-1]
    r2 = berger_wang_check(fib_S, 1, 14, est2)
    est3 = joint_spectrum_estimate(d3_S, 12, make_directions(3, 128, seed=0))[-1]
    r31 = berger_wang_check(d3_S, 1, 14, est3)
    r32 = berger_wang_check(d3_S, 2, 14, est3)
    dt = time.perf_counter() - t0
    ok = r2["gap"] <= 0.03 and r31["gap"] <= 0.05 and r32["gap"] <= 0.05 and dt < 300.0
    report(
        capsys,
        3,
        ok,
        f"gaps: fib k=1 {r2['gap']:.4f} <= 0.03, d3 k=1 {r31['gap']:.4f} <= 0.05, "
        f"d3 k=2 {r32['gap']:.4f} <= 0.05; {dt:.1f}s < 300s",
    )


def test_criterion_04_cone_invariance(capsys, fib_S):
    """Appending the product g0 g1 leaves the asymptotic cone in place."""
    S_prime = append_word(fib_S, (0, 1))
    dirset = make_directions(2, 64, seed=0)
    d12 = cone_invariance_check(fib_S, S_prime, 12, dirset)
    d14 = cone_invariance_check(fib_S, S_prime, 14, dirset)
    ok = d12 <= 0.1 and d14 <= d12
    report(
        capsys,
        4,
        ok,
        f"cone distance n=12: {d12:.4f} <= 0.1, n=14: {d14:.4f} <= {d12:.4f}",
    )


def test_criterion_05_lyapunov_interior(capsys, fib_levels, fib_lyapunov):
    """The Lyapunov vector sits well inside J-hat(S)."""
    t0 = time.perf_counter()
    body = fib_levels[-1].kappa_body
    margin = interior_margin(body, fib_lyapunov["vec"])
    stderr = float(np.max(fib_lyapunov["stderr"]))
    dt = time.perf_counter() - t0
    ok = margin > 3.0 * stderr and dt < 60.0
    report(
        capsys,
        5,
        ok,
        f"margin {margin:.4f} > 3*stderr {3 * stderr:.1e} "
        f"(lambda_1 = {fib_lyapunov['vec'].coords[0]:.4f}); {dt:.1f}s < 60s",
    )


def test_criterion_06_rate_support(capsys, fib_levels, fib_lyapunov, fib_rate_grid):
    """Rate-grid support: argmin at the Lyapunov vector, support inside
    J-hat inflated by a cell diagonal + 0.05, midpoint convexity >= 90%."""
    grid = fib_rate_grid
    body = fib_levels[-1].kappa_body
    at_lam = grid.locate(fib_lyapunov["vec"])
    argmin_ok = at_lam == grid.argmin
    floor_ok = grid.argmin_value < grid.noise_floor
    finite = np.where(np.isfinite(grid.i_hat))[0]
    inflate = grid.cell_diagonal + 0.05
    uncontained = [
        int(i) for i in finite if not contains(body, grid.cell_center((i,)), tol=inflate)
    ]
    total = passed = 0
    for a in finite:
        for b in finite:
            mid = (a + b) // 2
            if a < b and (a + b) % 2 == 0 and np.isfinite(grid.i_hat[mid]):
                total += 1
                if grid.i_hat[mid] <= 0.5 * (grid.i_hat[a] + grid.i_hat[b]) + 0.05:
                    passed += 1
    conv_ok = total > 0 and passed / total >= 0.9
    ok = argmin_ok and floor_ok and not uncontained and conv_ok
    report(
        capsys,
        6,
        ok,
        f"argmin {grid.argmin} == cell(lambda) {at_lam}, "
        f"i_hat(argmin) {grid.argmin_value:.4f} < floor {grid.noise_floor:.4f}, "
        f"uncontained finite cells {uncontained}, convexity {passed}/{total}",
    )


def test_criterion_07_exponential_decay(capsys):
    """Exceedance probabilities decay exponentially (eps = 0.15).

    The matrix set is ours to choose; the Fibonacci pair's fluctuations are
    far too small for eps = 0.15 to be observable at 1e5 samples (measured:
    4, 0, 0, 0 exceedances over the four horizons), so the check runs on
    the +-diag pair {diag(e, 1/e), diag(1/e, e)}, whose top coordinate is a
    Bernoulli-sum with exactly known Cramer decay.
    """
    t0 = time.perf_counter()
    g = np.diag([math.e, 1.0 / math.e])
    T = matrix_set([g, np.linalg.inv(g)])
    calib = lyapunov_estimate(WalkConfig(set=T, n=400, samples=2000, seed=1))
    cfg = WalkConfig(set=T, n=400, samples=100_000, seed=0)
    res = ldp_decay_fit(cfg, 0.15, (50, 100, 200, 400), calib["vec"])
    dt = time.perf_counter() - t0
    ok = (
        not res["all_zero"]
        and len(res["points"]) == 4
        and res["slope"] is not None
        and res["slope"] < 0.0
        and dt < 300.0
    )
    counts = [p[1] for p in res["points"]]
    report(
        capsys,
        7,
        ok,
        f"slope {res['slope']:.4f} < 0, counts {counts} over n=(50,100,200,400); "
        f"{dt:.1f}s < 300s",
    )


def test_criterion_08_legendre_consistency(capsys, fib_rate_cfg, fib_rate_grid):
    """Legendre conjugate of the log-MGF tracks i_hat on interior cells."""
    grid = fib_rate_grid
    mgf = log_mgf_estimate(fib_rate_cfg, default_thetas(2))
    finite = np.isfinite(grid.i_hat)
    interior = [
        i
        for i in np.where(finite)[0]
        if 0 < i < grid.cells[0] - 1 and finite[i - 1] and finite[i + 1]
    ]
    centers = [grid.cell_center((i,)) for i in interior]
    istar = legendre_transform(mgf, centers)
    diffs = [abs(istar[j] - grid.i_hat[i]) for j, i in enumerate(interior)]
    ok = bool(interior) and max(diffs) <= 0.1
    report(
        capsys,
        8,
        ok,
        f"max |I* - i_hat| {max(diffs):.4f} <= 0.1 over {len(interior)} interior cells",
    )


def test_criterion_09_almost_additivity(capsys, fib_S):
    """Loxodromic defect stays bounded in word length; engine matches SVD."""
    t0 = time.perf_counter()
    d5 = additivity_defect_stats(fib_S, 300, 5, r=0.05, eps=0.2, seed=0)
    d20 = additivity_defect_stats(fib_S, 300, 20, r=0.05, eps=0.2, seed=0)
    defect_ok = (
        d5["lox_pairs"] > 0
        and d20["lox_pairs"] > 0
        and d20["max_defect_lox"] <= d5["max_defect_lox"] + 0.5
    )
    cfg = WalkConfig(set=fib_S, n=30, samples=8, seed=0)
    cumw = _cumulative_weights(fib_S)
    worst = 0.0
    for w in range(8):
        got = run_walk(cfg, w)[-1].coords
        Y = np.eye(2)
        for t in _walker_indices(0, w, 30, cumw):
            Y = fib_S.gens[int(t)].entries @ Y
        truth = cartan_projection(Y).coords / 30.0
        worst = max(worst, float(np.max(np.abs(got - truth))))
    dt = time.perf_counter() - t0
    ok = defect_ok and worst <= 1e-6
    report(
        capsys,
        9,
        ok,
        f"lox defect len20 {d20['max_defect_lox']:.3f} <= len5 "
        f"{d5['max_defect_lox']:.3f} + 0.5 "
        f"({d5['lox_pairs']}/{d20['lox_pairs']} lox pairs), "
        f"walk-vs-SVD |err| {worst:.1e} <= 1e-6; {dt:.1f}s",
    )


def test_criterion_10_jsr_sanity(capsys):
    """Exact brackets on trivial sets; depth-monotone brackets on Fibonacci."""
    t0 = time.perf_counter()
    single = jsr_bounds([np.diag([3.0, 1.0 / 3.0])], depth=1)
    exact_single = (
        abs(single.lower - math.log(3.0)) < 1e-12
        and abs(single.upper - math.log(3.0)) < 1e-12
    )
    c, s = math.cos(0.4), math.sin(0.4)
    orth = jsr_bounds([[[c, -s], [s, c]], [[1.0, 0.0], [0.0, -1.0]]], depth=1)
    exact_orth = abs(orth.lower) < 1e-12 and abs(orth.upper) < 1e-12
    # two sweeps: Fibonacci (collapses exactly at depth 2) and a
    # rotation-stretch pair whose bracket narrows all the way to the
    # prune_delta floor — monotone in both cases
    c8, s8 = math.cos(0.8), math.sin(0.8)
    R = np.array([[c8, -s8], [s8, c8]])
    D = np.diag([1.4, 1.0 / 1.4])
    mono = True
    widths = {}
    for name, gens in (
        ("fib", matrix_set(FIB).entries_stack()),
        ("rot", [R @ D, D @ R]),
    ):
        lowers, uppers = [], []
        for depth in range(4, 17):
            b = jsr_bounds(gens, depth)
            lowers.append(b.lower)
            uppers.append(b.upper)
        mono = (
            mono
            and all(a <= b + 1e-12 for a, b in zip(lowers, lowers[1:]))
            and all(a >= b - 1e-12 for a, b in zip(uppers, uppers[1:]))
        )
        widths[name] = (uppers[0] - lowers[0], uppers[-1] - lowers[-1])
    dt = time.perf_counter() - t0
    ok = exact_single and exact_orth and mono and dt < 60.0
    report(
        capsys,
        10,
        ok,
        f"single exact ({single.lower:.6f}), orthogonal exact ({orth.upper:.1e}), "
        f"brackets monotone over depth 4..16 (widths: fib "
        f"{widths['fib'][0]:.4f}->{widths['fib'][1]:.4f}, rot-stretch "
        f"{widths['rot'][0]:.4f}->{widths['rot'][1]:.4f}); {dt:.1f}s",
    )
