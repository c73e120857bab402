"""Support-body geometry: oracles and metric properties."""
import math

import numpy as np
import pytest

from jointspectrum.errors import (
    BadResolution,
    DegenerateBody,
    DirsetMismatch,
    EmptyInput,
)
from jointspectrum.geometry import (
    SupportBody,
    asymptotic_cone,
    body_from_dict,
    body_from_points,
    body_to_dict,
    contains,
    hausdorff_distance,
    interior_margin,
    make_directions,
    merge_bodies,
)

SQ2 = math.sqrt(2.0)


def seg(c, dirset):
    """d=2 segment from the origin to (c, -c)."""
    return body_from_points([np.zeros(2), np.array([c, -c])], dirset)


def test_directions_d2_forced_pair():
    ds = make_directions(2, 2, seed=9)
    u = np.array([1.0, -1.0]) / SQ2
    assert ds.resolution == 2
    assert np.allclose(ds.dirs, np.stack([u, -u]), atol=1e-15)
    # higher m is clamped: only two unit vectors exist in a line
    assert make_directions(2, 64, seed=0).resolution == 2


def test_directions_bad_resolution():
    with pytest.raises(BadResolution):
        make_directions(3, 3, seed=0)
    with pytest.raises(BadResolution):
        make_directions(3, 2, seed=0)
    with pytest.raises(BadResolution):
        make_directions(3, 9, seed=0)  # odd


@pytest.mark.parametrize("d,m", [(3, 8), (3, 128), (4, 12), (5, 16)])
def test_directions_invariants(d, m):
    ds = make_directions(d, m, seed=7)
    assert ds.dirs.shape == (m, d)
    assert np.allclose(np.linalg.norm(ds.dirs, axis=1), 1.0, atol=1e-12)
    assert np.all(np.abs(ds.dirs.sum(axis=1)) <= 1e-12)
    # negation closure by construction: second half is minus the first
    half = m // 2
    assert np.allclose(ds.dirs[half:], -ds.dirs[:half], atol=0.0)


def test_directions_deterministic():
    a = make_directions(3, 16, seed=123)
    b = make_directions(3, 16, seed=123)
    c = make_directions(3, 16, seed=124)
    assert np.array_equal(a.dirs, b.dirs)
    assert not np.array_equal(a.dirs, c.dirs)


def test_body_single_point():
    ds = make_directions(2, 2)
    p = np.array([0.3, -0.3])
    B = body_from_points([p], ds)
    assert np.allclose(B.h, ds.dirs @ p, atol=1e-15)
    assert contains(B, p, tol=0.0)
    assert hausdorff_distance(B, B) == 0.0


def test_body_segment_support_oracle():
    # witnesses (0,0) and (log2, -log2); h along (1,-1)/sqrt2 is sqrt2*log2
    ds = make_directions(2, 2)
    B = seg(math.log(2.0), ds)
    assert B.h[0] == pytest.approx(SQ2 * math.log(2.0), abs=1e-12)
    assert B.h[1] == pytest.approx(0.0, abs=1e-15)


def test_body_duplicates_are_idempotent():
    ds = make_directions(3, 16)
    rng = np.random.default_rng(0)
    raw = rng.normal(size=(6, 3))
    pts = [p - p.mean() for p in raw]
    a = body_from_points(pts, ds)
    b = body_from_points(pts + pts[:3], ds)
    assert np.array_equal(a.h, b.h)


def test_body_empty_input():
    with pytest.raises(EmptyInput):
        body_from_points([], make_directions(2, 2))


def test_hausdorff_dilation():
    ds = make_directions(3, 32, seed=1)
    rng = np.random.default_rng(1)
    pts = [p - p.mean() for p in rng.normal(size=(5, 3))]
    A = body_from_points(pts, ds)
    B = SupportBody(dirset=ds, h=A.h + 0.25, points=None)
    assert hausdorff_distance(A, B) == pytest.approx(0.25, abs=1e-12)


def test_hausdorff_d2_segments():
    ds = make_directions(2, 2)
    a, b = 0.7, 0.2
    # both segments reach max along +u; raw-h distance is sqrt2*|a-b|
    assert hausdorff_distance(seg(a, ds), seg(b, ds)) == pytest.approx(
        SQ2 * abs(a - b), abs=1e-12
    )


def test_hausdorff_mismatch():
    A = body_from_points([np.zeros(3)], make_directions(3, 8, seed=0))
    B = body_from_points([np.zeros(3)], make_directions(3, 8, seed=1))
    with pytest.raises(DirsetMismatch):
        hausdorff_distance(A, B)


def test_hausdorff_pseudometric():
    ds = make_directions(3, 16, seed=3)
    rng = np.random.default_rng(3)
    bodies = []
    for _ in range(6):
        pts = [p - p.mean() for p in rng.normal(size=(4, 3))]
        bodies.append(body_from_points(pts, ds))
    for A in bodies:
        for B in bodies:
            dab = hausdorff_distance(A, B)
            assert dab == hausdorff_distance(B, A)
            for C in bodies:
                assert dab <= hausdorff_distance(A, C) + hausdorff_distance(C, B) + 1e-12


def test_body_monotone_under_more_points():
    ds = make_directions(3, 16, seed=5)
    rng = np.random.default_rng(5)
    pts = [p - p.mean() for p in rng.normal(size=(8, 3))]
    small = body_from_points(pts[:4], ds)
    big = body_from_points(pts, ds)
    assert np.all(small.h <= big.h + 1e-15)


def test_contains_convex_combinations():
    ds = make_directions(3, 16, seed=6)
    rng = np.random.default_rng(6)
    pts = [p - p.mean() for p in rng.normal(size=(5, 3))]
    B = body_from_points(pts, ds)
    for _ in range(50):
        w = rng.random(len(pts))
        w /= w.sum()
        x = np.einsum("i,ij->j", w, np.asarray(pts))
        assert contains(B, x, tol=1e-12)


def test_contains_rejects_outside():
    ds = make_directions(2, 2)
    B = seg(0.5, ds)
    far = np.array([1.0, -1.0])
    assert not contains(B, far, tol=1e-6)
    assert interior_margin(B, far) < 0


def test_interior_margin_oracle():
    # segment {(0,0),(c,-c)} with x = (c/2, -c/2): both directions give
    # margin sqrt2*c/2 by direct inner products
    ds = make_directions(2, 2)
    c = 0.8
    B = seg(c, ds)
    x = np.array([c / 2.0, -c / 2.0])
    assert interior_margin(B, x) == pytest.approx(SQ2 * c / 2.0, abs=1e-12)
    # a vertex witness has zero margin
    assert interior_margin(B, np.array([c, -c])) == pytest.approx(0.0, abs=1e-12)


def test_merge_is_union_hull():
    ds = make_directions(3, 16, seed=8)
    rng = np.random.default_rng(8)
    pts = [p - p.mean() for p in rng.normal(size=(8, 3))]
    merged = merge_bodies(body_from_points(pts[:4], ds), body_from_points(pts[4:], ds))
    assert np.allclose(merged.h, body_from_points(pts, ds).h, atol=1e-12)


def test_cone_scale_invariance():
    ds = make_directions(3, 16, seed=9)
    rng = np.random.default_rng(9)
    pts = [p - p.mean() + np.array([1.0, 0.0, -1.0]) for p in 0.1 * rng.normal(size=(5, 3))]
    B = body_from_points(pts, ds)
    # scaling witnesses by a power of two is exact in floating point
    B4 = body_from_points([4.0 * p for p in B.points], ds)
    assert np.array_equal(asymptotic_cone(B).h, asymptotic_cone(B4).h)
    B3 = body_from_points([3.0 * p for p in B.points], ds)
    assert np.allclose(asymptotic_cone(B).h, asymptotic_cone(B3).h, atol=1e-12)


def test_cone_single_ray():
    ds = make_directions(2, 2)
    B = body_from_points([np.array([0.2, -0.2]), np.array([0.9, -0.9])], ds)
    cone = asymptotic_cone(B)
    u = np.array([1.0, -1.0]) / SQ2
    assert np.allclose(cone.h, ds.dirs @ u, atol=1e-12)


def test_cone_degenerate():
    ds = make_directions(2, 2)
    B = body_from_points([np.zeros(2)], ds)
    with pytest.raises(DegenerateBody):
        asymptotic_cone(B)


def test_body_json_round_trip():
    ds = make_directions(3, 16, seed=10)
    rng = np.random.default_rng(10)
    pts = [p - p.mean() for p in rng.normal(size=(5, 3))]
    B = body_from_points(pts, ds)
    C = body_from_dict(body_to_dict(B))
    assert np.allclose(B.h, C.h, atol=1e-15)
    assert np.array_equal(B.dirset.dirs, C.dirset.dirs)
    assert hausdorff_distance(B, C) == 0.0
