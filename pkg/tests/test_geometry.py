import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from affinecells.geometry import (
    DegenerateRegionError,
    EmptyRegionError,
    Halfspace,
    HPolytope,
    Hyperplane,
    add_halfspace,
    bounding_box,
    chebyshev_center,
    enumerate_vertices_2d,
    hyperplane_intersects,
    is_feasible,
    polygon_area,
    polytope_from_json,
    polytope_to_json,
    remove_redundant,
)

BOX2 = HPolytope.box(2)


def random_polytope(rng, dim, n_cuts):
    """Unit box plus random cuts through its interior; may be degenerate."""
    poly = HPolytope.box(dim)
    for _ in range(n_cuts):
        a = rng.normal(size=dim)
        a /= np.linalg.norm(a)
        p = rng.uniform(-0.8, 0.8, size=dim)
        poly = poly.add(Halfspace(a, -float(a @ p)))
    return poly


# -- feasibility and Chebyshev ------------------------------------------------


def test_box_feasible():
    assert is_feasible(BOX2)


def test_contradiction_infeasible():
    poly = HPolytope.from_arrays([[1, 0], [-1, 0]], [-1, 0])
    assert not is_feasible(poly)


def test_facet_slice_feasible_but_flat():
    # x1 >= 0 and -x1 >= 0 inside the box: nonempty, measure zero
    poly = HPolytope.from_arrays([[1, 0], [-1, 0], [0, 1], [0, -1]], [0, 0, 1, 1])
    assert is_feasible(poly)
    _, r = chebyshev_center(poly)
    assert r == pytest.approx(0.0, abs=1e-9)


def test_chebyshev_box():
    c, r = chebyshev_center(BOX2)
    assert np.allclose(c, [0, 0], atol=1e-9)
    assert r == pytest.approx(1.0, abs=1e-9)


def test_chebyshev_triangle():
    # inradius of the right triangle with legs 1: 1 - 1/sqrt(2)
    tri = HPolytope.from_arrays([[1, 0], [0, 1], [-1, -1]], [0, 0, 1])
    c, r = chebyshev_center(tri)
    expect = 1.0 - 1.0 / np.sqrt(2.0)
    assert r == pytest.approx(expect, abs=1e-9)
    assert np.allclose(c, [expect, expect], atol=1e-8)


def test_chebyshev_empty_raises():
    poly = HPolytope.from_arrays([[1, 0], [-1, 0]], [-2, 0])
    with pytest.raises(EmptyRegionError):
        chebyshev_center(poly)


def test_chebyshev_unbounded_raises():
    poly = HPolytope.from_arrays([[1, 0]], [0])
    with pytest.raises(ValueError):
        chebyshev_center(poly)


# -- hyperplane intersection --------------------------------------------------


def test_intersects_center_line():
    assert hyperplane_intersects(BOX2, Hyperplane(np.array([1.0, 0.0]), 0.0))


def test_intersects_outside_line():
    assert not hyperplane_intersects(BOX2, Hyperplane(np.array([1.0, 0.0]), -2.0))


def test_tangent_facet_does_not_intersect():
    h = Hyperplane(np.array([1.0, 0.0]), -1.0)  # x1 = 1, a facet of the box
    assert not hyperplane_intersects(BOX2, h)
    # grid oracle: no interior sign change
    xs = np.linspace(-0.999, 0.999, 101)
    grid = np.stack(np.meshgrid(xs, xs), axis=-1).reshape(-1, 2)
    signs = np.sign(grid @ h.normal + h.offset)
    assert len(np.unique(signs)) == 1


# -- add / remove constraints -------------------------------------------------


def test_add_halfspace_restricts():
    half = add_halfspace(BOX2, Halfspace(np.array([1.0, 0.0]), 0.0))
    assert half.n_rows == 5
    assert BOX2.n_rows == 4  # input unmodified
    c, r = chebyshev_center(half)
    assert r == pytest.approx(0.5, abs=1e-9)
    assert c[0] == pytest.approx(0.5, abs=1e-8)


def test_add_halfspace_can_empty():
    gone = add_halfspace(BOX2, Halfspace(np.array([1.0, 0.0]), -5.0))
    assert not is_feasible(gone)


def test_remove_redundant_drops_loose_row():
    loose = add_halfspace(BOX2, Halfspace(np.array([1.0, 0.0]), 2.0))  # x1 >= -2
    reduced = remove_redundant(loose)
    assert reduced.n_rows == 4


def test_remove_redundant_keeps_tight_set():
    reduced = remove_redundant(BOX2)
    assert reduced.n_rows == 4
    got = {(tuple(np.round(h.normal, 9)), round(h.offset, 9)) for h in reduced.halfspaces}
    want = {(tuple(np.round(h.normal, 9)), round(h.offset, 9)) for h in BOX2.halfspaces}
    assert got == want


def test_remove_redundant_duplicate_row():
    dup = add_halfspace(BOX2, Halfspace(np.array([1.0, 0.0]), 1.0))  # copy of x1 >= -1
    reduced = remove_redundant(dup)
    assert reduced.n_rows == 4
    # set equality certified by 2D vertex enumeration
    v0 = enumerate_vertices_2d(BOX2)
    v1 = enumerate_vertices_2d(reduced)
    assert np.allclose(np.sort(v0, axis=0), np.sort(v1, axis=0), atol=1e-9)


def test_remove_redundant_with_bbox_prefilter():
    rng = np.random.default_rng(11)
    poly = random_polytope(rng, 3, 6)
    lo, hi = np.full(3, -1.0), np.full(3, 1.0)
    plain = remove_redundant(poly)
    fast = remove_redundant(poly, bbox=(lo, hi))
    pts = rng.uniform(-1, 1, size=(2000, 3))
    for p in (plain, fast):
        inside_ref = np.all(poly.A @ pts.T + poly.b[:, None] >= -1e-9, axis=0)
        inside_red = np.all(p.A @ pts.T + p.b[:, None] >= -1e-9, axis=0)
        assert np.array_equal(inside_ref, inside_red)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 6))
def test_redundancy_removal_preserves_set(seed, dim, n_cuts):
    rng = np.random.default_rng(seed)
    poly = random_polytope(rng, dim, n_cuts)
    if not is_feasible(poly):
        return
    reduced = remove_redundant(poly)
    pts = rng.uniform(-1.2, 1.2, size=(10_000, dim))
    inside_before = np.all(poly.A @ pts.T + poly.b[:, None] >= -1e-9, axis=0)
    inside_after = np.all(reduced.A @ pts.T + reduced.b[:, None] >= -1e-9, axis=0)
    assert np.array_equal(inside_before, inside_after)


# -- invariants ---------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(0, 5))
def test_chebyshev_ball_inside(seed, dim, n_cuts):
    rng = np.random.default_rng(seed)
    poly = random_polytope(rng, dim, n_cuts)
    try:
        center, radius = chebyshev_center(poly)
    except EmptyRegionError:
        return
    if radius <= 0:
        return
    # unit rows: slack at the center must cover the radius
    assert np.min(poly.margins(center)) >= radius - 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_intersection_gives_two_fat_sides(seed, dim):
    rng = np.random.default_rng(seed)
    poly = random_polytope(rng, dim, int(rng.integers(0, 4)))
    try:
        center, radius = chebyshev_center(poly)
    except EmptyRegionError:
        return
    if radius <= 1e-6:
        return
    a = rng.normal(size=dim)
    a /= np.linalg.norm(a)
    p = rng.uniform(-0.9, 0.9, size=dim)
    h = Hyperplane(a, -float(a @ p))
    if not hyperplane_intersects(poly, h):
        return
    for sign in (+1, -1):
        side = add_halfspace(poly, h.side(sign))
        _, r = chebyshev_center(side)
        assert r > 1e-8


# -- 2D vertices --------------------------------------------------------------


def test_vertices_box():
    v = enumerate_vertices_2d(BOX2)
    assert v.shape == (4, 2)
    assert polygon_area(v) == pytest.approx(4.0, abs=1e-9)
    assert {tuple(np.round(p)) for p in v} == {(-1, -1), (1, -1), (1, 1), (-1, 1)}


def test_vertices_half_box():
    half = add_halfspace(BOX2, Halfspace(np.array([1.0, 0.0]), 0.0))
    v = enumerate_vertices_2d(half)
    assert {tuple(np.round(p, 9)) for p in v} == {(0, -1), (1, -1), (1, 1), (0, 1)}


def test_vertices_triangle():
    tri = HPolytope.from_arrays([[1, 0], [0, 1], [-1, -1]], [0, 0, 1])
    v = enumerate_vertices_2d(tri)
    assert {tuple(np.round(p, 9)) for p in v} == {(0, 0), (1, 0), (0, 1)}


def test_vertices_degenerate_raises():
    flat = HPolytope.from_arrays([[1, 0], [-1, 0], [0, 1], [0, -1]], [0, 0, 1, 1])
    with pytest.raises(DegenerateRegionError):
        enumerate_vertices_2d(flat)


def test_vertices_ccw_order():
    v = enumerate_vertices_2d(BOX2)
    assert polygon_area(v) > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_area_matches_monte_carlo(seed, n_cuts):
    rng = np.random.default_rng(seed)
    poly = random_polytope(rng, 2, n_cuts)
    try:
        v = enumerate_vertices_2d(poly)
    except (EmptyRegionError, DegenerateRegionError):
        return
    area = polygon_area(v)
    pts = rng.uniform(-1, 1, size=(200_000, 2))
    inside = np.all(poly.A @ pts.T + poly.b[:, None] >= 0, axis=0)
    mc = 4.0 * inside.mean()
    assert area == pytest.approx(mc, rel=0.01, abs=0.01)


# -- interchange --------------------------------------------------------------


def test_json_round_trip():
    doc = polytope_to_json(BOX2)
    poly = polytope_from_json(json.loads(json.dumps(doc)))
    assert poly.dim == 2
    assert np.allclose(poly.A, BOX2.A)
    assert np.allclose(poly.b, BOX2.b)


def test_json_rejects_bad_rows():
    with pytest.raises(ValueError):
        polytope_from_json({"dim": 2, "A": [[1.0]], "b": [0.0]})
    with pytest.raises(ValueError):
        polytope_from_json({"dim": 2, "A": [[1.0, float("nan")]], "b": [0.0]})
    with pytest.raises(ValueError):
        polytope_from_json({"dim": 2, "A": [[1.0, 0.0]], "b": []})


def test_bounding_box():
    lo, hi = bounding_box(BOX2)
    assert np.allclose(lo, [-1, -1], atol=1e-9)
    assert np.allclose(hi, [1, 1], atol=1e-9)
