import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metric_curve_lab.delaunay import (
    delaunay_triangulate,
    lift,
    lower_hull_violations,
    triangulation_from_triangles,
    verify_lower_hull,
    voronoi_diagram,
    voronoi_dual,
)
from metric_curve_lab.errors import DegenerateInput


def empty_circle_violations(T, rel=1e-9):
    d = np.hypot(*(T.sites[None, :, :] - T.centers[:, None, :]).transpose(2, 0, 1))
    return int((d < T.radii[:, None] * (1 - rel)).sum())


def nearest_site_mismatches(V, probes, tie=1e-9):
    d = np.hypot(*(V.sites[None, :, :] - probes[:, None, :]).transpose(2, 0, 1))
    order = np.sort(d, axis=1)
    clear = order[:, 1] - order[:, 0] > tie * (1 + order[:, 1])
    nearest = d.argmin(axis=1)
    bad = 0
    for i, cell in enumerate(V.cells):
        inside = cell.contains_many(probes, tol=1e-10)
        bad += int(np.sum(clear & (inside != (nearest == i))))
    return bad


def test_unit_square_with_center():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.4)]
    T = delaunay_triangulate(pts)
    assert len(T.triangles) == 4
    assert verify_lower_hull(T)
    assert empty_circle_violations(T) == 0


@pytest.mark.parametrize("engine", ["qhull", "incremental"])
def test_engines_agree(engine):
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1, 1, (120, 2))
    T = delaunay_triangulate(pts, engine=engine)
    ref = delaunay_triangulate(pts, engine="qhull")
    key = lambda T: sorted(tuple(sorted(t)) for t in T.triangles.tolist())
    assert key(T) == key(ref)


def test_cocircular_grid_is_valid():
    g = np.array([(i, j) for i in range(6) for j in range(6)], dtype=float)
    for engine in ("qhull", "incremental"):
        T = delaunay_triangulate(g, engine=engine)
        assert len(T.triangles) == 2 * 25
        assert verify_lower_hull(T)
        assert empty_circle_violations(T) == 0


def test_points_on_circle():
    t = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    T = delaunay_triangulate(np.c_[np.cos(t), np.sin(t)])
    assert len(T.triangles) == 38
    assert np.allclose(T.radii, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=3, max_size=60, unique=True))
def test_random_integer_sites(raw):
    pts = np.array(raw, dtype=float)
    try:
        T = delaunay_triangulate(pts)
    except DegenerateInput:
        x = pts - pts[0]
        assert np.all(np.abs(x[:, 0] * x[-1, 1] - x[:, 1] * x[-1, 0]) == 0) or len(pts) < 3
        return
    assert verify_lower_hull(T)
    assert empty_circle_violations(T) == 0
    # Euler: triangles = 2n - 2 - h
    h = len(T.hull_edges())
    assert len(T.triangles) == 2 * len(pts) - 2 - h


def test_lifted_points_on_paraboloid():
    L = lift([(1.0, 2.0), (-3.0, 0.5)])
    assert L[0].z == 5.0 and L[1].z == 9.25


def test_corrupted_triangulation_fails_lower_hull():
    rhombus = [(-2.0, 0.0), (2.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
    good = delaunay_triangulate(rhombus)
    assert sorted(map(sorted, good.triangles.tolist())) == [[0, 2, 3], [1, 2, 3]]
    bad = triangulation_from_triangles(rhombus, [(0, 1, 2), (0, 3, 1)])
    assert verify_lower_hull(good)
    assert not verify_lower_hull(bad)
    assert lower_hull_violations(bad).tolist() == [1, 1]
    assert empty_circle_violations(bad) == 2


def test_rejects_bad_input():
    with pytest.raises(DegenerateInput):
        delaunay_triangulate([(0, 0), (1, 1)])
    with pytest.raises(DegenerateInput):
        delaunay_triangulate([(0, 0), (1, 1), (2, 2), (3, 3)])
    with pytest.raises(DegenerateInput):
        delaunay_triangulate([(0, 0), (1, 0), (0, 1), (1, 0)])
    with pytest.raises(DegenerateInput):
        delaunay_triangulate([(0, 0), (1, 0), (0, math.nan)])


def test_two_sites_give_a_line():
    V = voronoi_diagram([(0.0, 0.0), (2.0, 0.0)])
    assert len(V.edges) == 1 and V.edges[0].kind == "line"
    assert V.cells[0].contains((0.9, 5.0)) and not V.cells[0].contains((1.1, 5.0))


def test_collinear_sites():
    V = voronoi_diagram([(0.0, 0.0), (1.0, 1.0), (3.0, 3.0)])
    assert len(V.edges) == 2
    assert V.cells[1].contains((1.0, 1.0)) and not V.cells[1].contains((2.5, 2.5))


def test_voronoi_nearest_site_random():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, (200, 2))
    V = voronoi_diagram(pts)
    probes = rng.uniform(-2, 2, (2000, 2))
    assert nearest_site_mismatches(V, probes) == 0


def test_voronoi_vertex_equidistant():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, (60, 2))
    V = voronoi_diagram(pts)
    for e in V.edges:
        if e.kind == "segment" and not e.degenerate:
            for q in (e.start, e.end):
                da = np.hypot(*(q - pts[e.site_a]))
                db = np.hypot(*(q - pts[e.site_b]))
                assert da == pytest.approx(db, rel=1e-9)


def test_unbounded_cells_are_hull_sites():
    rng = np.random.default_rng(11)
    pts = rng.uniform(-1, 1, (80, 2))
    V = voronoi_dual(delaunay_triangulate(pts))
    hull = set(np.unique(V.triangulation.hull_edges()).tolist())
    assert {c.site for c in V.cells if not c.bounded} == hull


def test_cell_distance_and_diameter():
    V = voronoi_diagram([(0, 0), (2, 0), (0, 2), (2, 2), (1, 1)])
    c = V.cells[4]
    assert c.bounded and c.diameter == pytest.approx(2.0)
    assert c.distance((1.0, 1.0)) == 0.0
    assert c.distance((3.0, 1.0)) == pytest.approx(1.0)
