"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from metric_curve_lab.delaunay import verify_lower_hull, voronoi_diagram
from metric_curve_lab.features import bottleneck_candidates, classify_edges, medial_axis_short_edges
from metric_curve_lab.poly2 import BUTTERFLY, critical_curvature_poly, curvature, parse_poly
from metric_curve_lab.reach import (
    Probe,
    convergence_experiment,
    reach_delaunay,
    reach_exact,
    reach_voronoi_details,
)
from metric_curve_lab.sampler import BoundingBox, epsilon_sample

from conftest import CIRCLE, ELLIPSE, NODE, ellipse_limit_ray, point_ray_distance, record_acceptance
from test_delaunay import empty_circle_violations, nearest_site_mismatches

BOX = BoundingBox(-3.0, 3.0, -3.0, 3.0)


def check(label, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    record_acceptance(label, ok, f"{detail}; {elapsed:.1f}s (limit {limit:.0f}s)")
    assert ok, detail


def test_1_ellipse_ground_truth():
    t0 = time.perf_counter()
    P = parse_poly(ELLIPSE)
    errs = []
    for x in (2.0, -2.0):
        cd = curvature(P, (x, 0.0))
        errs += [abs(cd.curvature - 2.0), abs(abs(cd.center.x) - 1.5), abs(cd.center.y)]
    A = epsilon_sample(P, BOX, 0.02)
    V = voronoi_diagram(A.all_points)
    M = medial_axis_short_edges(V, classify_edges(V, P), A.epsilon)
    ends = M.segments().reshape(-1, 2)
    off = np.hypot(np.maximum(np.abs(ends[:, 0]) - 1.5, 0.0), ends[:, 1]).max()
    elapsed = time.perf_counter() - t0
    check("1 ellipse ground truth", max(errs) <= 1e-12 and off <= 0.02 and len(ends) > 0,
          f"curvature/center error {max(errs):.1e}, medial offset {off:.4f} <= 0.02", elapsed, 5)


@pytest.fixture(scope="module")
def butterfly_reach():
    t0 = time.perf_counter()
    P = parse_poly(BUTTERFLY)
    A = epsilon_sample(P, BOX, 0.05)
    r = reach_exact(P, A, BOX, estimators=False)
    from metric_curve_lab.solver import real_bottlenecks, real_critical_curvature

    crit = real_critical_curvature(P, A)
    bott = real_bottlenecks(P, A)
    return P, A, r, crit, bott, time.perf_counter() - t0


def test_2_butterfly_exact_pipeline(butterfly_reach):
    P, A, r, crit, bott, elapsed = butterfly_reach
    kmax = max(c.curvature for c in crit.points)
    res = max(b.residual_norm for b in bott.pairs)
    ok = (
        abs(r.q - 0.104) <= 0.002
        and abs(kmax - 9.65) <= 0.05
        and abs(r.rho - 0.503) <= 0.005
        and abs(r.tau_exact - 0.104) <= 0.002
        and len(bott.pairs) == 22
        and res < 1e-10
        and len(crit.points) in (11, 12)
    )
    detail = (f"q={r.q:.4f} kmax={kmax:.3f} rho={r.rho:.4f} tau={r.tau_exact:.4f} "
              f"pairs={len(bott.pairs)} (residual {res:.1e}) critical={len(crit.points)}")
    check("2 butterfly exact pipeline", ok, detail, elapsed, 60)


def test_3_degree_cross_checks(butterfly_reach):
    t0 = time.perf_counter()
    P, _, _, _, bott, _ = butterfly_reach
    d = P.degree
    G = critical_curvature_poly(P)
    ordered = d**4 - 5 * d**2 + 4 * d
    ok = d == 4 and G.degree == 6 * d - 10 == 14 and 6 * d * d - 10 * d == 56
    ok = ok and ordered == 192 and len(bott.pairs) <= ordered // 2 == 96
    check("3 degree cross-checks", ok,
          f"deg G={G.degree} (6d-10=14), pairs {len(bott.pairs)} <= {ordered}/2", time.perf_counter() - t0, 5)


def test_4_voronoi_reach_butterfly():
    t0 = time.perf_counter()
    P = parse_poly(BUTTERFLY)
    A = epsilon_sample(P, BOX, 0.02)
    det = reach_voronoi_details(A, P)
    narrow = det.candidates[0].width
    elapsed = time.perf_counter() - t0
    ok = len(A) >= 1000 and abs(det.tau - 0.104) <= 0.1 * 0.104 and abs(narrow - 0.503) <= 0.02
    check("4 Voronoi reach estimate", ok,
          f"{len(A)} points, tau_voronoi={det.tau:.4f}, narrowest candidate={narrow:.4f}", elapsed, 30)


def test_5_delaunay_reach():
    t0 = time.perf_counter()
    out, ok = [], True
    for name, text, tau, eps in (("circle", CIRCLE, 1.0, 0.01), ("ellipse", ELLIPSE, 0.5, 0.01),
                                 ("butterfly", BUTTERFLY, 0.1036, 0.02)):
        A = epsilon_sample(parse_poly(text), BOX, eps)
        est = reach_delaunay(A)
        ok &= abs(est - tau) <= 0.1 * tau
        out.append(f"{name} {est:.4f}/{tau}")
    check("5 Delaunay reach estimate", ok, ", ".join(out), time.perf_counter() - t0, 30)


def _decreasing(v):
    v = [x for x in v if x == x]
    return all(b < a for a, b in zip(v, v[1:]))


def test_6_convergence_suite():
    t0 = time.perf_counter()
    P = parse_poly(BUTTERFLY)
    rows = convergence_experiment(P, BOX, 0.1, 4)
    notes, ok = [], True
    # (a) Wijsman profiles are Cauchy with shrinking successive differences
    for j in range(5):
        w = [r.metrics[f"wijsman_{j}"] for r in rows]
        diffs = np.abs(np.diff(w))
        ok &= _decreasing(diffs)
    notes.append("wijsman ok" if ok else "wijsman FAIL")
    # (b) the two largest Delaunay triangles persist and their self-distance shrinks
    tri = [r.metrics["triangles_hausdorff"] for r in rows]
    radii = np.array([[r.metrics[f"triangle_radius_{k}"] for k in range(2)] for r in rows])
    # persistence: consecutive rows match each triangle within 2% of its size
    persist = all(h <= 0.02 * radii[k].min() for k, h in enumerate(tri[:-1]))
    ok_b = _decreasing(tri) and persist
    notes.append(f"triangles {['%.4f' % x for x in tri[:-1]]}")
    # (c) medial approximation self-distance shrinks
    med = [r.metrics["medial_hausdorff"] for r in rows]
    ok_c = _decreasing(med)
    notes.append(f"medial {['%.5f' % x for x in med[:-1]]}")
    # (d) ellipse probe against the closed-form limit ray
    E = parse_poly(ELLIPSE)
    site = (math.sqrt(7) / 2, 0.75)
    o, d = ellipse_limit_ray()
    ref = point_ray_distance((1.0, 1.0), o, d)
    erows = convergence_experiment(E, BOX, 0.1, 4, probes=[Probe((1.0, 1.0), site)])
    err = [abs(r.metrics["wijsman_0"] - ref) for r in erows]
    ok_d = _decreasing(err) and err[-1] <= erows[-1].epsilon
    notes.append(f"ellipse probe error {err[-1]:.5f} vs limit {ref:.5f}")
    check("6 convergence suite", ok and ok_b and ok_c and ok_d, "; ".join(notes), time.perf_counter() - t0, 120)


def _structural_inputs():
    rng = np.random.default_rng(0)
    yield "random", rng.uniform(-1, 1, (300, 2))
    yield "grid", np.array([(i, j) for i in range(12) for j in range(12)], dtype=float)
    yield "circle", epsilon_sample(parse_poly(CIRCLE), BOX, 0.05).all_points
    yield "ellipse", epsilon_sample(parse_poly(ELLIPSE), BOX, 0.1).all_points
    yield "butterfly", epsilon_sample(parse_poly(BUTTERFLY), BOX, 0.2).all_points
    yield "node", epsilon_sample(parse_poly(NODE), BOX, 0.05, singular_pts=[(0.0, 0.0)]).all_points
    yield "cusp", _cusp_sample(40, with_origin=True)


def test_7_structural_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    ok, notes = True, []
    for name, pts in _structural_inputs():
        assert len(pts) <= 300, name
        V = voronoi_diagram(pts)
        T = V.triangulation
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = 0.25 * (hi - lo)
        probes = rng.uniform(lo - pad, hi + pad, (10_000, 2))
        bad = (empty_circle_violations(T), int(not verify_lower_hull(T)), nearest_site_mismatches(V, probes))
        ok &= bad == (0, 0, 0)
        notes.append(f"{name}({len(pts)})" + ("" if bad == (0, 0, 0) else f"!{bad}"))
    check("7 structural oracles", ok, "empty circle, lower hull, nearest site: " + " ".join(notes),
          time.perf_counter() - t0, 60)


def _cusp_sample(n, with_origin):
    t = np.arange(1, n + 1) / n
    pts = np.concatenate([np.c_[t, t**1.5], np.c_[t, -(t**1.5)]])
    return np.vstack([[0.0, 0.0], pts]) if with_origin else pts


def _cusp_cell(x, y):
    return 27 * y**4 + 128 * x**3 + 72 * x * y**2 + 32 * x**2 + y**2 + 2 * x


def test_8_singular_behaviour():
    t0 = time.perf_counter()
    probe = np.array([-0.05, 0.0])
    ok = _cusp_cell(*probe) <= 0
    notes = [f"quartic at probe {_cusp_cell(*probe):.4f}"]
    for n in (10, 20, 40, 80):
        V = voronoi_diagram(_cusp_sample(n, True))
        ok &= V.cells[0].contains(probe) and V.locate(probe) == 0
        W = voronoi_diagram(_cusp_sample(n, False))
        d = np.hypot(*(W.sites - probe).T)
        i, j = np.argsort(d)[:2]
        split = (abs(d[i] - d[j]) <= 1e-12 and np.allclose(W.sites[i], W.sites[j] * [1, -1])
                 and W.cells[i].contains(probe, 1e-12) and W.cells[j].contains(probe, 1e-12))
        ok &= split
    notes.append("origin cell holds probe; split without origin" if ok else "cusp FAIL")
    P = parse_poly(NODE)
    diam = []
    for k in range(5):
        eps = 0.1 / 2**k
        A = epsilon_sample(P, BOX, eps, singular_pts=[(0.0, 0.0)])
        V = voronoi_diagram(A.all_points)
        diam.append((eps, V.cells[V.locate((0.0, 0.0))].diameter))
    node_ok = _decreasing([dm for _, dm in diam]) and diam[-1][1] <= 2 * diam[-1][0]
    notes.append("node cell diameters " + " ".join(f"{dm:.4f}" for _, dm in diam))
    check("8 singular behaviour", ok and node_ok, "; ".join(notes), time.perf_counter() - t0, 30)
