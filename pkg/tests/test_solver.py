import math

import numpy as np
import pytest

from metric_curve_lab.errors import DegreeError, NoConvergence, SingularJacobian
from metric_curve_lab.poly2 import bottleneck_residual, critical_curvature_poly, curvature, parse_poly
from metric_curve_lab.sampler import BoundingBox, epsilon_sample
from metric_curve_lab.solver import (
    newton_refine,
    real_bottlenecks,
    real_critical_curvature,
    singular_points,
)

from conftest import CUSP, NODE


@pytest.fixture(scope="module")
def butterfly_solved(butterfly, box):
    A = epsilon_sample(butterfly, box, 0.05)
    return A, real_critical_curvature(butterfly, A), real_bottlenecks(butterfly, A)


def test_newton_sqrt2():
    x = newton_refine(lambda v: (np.array([v[0] ** 2 - 2]), np.array([[2 * v[0]]])), [1.0], tol=1e-15)
    assert x[0] == pytest.approx(math.sqrt(2), abs=1e-12)


def test_newton_singular_jacobian():
    with pytest.raises((SingularJacobian, NoConvergence)):
        newton_refine(lambda v: (np.array([v[0] ** 2 + 1]), np.array([[2 * v[0]]])), [0.0])


def test_newton_rejects_nonsquare():
    with pytest.raises(ValueError):
        newton_refine(lambda v: (np.zeros(2), np.zeros((2, 1))), [0.0])


def test_butterfly_critical_points(butterfly, butterfly_solved):
    _, crit, _ = butterfly_solved
    assert len(crit.points) in (11, 12)
    assert len(crit.points) <= 6 * 16 - 10 * 4
    G = critical_curvature_poly(butterfly)
    for c in crit.points:
        assert abs(butterfly(*c.p)) < 1e-9 * butterfly.scale(*c.p) and abs(G(*c.p)) < 1e-6 * G.scale(*c.p)
        assert c.radius == pytest.approx(curvature(butterfly, c.p, 1e-8).radius, rel=1e-9)
    assert crit.q == pytest.approx(0.104, abs=0.002)
    assert max(c.curvature for c in crit.points) == pytest.approx(9.65, abs=0.05)


def test_butterfly_q_against_dense_sweep(butterfly, box, butterfly_solved):
    """Brute force: smallest radius over a dense sample bounds q from above and is close to it."""
    _, crit, _ = butterfly_solved
    D = epsilon_sample(butterfly, box, 0.004).all_points
    radii = [curvature(butterfly, p, 1e-8).radius for p in D]
    assert min(radii) >= crit.q - 1e-9
    assert min(radii) - crit.q < 1e-3


def test_butterfly_bottlenecks(butterfly, butterfly_solved):
    _, _, bott = butterfly_solved
    assert len(bott.pairs) == 22
    assert len(bott.pairs) <= (4**4 - 5 * 16 + 16) // 2
    for b in bott.pairs:
        assert b.residual_norm < 1e-10
        assert np.max(np.abs(bottleneck_residual(butterfly, b.x, b.y))) < 1e-9
        assert b.width == pytest.approx(math.dist(b.x, b.y))
    assert bott.rho == pytest.approx(0.503, abs=0.005)


def test_bottlenecks_stable_under_refinement(butterfly, box, butterfly_solved):
    _, _, coarse = butterfly_solved
    fine = real_bottlenecks(butterfly, epsilon_sample(butterfly, box, 0.025))
    assert len(fine.pairs) == len(coarse.pairs)
    a = np.array(sorted(b.width for b in coarse.pairs))
    b = np.array(sorted(b.width for b in fine.pairs))
    assert np.allclose(a, b, atol=1e-9)


def test_bottleneck_pairs_are_unordered(butterfly_solved):
    _, _, bott = butterfly_solved
    keys = {frozenset((tuple(np.round(b.x, 6)), tuple(np.round(b.y, 6)))) for b in bott.pairs}
    assert len(keys) == len(bott.pairs)


def test_critical_stable_with_box_resampling(butterfly, box):
    A = epsilon_sample(butterfly, box, 0.1)
    crit = real_critical_curvature(butterfly, A, box=box)
    assert len(crit.points) == 12


def test_ellipse(ellipse, box):
    A = epsilon_sample(ellipse, box, 0.05)
    crit = real_critical_curvature(ellipse, A)
    pts = sorted((round(c.p.x, 9) + 0.0, round(c.p.y, 9) + 0.0) for c in crit.points)
    assert pts == [(-2.0, 0.0), (0.0, -1.0), (0.0, 1.0), (2.0, 0.0)]
    assert crit.q == pytest.approx(0.5, abs=1e-12)
    bott = real_bottlenecks(ellipse, A)
    assert sorted(round(b.width, 9) for b in bott.pairs) == [2.0, 4.0]
    assert bott.rho == pytest.approx(2.0, abs=1e-12)


def test_circle_is_degenerate_family(circle, box):
    A = epsilon_sample(circle, box, 0.1)
    crit = real_critical_curvature(circle, A)
    assert crit.points == [] and len(crit.families) == 1
    assert crit.q == pytest.approx(1.0, abs=1e-9)
    bott = real_bottlenecks(circle, A)
    assert bott.rho == pytest.approx(2.0, abs=1e-9)
    assert bott.families


def test_line_has_no_curvature_polynomial():
    P = parse_poly("x + y - 1")
    A = epsilon_sample(P, BoundingBox(-1, 1, -1, 1), 0.2)
    with pytest.raises(DegreeError):
        real_critical_curvature(P, A)


def test_random_quartic_respects_degree_bounds():
    rng = np.random.default_rng(2024)
    terms = {(4, 0): 1, (0, 4): 1, (2, 2): 0.5}
    for i in range(4):
        for j in range(4 - i):
            terms[(i, j)] = float(np.round(rng.uniform(-1, 1), 3))
    terms[(0, 0)] = -1.0
    from metric_curve_lab.poly2 import Poly2

    P = Poly2.from_terms(terms)
    box = BoundingBox(-3, 3, -3, 3)
    A = epsilon_sample(P, box, 0.05)
    crit = real_critical_curvature(P, A)
    assert 4 <= len(crit.points) <= 56
    bott = real_bottlenecks(P, A)
    assert 1 <= len(bott.pairs) <= 96


def test_singular_points():
    box = BoundingBox(-2, 2, -2, 2)
    cusp = singular_points(parse_poly(CUSP), box)
    assert len(cusp) == 1 and math.hypot(*cusp[0]) < 1e-6
    node = singular_points(parse_poly(NODE), box)
    assert len(node) == 1 and math.hypot(*node[0]) < 1e-9
    assert singular_points(parse_poly("x^4 - x^2*y^2 + y^4 - 4*x^2 - 2*y^2 - x - 4*y + 1"), box) == []


def test_thread_count_does_not_change_results(butterfly, box, monkeypatch):
    A = epsilon_sample(butterfly, box, 0.1)
    monkeypatch.setenv("METRIC_CURVE_LAB_THREADS", "1")
    one = real_bottlenecks(butterfly, A)
    monkeypatch.setenv("METRIC_CURVE_LAB_THREADS", "4")
    four = real_bottlenecks(butterfly, A)
    assert [(b.x, b.y) for b in one.pairs] == [(b.x, b.y) for b in four.pairs]
