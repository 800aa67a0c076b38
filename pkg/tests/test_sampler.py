import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metric_curve_lab.errors import BoxExit, NoRealPoints
from metric_curve_lab.poly2 import parse_poly
from metric_curve_lab.sampler import (
    BoundingBox,
    Sample,
    epsilon_sample,
    nearest_point_on_curve,
    project_to_curve,
    sample_with_count,
    seed_points,
    trace_component,
)

from conftest import CUSP, NODE


def covering_radius(P, A, box):
    """Largest distance from a dense reference sample to ``A``."""
    ref = epsilon_sample(P, box, 0.01)
    d = np.hypot(*(ref.all_points[:, None, :] - A.all_points[None, :, :]).transpose(2, 0, 1))
    return d.min(axis=1).max()


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_butterfly_chords_and_on_curve(butterfly, box, eps):
    A = epsilon_sample(butterfly, box, eps)
    assert A.chords().max() <= eps * (1 + 1e-9)
    f = np.abs(butterfly(A.all_points[:, 0], A.all_points[:, 1]))
    assert f.max() < 1e-9 * butterfly.scale(*A.all_points.T).max()
    assert all(A.closed)


def test_butterfly_is_covered(butterfly, box):
    A = epsilon_sample(butterfly, box, 0.1)
    assert covering_radius(butterfly, A, box) <= 0.1


def test_sample_grows_as_epsilon_halves(butterfly, box):
    n = [len(epsilon_sample(butterfly, box, 0.2 / 2**k)) for k in range(3)]
    assert n[0] < n[1] < n[2]
    assert 1.8 < n[2] / n[1] < 2.2


def test_circle_single_loop(circle, box):
    A = epsilon_sample(circle, box, 0.1)
    assert len(A.components) == 1 and A.closed == (True,)
    assert np.allclose(np.hypot(*A.all_points.T), 1.0)
    assert A.chords().max() <= 0.1 * (1 + 1e-9)


def test_no_real_points(box):
    with pytest.raises(NoRealPoints):
        epsilon_sample(parse_poly("x^2+y^2+1"), box, 0.1)


def test_bad_epsilon(circle, box):
    with pytest.raises(ValueError):
        epsilon_sample(circle, box, 0.0)


def test_line_leaves_box():
    P = parse_poly("y - (1/2)*x")
    A = epsilon_sample(P, BoundingBox(-1, 1, -1, 1), 0.1)
    assert A.closed == (False,)
    xs = A.all_points[:, 0]
    assert xs.min() <= -1 + 0.1 and xs.max() >= 1 - 0.1
    with pytest.raises(BoxExit):
        trace_component(P, (0.0, 0.0), 0.1, BoundingBox(-1, 1, -1, 1))


def test_cusp_arcs_stop_at_singular_point():
    P = parse_poly(CUSP)
    A = epsilon_sample(P, BoundingBox(-1, 1, -1, 1), 0.05, singular_pts=[(0.0, 0.0)])
    assert (0.0, 0.0) in [tuple(p) for p in A.singular_points]
    assert not any(A.closed)
    pts = A.all_points
    # the cusp is in the sample and its nearest neighbours are within epsilon
    d = np.hypot(*pts.T)
    assert np.sort(d)[0] == 0.0 and np.sort(d)[1] <= 0.05


def test_node_sample_has_four_branches_near_node(box):
    P = parse_poly(NODE)
    A = epsilon_sample(P, box, 0.05, singular_pts=[(0.0, 0.0)])
    near = A.all_points[(np.hypot(*A.all_points.T) < 0.06) & (np.hypot(*A.all_points.T) > 0)]
    angles = np.sort(np.arctan2(near[:, 1], near[:, 0]))
    assert len(near) >= 4
    assert np.ptp(angles) > math.pi


def test_seed_points_on_curve(butterfly, box):
    seeds = seed_points(butterfly, box, 32)
    assert seeds == sorted(seeds)
    for s in seeds:
        assert abs(butterfly(*s)) < 1e-9


def test_extra_seed_is_pinned_with_even_neighbours(butterfly, box):
    target = project_to_curve(butterfly, (1.0, -1.0))
    for eps in (0.1, 0.05):
        A = epsilon_sample(butterfly, box, eps, seeds=[target])
        d = np.hypot(*(A.all_points - target).T)
        i = int(d.argmin())
        assert d[i] < 1e-12
        nb = np.sort(np.hypot(*(A.all_points - A.all_points[i]).T))[1:3]
        assert np.all(nb <= eps * (1 + 1e-9)) and abs(nb[1] - nb[0]) < 0.01 * nb[0]


def test_sample_with_count(circle, box):
    A = sample_with_count(circle, box, 100)
    assert abs(len(A) - 100) <= 2


def test_json_round_trip(butterfly, box):
    A = epsilon_sample(butterfly, box, 0.2)
    B = Sample.from_dict(A.to_dict())
    assert np.array_equal(A.all_points, B.all_points) and A.closed == B.closed


def test_sampling_is_deterministic(butterfly, box):
    a = epsilon_sample(butterfly, box, 0.1).all_points
    b = epsilon_sample(butterfly, box, 0.1).all_points
    assert np.array_equal(a, b)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.1, 0.9))
def test_foot_point_on_ellipse(t, r):
    P = parse_poly("(1/4)*x^2+y^2-1")
    p = (r * 2 * math.cos(t) * 0.3 + 2.6 * math.cos(t), 1.3 * math.sin(t))
    q = nearest_point_on_curve(P, p, (2 * math.cos(t), math.sin(t)))
    assert abs(P(*q)) < 1e-10
    # p - q is normal: parallel to the gradient
    gx, gy = P.gradient(*q)
    assert abs((p[0] - q[0]) * gy - (p[1] - q[1]) * gx) < 1e-9 * (1 + math.hypot(gx, gy))
