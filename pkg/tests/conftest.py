import math

import numpy as np
import pytest

from metric_curve_lab.poly2 import BUTTERFLY, parse_poly
from metric_curve_lab.sampler import BoundingBox

ELLIPSE = "(1/4)*x^2+y^2-1"
CIRCLE = "x^2+y^2-1"
CUSP = "y^2-x^3"
NODE = "(x^2+y^2-x)^2-(1/4)*(x^2+y^2)"

_ACCEPTANCE_LINES = []


def record_acceptance(label: str, ok: bool, detail: str):
    _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    print(_ACCEPTANCE_LINES[-1])


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def box():
    return BoundingBox(-3.0, 3.0, -3.0, 3.0)


@pytest.fixture(scope="session")
def butterfly():
    return parse_poly(BUTTERFLY)


@pytest.fixture(scope="session")
def ellipse():
    return parse_poly(ELLIPSE)


@pytest.fixture(scope="session")
def circle():
    return parse_poly(CIRCLE)


def ellipse_limit_ray():
    """Origin and unit direction of the limiting cell at (sqrt7/2, 3/4) on x^2/4 + y^2 = 1."""
    o = np.array([3 * math.sqrt(7) / 8, 0.0])
    d = np.array([math.sqrt(7) / 4, 1.5])
    return o, d / np.linalg.norm(d)


def point_ray_distance(x, o, d) -> float:
    x = np.asarray(x, dtype=float)
    t = max(0.0, float((x - o) @ d))
    return float(np.linalg.norm(x - (o + t * d)))
