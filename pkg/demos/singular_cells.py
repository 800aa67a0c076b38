"""Voronoi cells at singular points: a cusp and a node.

Run: python demos/singular_cells.py
"""
import numpy as np

from metric_curve_lab.delaunay import voronoi_diagram
from metric_curve_lab.poly2 import parse_poly
from metric_curve_lab.sampler import BoundingBox, epsilon_sample
from metric_curve_lab.solver import singular_points

# Cusp y^2 = x^3. With the cusp in the sample, its cell swallows the whole
# negative x-axis; the region is cut out by a quartic inequality.
probe = np.array([-0.05, 0.0])
for n in (10, 40):
    t = np.arange(1, n + 1) / n
    arms = np.concatenate([np.c_[t, t**1.5], np.c_[t, -(t**1.5)]])
    with_cusp = voronoi_diagram(np.vstack([[0.0, 0.0], arms]))
    without = voronoi_diagram(arms)
    d = np.sort(np.hypot(*(arms - probe).T))[:2]
    print(f"n={n}: probe in cusp cell: {with_cusp.cells[0].contains(probe)}; "
          f"without the cusp it is equidistant from two sites ({d[0]:.6f}, {d[1]:.6f})")

# Node of the limacon (x^2+y^2-x)^2 = (x^2+y^2)/4: four branches meet, and
# the node's cell closes down to a point.
P = parse_poly("(x^2+y^2-x)^2-(1/4)*(x^2+y^2)")
box = BoundingBox(-3, 3, -3, 3)
print("\nsingular points found:", singular_points(P, box))
for k in range(5):
    eps = 0.1 / 2**k
    A = epsilon_sample(P, box, eps, singular_pts=[(0.0, 0.0)])
    V = voronoi_diagram(A.all_points)
    print(f"eps={eps:<8g} node cell diameter {V.cells[V.locate((0, 0))].diameter:.5f}")
