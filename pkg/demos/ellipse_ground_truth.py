"""The ellipse x^2/4 + y^2 = 1 has everything in closed form; compare.

Run: python demos/ellipse_ground_truth.py
"""
import math

import numpy as np

from metric_curve_lab.delaunay import voronoi_diagram
from metric_curve_lab.features import classify_edges, medial_axis_short_edges
from metric_curve_lab.poly2 import curvature, parse_poly
from metric_curve_lab.reach import Probe, convergence_experiment
from metric_curve_lab.sampler import BoundingBox, epsilon_sample

P = parse_poly("(1/4)*x^2+y^2-1")
box = BoundingBox(-3, 3, -3, 3)

cd = curvature(P, (2.0, 0.0))
print(f"curvature at (2, 0): {cd.curvature} (center {tuple(cd.center)})")

A = epsilon_sample(P, box, 0.02)
V = voronoi_diagram(A.all_points)
seg = medial_axis_short_edges(V, classify_edges(V, P), A.epsilon).segments()
xs = seg[..., 0].ravel()
print(f"short edges span x in [{xs.min():.4f}, {xs.max():.4f}], |y| <= {np.abs(seg[..., 1]).max():.2e}")
print("the medial axis is the segment from (-3/2, 0) to (3/2, 0)")

# As the sample refines, the cell of the site (sqrt7/2, 3/4) shrinks onto a
# ray along the normal, starting where the normal meets the medial axis.
site = (math.sqrt(7) / 2, 0.75)
o = np.array([3 * math.sqrt(7) / 8, 0.0])
d = np.array([math.sqrt(7) / 4, 1.5])
d /= np.linalg.norm(d)
x = np.array([1.0, 1.0])
limit = np.linalg.norm(x - (o + max(0.0, (x - o) @ d) * d))
rows = convergence_experiment(P, box, 0.1, 4, probes=[Probe(tuple(x), site)])
print(f"\ndistance from (1, 1) to the limiting ray: {limit:.6f}")
for r in rows:
    w = r.metrics["wijsman_0"]
    print(f"eps={r.epsilon:<8g} cell distance {w:.6f}  error {abs(w - limit):.6f}")
