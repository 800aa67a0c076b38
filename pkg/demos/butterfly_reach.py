"""Reach of the butterfly curve, exactly and from samples.

Run: python demos/butterfly_reach.py
"""
from metric_curve_lab.poly2 import BUTTERFLY, parse_poly
from metric_curve_lab.reach import reach_delaunay, reach_exact, reach_voronoi_details
from metric_curve_lab.sampler import BoundingBox, epsilon_sample

P = parse_poly(BUTTERFLY)
box = BoundingBox(-3, 3, -3, 3)

# The exact route: critical points of curvature and bottleneck pairs,
# refined by Newton's method from seeds found along a sample.
A = epsilon_sample(P, box, 0.05)
r = reach_exact(P, A, box, estimators=False)
print(f"{r.critical_points} critical-curvature points, smallest radius q = {r.q:.5f}")
print(f"{r.bottleneck_pairs} bottleneck pairs, narrowest width rho = {r.rho:.5f}")
print(f"reach = min(q, rho/2) = {r.tau_exact:.5f}")

# The sample-only routes improve as epsilon shrinks.
print("\n  eps     n  tau_voronoi  tau_delaunay  narrowest candidate")
for eps in (0.1, 0.05, 0.02):
    A = epsilon_sample(P, box, eps)
    v = reach_voronoi_details(A, P)
    print(f"{eps:5.2f} {len(A):5d}  {v.tau:11.5f}  {reach_delaunay(A):12.5f}  {v.candidates[0].width:.5f}")
