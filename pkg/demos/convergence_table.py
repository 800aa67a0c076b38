"""Self-convergence of cells, big triangles and the medial approximation.

Run: python demos/convergence_table.py
"""
from metric_curve_lab.poly2 import BUTTERFLY, parse_poly
from metric_curve_lab.reach import convergence_experiment, rows_to_csv
from metric_curve_lab.sampler import BoundingBox

rows = convergence_experiment(parse_poly(BUTTERFLY), BoundingBox(-3, 3, -3, 3), 0.1, 3)
print(rows_to_csv(rows))
print("wijsman_j: distance from probe j to the cell of a tracked curve point")
print("*_hausdorff: distance to the same object in the next row")
