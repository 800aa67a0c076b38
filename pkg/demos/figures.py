"""Write a few SVG figures next to this script.

Run: python demos/figures.py
"""
import pathlib

from metric_curve_lab.cli import run

here = pathlib.Path(__file__).resolve().parent
figures = {
    "butterfly_medial.svg": ["--eps", "0.05", "--layers", "curve,edges,medial"],
    "butterfly_reach.svg": ["--eps", "0.05", "--layers", "curve,critical,bottlenecks,reach"],
    "butterfly_triangles.svg": ["--eps", "0.05", "--layers", "curve,delaunay"],
    "ellipse_evolute.svg": ["--curve", "(1/4)*x^2+y^2-1", "--eps", "0.05", "--layers", "curve,evolute"],
    "node_cell.svg": ["--curve", "(x^2+y^2-x)^2-(1/4)*(x^2+y^2)", "--singular", "0,0", "--eps", "0.05",
                      "--box", "-0.6", "0.6", "-0.6", "0.6", "--layers", "cells,voronoi,points"],
}
for name, argv in figures.items():
    code = run(["render", *argv, "--out", str(here / name)])
    print(f"{name}: exit {code}")
