"""Layered SVG drawings of samples and the structures built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .features import LONG, SHORT

LAYERS = (
    "curve", "points", "voronoi", "delaunay", "edges", "medial", "circumcenters",
    "candidates", "critical", "evolute", "bottlenecks", "reach", "cells",
)

COLORS = {
    "curve": "#222222",
    "points": "#222222",
    "voronoi": "#4a6fa5",
    "delaunay": "#7a7a7a",
    "long": "#1f5fbf",
    "short": "#d62728",
    "medial": "#d62728",
    "circumcenters": "#d62728",
    "candidates": "#9467bd",
    "critical": "#2ca02c",
    "evolute": "#6baed6",
    "bottlenecks": "#ff7f0e",
    "reach": "#e377c2",
    "cells": "#f4a6c6",
    "large": "#ff7f0e",
}


def _f(v: float) -> str:
    s = f"{v:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


@dataclass
class Canvas:
    """World-to-SVG mapping for the box ``(xmin, xmax, ymin, ymax)``."""

    box: tuple
    width: int = 800
    parts: list = field(default_factory=list)

    def __post_init__(self):
        x0, x1, y0, y1 = self.box
        self.scale = self.width / (x1 - x0)
        self.height = int(round((y1 - y0) * self.scale))

    def xy(self, p):
        x0, _, _, y1 = self.box
        return (float(p[0]) - x0) * self.scale, (y1 - float(p[1])) * self.scale

    def open_group(self, name: str):
        self.parts.append(f'<g id="{name}">')

    def close_group(self):
        self.parts.append("</g>")

    def line(self, a, b, color, width=1.0, opacity=1.0):
        (ax, ay), (bx, by) = self.xy(a), self.xy(b)
        op = "" if opacity == 1.0 else f' stroke-opacity="{_f(opacity)}"'
        self.parts.append(
            f'<line x1="{_f(ax)}" y1="{_f(ay)}" x2="{_f(bx)}" y2="{_f(by)}" stroke="{color}" '
            f'stroke-width="{_f(width)}"{op}/>'
        )

    def polyline(self, pts, color, width=1.0, closed=False, fill="none", fill_opacity=1.0):
        if len(pts) == 0:
            return
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in (self.xy(p) for p in pts))
        tag = "polygon" if closed else "polyline"
        fo = "" if fill == "none" else f' fill-opacity="{_f(fill_opacity)}"'
        self.parts.append(
            f'<{tag} points="{coords}" fill="{fill}"{fo} stroke="{color}" stroke-width="{_f(width)}"/>'
        )

    def dot(self, p, color, r=1.5):
        x, y = self.xy(p)
        self.parts.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="{color}"/>')

    def circle(self, c, radius, color, width=1.0):
        x, y = self.xy(c)
        self.parts.append(
            f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(radius * self.scale)}" fill="none" '
            f'stroke="{color}" stroke-width="{_f(width)}"/>'
        )

    def svg(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        )
        bg = f'<rect width="{self.width}" height="{self.height}" fill="white"/>'
        return "\n".join([head, bg, *self.parts, "</svg>"]) + "\n"


def _edge_segment(e, reach: float):
    if e.kind == "segment":
        return e.start, e.end
    if e.kind == "ray":
        return e.start, e.start + reach * e.direction
    return e.start - reach * e.direction, e.start + reach * e.direction


def _cell_polygon(cell, reach: float) -> np.ndarray:
    if cell.bounded:
        return cell.vertices
    if cell.lines:
        return np.empty((0, 2))
    V = cell.vertices
    return np.vstack([V[0] + reach * cell.ray_in, V, V[-1] + reach * cell.ray_out])


def render_svg(layers, box, *, sample=None, voronoi=None, classes=None, candidates=(), critical=None,
               bottlenecks=None, evolute=None, curve=None, highlight_sites=(), large_triangles=2,
               width: int = 800) -> str:
    """Draw the requested ``layers`` (see :data:`LAYERS`) in ``box``; rays are clipped by the viewport."""
    unknown = [name for name in layers if name not in LAYERS]
    if unknown:
        raise ValueError(f"unknown layer(s) {unknown}; choose from {', '.join(LAYERS)}")
    cv = Canvas(tuple(box), width)
    reach = 4.0 * math.hypot(box[1] - box[0], box[3] - box[2])
    order = [name for name in LAYERS if name in layers]
    for name in order:
        cv.open_group(name)
        if name == "cells" and voronoi is not None:
            for s in highlight_sites:
                poly = _cell_polygon(voronoi.cells[s], reach)
                if len(poly) >= 3:
                    cv.polyline(poly, COLORS["cells"], 0.5, closed=True, fill=COLORS["cells"], fill_opacity=0.6)
                elif len(poly):
                    cv.dot(poly[0], COLORS["cells"], 3.0)
        elif name == "curve" and sample is not None:
            for comp, closed in zip(sample.components, sample.closed):
                cv.polyline(comp, COLORS["curve"], 1.2, closed=closed)
        elif name == "points" and sample is not None:
            for p in sample.all_points:
                cv.dot(p, COLORS["points"], 1.6)
            for p in sample.singular_points:
                cv.dot(p, "#d62728", 3.0)
        elif name == "voronoi" and voronoi is not None:
            for e in voronoi.edges:
                if not e.degenerate:
                    cv.line(*_edge_segment(e, reach), COLORS["voronoi"], 0.6)
        elif name == "delaunay" and voronoi is not None and voronoi.triangulation is not None:
            T = voronoi.triangulation
            for a, b in T.edges():
                cv.line(T.sites[a], T.sites[b], COLORS["delaunay"], 0.5)
            inside = [i for i in range(len(T.triangles)) if box[0] <= T.centers[i][0] <= box[1]
                      and box[2] <= T.centers[i][1] <= box[3]]
            inside.sort(key=lambda i: -T.radii[i])
            for i in inside[:large_triangles]:
                cv.polyline(T.sites[T.triangles[i]], COLORS["large"], 1.5, closed=True,
                            fill=COLORS["large"], fill_opacity=0.25)
        elif name == "edges" and voronoi is not None and classes is not None:
            for e, lab in zip(voronoi.edges, classes.labels):
                if lab in (LONG, SHORT):
                    cv.line(*_edge_segment(e, reach), COLORS[lab], 0.7)
        elif name == "medial" and voronoi is not None and classes is not None:
            for e, lab in zip(voronoi.edges, classes.labels):
                if lab == SHORT:
                    cv.line(*_edge_segment(e, reach), COLORS["medial"], 1.0)
        elif name == "circumcenters" and voronoi is not None and voronoi.triangulation is not None:
            for c in voronoi.triangulation.centers:
                cv.dot(c, COLORS["circumcenters"], 1.0)
        elif name == "candidates":
            for c in candidates:
                cv.line(c.point_a, c.point_b, COLORS["candidates"], 0.8)
        elif name == "critical" and critical is not None and curve is not None:
            from .poly2 import curvature

            for c in critical.points:
                cd = curvature(curve, c.p, on_curve_tol=1e-6)
                if cd.center is not None:
                    cv.line(c.p, cd.center, COLORS["critical"], 1.0)
                cv.dot(c.p, COLORS["critical"], 3.0)
        elif name == "evolute" and evolute is not None:
            for p in evolute:
                cv.dot(p, COLORS["evolute"], 0.8)
        elif name == "bottlenecks" and bottlenecks is not None:
            for b in bottlenecks.pairs:
                cv.line(b.x, b.y, COLORS["bottlenecks"], 1.0)
        elif name == "reach":
            if critical is not None and critical.points:
                c = min(critical.points, key=lambda c: c.radius)
                from .poly2 import curvature

                cd = curvature(curve, c.p, on_curve_tol=1e-6) if curve is not None else None
                if cd is not None and cd.center is not None:
                    cv.circle(cd.center, cd.radius, COLORS["reach"], 1.5)
            if bottlenecks is not None and bottlenecks.pairs:
                b = bottlenecks.pairs[0]
                cv.line(b.x, b.y, COLORS["reach"], 2.0)
        cv.close_group()
    return cv.svg()
