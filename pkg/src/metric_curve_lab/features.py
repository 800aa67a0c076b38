"""Metric features read off the Voronoi diagram of a curve sample.

A Voronoi edge of a sample point's cell is *long* when it crosses the curve
and *short* otherwise. Short edges approximate the medial axis, long edges the
normal lines, and pairs of sites whose joining line leaves both cells through
short edges approximate bottlenecks.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .delaunay import Triangulation, VoronoiDiagram, VoronoiEdge, circumcircles, voronoi_diagram
from .errors import BadCellStructure, CurveLabWarning, TooFewPoints
from .poly2 import ON_CURVE_TOL, Poly2

SEGMENT_SUBDIVISIONS = 64
RAY_SUBDIVISIONS = 512

LONG, SHORT, UNCLASSIFIED = "long", "short", "unclassified"


@dataclass(frozen=True, eq=False)
class EdgeClass:
    """Per-edge labels (``"long"``, ``"short"``; collapsed edges stay ``"unclassified"``)."""

    labels: tuple
    long_counts: np.ndarray
    short_counts: np.ndarray

    def __getitem__(self, i):
        return self.labels[i]

    def __len__(self):
        return len(self.labels)

    def is_short(self, i) -> bool:
        return self.labels[i] == SHORT

    def bad_cells(self) -> np.ndarray:
        return np.nonzero(self.long_counts != 2)[0]


def _edge_points(e: VoronoiEdge, reach: float) -> np.ndarray:
    n = SEGMENT_SUBDIVISIONS if e.kind == "segment" else RAY_SUBDIVISIONS
    return e.points_along(n, reach)


def _crosses(P: Poly2, pts: np.ndarray) -> bool:
    f = P(pts[:, 0], pts[:, 1])
    if np.any(np.abs(f) <= ON_CURVE_TOL * P.scale(pts[:, 0], pts[:, 1])):
        return True
    s = np.sign(f)
    return bool(np.any(s[:-1] * s[1:] < 0))


def classify_edges(V: VoronoiDiagram, P: Poly2, warn: bool = True) -> EdgeClass:
    """Label each Voronoi edge long (meets ``P = 0``) or short.

    Segments are scanned at 64 subdivisions, rays up to twice the site
    bounding-box diagonal at 512. A cell whose long-edge count is not 2 raises a
    :class:`CurveLabWarning`.
    """
    reach = 2.0 * V.bbox_diagonal()
    labels = []
    seg = [i for i, e in enumerate(V.edges) if e.kind == "segment" and not e.degenerate]
    other = [i for i, e in enumerate(V.edges) if e.kind != "segment"]
    lab = [UNCLASSIFIED] * len(V.edges)
    if seg:
        t = np.linspace(0.0, 1.0, SEGMENT_SUBDIVISIONS + 1)[None, :, None]
        a = np.array([V.edges[i].start for i in seg])[:, None, :]
        b = np.array([V.edges[i].end for i in seg])[:, None, :]
        pts = a + t * (b - a)
        f = P(pts[..., 0], pts[..., 1])
        sc = P.scale(pts[..., 0], pts[..., 1])
        s = np.sign(f)
        hit = np.any(s[:, :-1] * s[:, 1:] < 0, axis=1) | np.any(np.abs(f) <= ON_CURVE_TOL * sc, axis=1)
        for i, h in zip(seg, hit):
            lab[i] = LONG if h else SHORT
    for i in other:
        lab[i] = LONG if _crosses(P, _edge_points(V.edges[i], reach)) else SHORT
    labels = tuple(lab)
    n = len(V.cells)
    lc = np.zeros(n, dtype=int)
    sc_ = np.zeros(n, dtype=int)
    for c in V.cells:
        for eid in c.edges:
            if labels[eid] == LONG:
                lc[c.site] += 1
            elif labels[eid] == SHORT:
                sc_[c.site] += 1
    out = EdgeClass(labels, lc, sc_)
    bad = out.bad_cells()
    if warn and len(bad):
        warnings.warn(
            f"{len(bad)} cell(s) do not have exactly two long edges (e.g. site {int(bad[0])}); "
            "the sample may be too coarse",
            CurveLabWarning,
            stacklevel=2,
        )
    return out


# --------------------------------------------------------------------------
# medial axis


@dataclass(frozen=True, eq=False)
class MedialApprox:
    short_edges: tuple
    circumcenters: np.ndarray
    epsilon: float

    def segments(self, clip_reach: float | None = None) -> np.ndarray:
        """Short edges as ``(k, 2, 2)`` segments; rays are cut at ``clip_reach``."""
        out = []
        for e in self.short_edges:
            if e.kind == "segment":
                out.append((e.start, e.end))
            elif clip_reach is not None:
                out.append((e.start, e.start + clip_reach * e.direction))
        return np.array(out, dtype=float).reshape(-1, 2, 2)

    def midpoints(self) -> np.ndarray:
        seg = self.segments()
        return seg.mean(axis=1) if len(seg) else np.empty((0, 2))


def medial_axis_short_edges(V: VoronoiDiagram, classes: EdgeClass, epsilon: float = math.nan) -> MedialApprox:
    short = tuple(e for e, lab in zip(V.edges, classes.labels) if lab == SHORT)
    return MedialApprox(short, np.empty((0, 2)), float(epsilon))


@dataclass(frozen=True, eq=False)
class CircumcenterSet:
    points: np.ndarray
    radii: np.ndarray
    nearest_site_distance: np.ndarray


def medial_axis_circumcenters(T: Triangulation, A=None) -> CircumcenterSet:
    """All Delaunay circumcenters with circumradius and distance to the nearest site."""
    sites = T.sites if A is None else np.asarray(getattr(A, "all_points", A), dtype=float)
    d, _ = cKDTree(sites).query(T.centers)
    return CircumcenterSet(T.centers.copy(), T.radii.copy(), np.asarray(d))


# --------------------------------------------------------------------------
# normals and curvature


def _edge_direction(e: VoronoiEdge) -> np.ndarray:
    d = (e.end - e.start) if e.kind == "segment" else e.direction
    return d / np.hypot(*d)


def estimate_normal(V: VoronoiDiagram, site: int, classes: EdgeClass) -> np.ndarray:
    """Mean direction of the cell's two long edges, pointing away from the nearest cell vertex."""
    cell = V.cells[site]
    longs = [V.edges[i] for i in cell.edges if classes.labels[i] == LONG]
    if len(longs) != 2:
        raise BadCellStructure(f"site {site} has {len(longs)} long edges, expected 2")
    d1, d2 = (_edge_direction(e) for e in longs)
    if d1 @ d2 < 0:
        d2 = -d2
    n = d1 + d2
    n = n / np.hypot(*n)
    if len(cell.vertices):
        v = cell.vertices[np.argmin(cell.vertex_distances())]
        if n @ (cell.site_point - v) < 0:
            n = -n
    return n


def default_delta(V: VoronoiDiagram, p, vertex_tree: cKDTree | None = None) -> float:
    """0.9 times the distance from ``p`` to the nearest vertex of the full diagram."""
    if vertex_tree is None:
        verts = np.asarray(V.vertices)
        if len(verts) == 0:
            return math.inf
        vertex_tree = cKDTree(verts)
    d, _ = vertex_tree.query(np.asarray(p, dtype=float))
    return 0.9 * float(d)


def estimate_curvature_local(A, p, delta: float | None = None, *, V: VoronoiDiagram | None = None,
                             site_tree: cKDTree | None = None, vertex_tree: cKDTree | None = None,
                             epsilon: float | None = None) -> float:
    """Radius-of-curvature estimate at ``p`` from the Voronoi diagram of the sample in B(p, delta).

    Returns the smallest distance from the site whose local cell contains ``p``
    to a vertex of that cell.
    """
    pts = np.asarray(getattr(A, "all_points", A), dtype=float)
    p = np.asarray(p, dtype=float)
    if epsilon is None:
        epsilon = getattr(A, "epsilon", 0.0)
    explicit = delta is not None
    if delta is None:
        if V is None and vertex_tree is None:
            V = voronoi_diagram(pts)
        delta = default_delta(V, p, vertex_tree)
    if explicit and epsilon and delta <= 2.0 * epsilon:
        warnings.warn(
            f"delta={delta:.3g} is not above 2*epsilon={2 * epsilon:.3g}", CurveLabWarning, stacklevel=2
        )
    tree = site_tree if site_tree is not None else cKDTree(pts)
    idx = sorted(tree.query_ball_point(p, delta))
    if len(idx) < 4:
        raise TooFewPoints(f"only {len(idx)} sample points within delta={delta:.3g} of {tuple(p)}")
    local = pts[idx]
    # the cell's vertices are the circumcenters of the triangles incident to
    # the nearest site, so their distances to it are those circumradii;
    # cocircular ties do not change those radii, so Qhull's triangulation is
    # used without the exact legalization pass
    a = int(np.argmin(np.einsum("ij,ij->i", local - p, local - p)))
    try:
        tri = Delaunay(local).simplices
    except QhullError:
        return math.inf
    tri = tri[np.any(tri == a, axis=1)]
    if len(tri) == 0:
        return math.inf
    _, r = circumcircles(local, tri)
    r = r[np.isfinite(r)]
    return float(r.min()) if len(r) else math.inf


def evolute_approximation(A, V: VoronoiDiagram | None = None, stride: int | None = None) -> np.ndarray:
    """Vertices of localized Voronoi diagrams over a cover of the sample by balls.

    Each ball is centered at a site with the default local radius; ``stride``
    subsamples the centers (default: every site).
    """
    pts = np.asarray(getattr(A, "all_points", A), dtype=float)
    V = V if V is not None else voronoi_diagram(pts)
    vt = cKDTree(np.asarray(V.vertices))
    st = cKDTree(pts)
    out = []
    for i in range(0, len(pts), stride or 1):
        delta = default_delta(V, pts[i], vt)
        idx = st.query_ball_point(pts[i], delta)
        if len(idx) < 4:
            continue
        Vl = voronoi_diagram(pts[sorted(idx)])
        out.append(np.asarray(Vl.vertices))
    return np.concatenate(out) if out else np.empty((0, 2))


# --------------------------------------------------------------------------
# bottleneck candidates


@dataclass(frozen=True)
class BottleneckCandidate:
    a: int
    b: int
    point_a: tuple
    point_b: tuple
    width: float
    exit_edge_a: int
    entry_edge_b: int


def _exit_edges(V: VoronoiDiagram, a: int, targets: np.ndarray) -> np.ndarray:
    """For each target point, the edge id through which the ray from site ``a`` leaves its cell."""
    cell = V.cells[a]
    s = cell.site_point
    u = targets - s
    best_t = np.full(len(targets), np.inf)
    best_e = np.full(len(targets), -1, dtype=int)
    for (kind, p0, q), eid in zip(cell.pieces(), cell.edges):
        d = (q - p0) if kind == "segment" else q
        w = p0 - s
        # solve s + t u = p0 + r d
        den = u[:, 0] * (-d[1]) - u[:, 1] * (-d[0])
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (w[0] * (-d[1]) - w[1] * (-d[0])) / den
            r = (u[:, 0] * w[1] - u[:, 1] * w[0]) / den
        ok = np.isfinite(t) & (t > 0) & (r >= -1e-12)
        if kind == "segment":
            ok &= r <= 1.0 + 1e-12
        elif kind == "line":
            ok = np.isfinite(t) & (t > 0)
        better = ok & (t < best_t)
        best_t[better] = t[better]
        best_e[better] = eid
    return best_e


def bottleneck_candidates(V: VoronoiDiagram, classes: EdgeClass) -> list:
    """Site pairs whose joining line leaves both cells through short edges, sorted by width."""
    pts = V.sites
    n = len(pts)
    short = np.array([lab == SHORT for lab in classes.labels] + [False])
    exit_short = np.zeros((n, n), dtype=bool)
    exit_edge = np.full((n, n), -1, dtype=int)
    for a in range(n):
        if classes.short_counts[a] == 0:
            continue
        e = _exit_edges(V, a, pts)
        exit_edge[a] = e
        exit_short[a] = short[e]
        exit_short[a, a] = False
    both = exit_short & exit_short.T
    ia, ib = np.nonzero(np.triu(both, 1))
    out = [
        BottleneckCandidate(
            int(a), int(b), tuple(pts[a]), tuple(pts[b]), float(np.hypot(*(pts[a] - pts[b]))),
            int(exit_edge[a, b]), int(exit_edge[b, a]),
        )
        for a, b in zip(ia, ib)
    ]
    out.sort(key=lambda c: (c.width, c.a, c.b))
    return out
