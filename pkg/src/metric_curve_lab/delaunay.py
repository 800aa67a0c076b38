"""Delaunay triangulation and its dual Voronoi diagram.

Triangulations come from Qhull (through :mod:`scipy.spatial`) or from a
pure-Python lexicographic incremental builder, and are then passed through an
exact Lawson legalization so that

* every triangle has an empty circumcircle under the exact in-circle test, and
* four cocircular sites are split by the lexicographically smallest diagonal.

The paraboloid lift gives an independent check of the result
(:func:`verify_lower_hull`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateInput
from .predicates import incircle, orient2d

#: Voronoi edges shorter than this fraction of the site bounding-box diagonal
#: join circumcenters of (numerically) cocircular triangles and are dropped.
DEGENERATE_EDGE_TOL = 1e-9


class LiftedPoint(NamedTuple):
    x: float
    y: float
    z: float


# --------------------------------------------------------------------------
# triangulation


@dataclass(frozen=True, eq=False)
class Triangulation:
    """CCW triangles over ``sites`` with per-triangle circumcircle data.

    ``neighbors[t, k]`` is the triangle across the edge opposite vertex ``k``
    of triangle ``t`` (-1 on the convex hull).
    """

    sites: np.ndarray
    triangles: np.ndarray
    neighbors: np.ndarray
    centers: np.ndarray
    radii: np.ndarray

    @property
    def circumdata(self):
        return [(tuple(c), float(r)) for c, r in zip(self.centers, self.radii)]

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def edges(self) -> np.ndarray:
        """Undirected Delaunay edges as sorted index pairs, lexicographically ordered."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def hull_edges(self) -> np.ndarray:
        """Directed hull edges (interior on the left)."""
        out = []
        for t, tri in enumerate(self.triangles):
            for k in range(3):
                if self.neighbors[t, k] < 0:
                    out.append((tri[(k + 1) % 3], tri[(k + 2) % 3]))
        return np.array(sorted(out), dtype=int).reshape(-1, 2)

    def edge_map(self) -> dict:
        """Directed edge ``(u, v)`` -> triangle holding it in CCW order."""
        m = {}
        for t, (a, b, c) in enumerate(self.triangles.tolist()):
            m[(a, b)] = t
            m[(b, c)] = t
            m[(c, a)] = t
        return m


def _lex_key(p):
    return (p[0], p[1])


class _Mesh:
    """Mutable triangle soup with a directed-edge index, used while building."""

    def __init__(self, pts):
        self.pts = pts
        self.tris: list = []
        self.edge: dict = {}

    def add(self, a, b, c):
        t = len(self.tris)
        self.tris.append((a, b, c))
        self.edge[(a, b)] = t
        self.edge[(b, c)] = t
        self.edge[(c, a)] = t
        return t

    def _set(self, t, a, b, c):
        self.tris[t] = (a, b, c)
        self.edge[(a, b)] = t
        self.edge[(b, c)] = t
        self.edge[(c, a)] = t

    @staticmethod
    def _third(tri, a, b):
        for v in tri:
            if v != a and v != b:
                return v
        raise AssertionError("degenerate triangle")

    def _diag_key(self, u, v):
        pu, pv = _lex_key(self.pts[u]), _lex_key(self.pts[v])
        return (pu, pv) if pu <= pv else (pv, pu)

    def legalize(self, stack):
        pts = self.pts
        edge = self.edge
        while stack:
            a, b = stack.pop()
            t1 = edge.get((a, b))
            t2 = edge.get((b, a))
            if t1 is None or t2 is None:
                continue
            c = self._third(self.tris[t1], a, b)
            d = self._third(self.tris[t2], b, a)
            s = incircle(pts[a], pts[b], pts[c], pts[d])
            if s < 0 or (s == 0 and self._diag_key(c, d) >= self._diag_key(a, b)):
                continue
            if orient2d(pts[a], pts[d], pts[c]) <= 0 or orient2d(pts[d], pts[b], pts[c]) <= 0:
                continue
            for e in ((a, b), (b, c), (c, a), (b, a), (a, d), (d, b)):
                edge.pop(e, None)
            self._set(t1, a, d, c)
            self._set(t2, d, b, c)
            stack.extend(((a, d), (d, b), (b, c), (c, a)))

    def legalize_all(self):
        stack = [e for e in self.edge if e[0] < e[1] and (e[1], e[0]) in self.edge]
        self.legalize(stack)


def _check_sites(sites) -> np.ndarray:
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise DegenerateInput(f"need at least 3 sites, got {len(pts)}")
    if not np.all(np.isfinite(pts)):
        raise DegenerateInput("site coordinates must be finite")
    if len(np.unique(pts, axis=0)) != len(pts):
        raise DegenerateInput("duplicate sites")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    a, b = pts[order[0]], pts[order[-1]]
    if all(orient2d(a, b, p) == 0 for p in pts):
        raise DegenerateInput("all sites are collinear")
    return pts


def _qhull_mesh(pts: np.ndarray, plist) -> _Mesh | None:
    from scipy.spatial import Delaunay, QhullError

    try:
        tri = Delaunay(pts)
    except (QhullError, ValueError):
        return None
    if len(tri.coplanar):
        return None
    mesh = _Mesh(plist)
    for a, b, c in tri.simplices.tolist():
        o = orient2d(plist[a], plist[b], plist[c])
        if o == 0:
            return None
        if o < 0:
            b, c = c, b
        if (a, b) in mesh.edge or (b, c) in mesh.edge or (c, a) in mesh.edge:
            return None
        mesh.add(a, b, c)
    if len({v for t in mesh.tris for v in t}) != len(plist):
        return None
    return mesh


def _incremental_mesh(pts: np.ndarray, plist) -> _Mesh:
    """Insert sites in lexicographic order; each new site lies outside the hull."""
    n = len(plist)
    order = sorted(range(n), key=lambda i: _lex_key(plist[i]))
    mesh = _Mesh(plist)
    chain = [order[0], order[1]]
    k = 2
    while k < n and orient2d(plist[chain[0]], plist[chain[-1]], plist[order[k]]) == 0:
        chain.append(order[k])
        k += 1
    if k == n:
        raise DegenerateInput("all sites are collinear")
    p = order[k]
    nxt, prv = {}, {}
    left = orient2d(plist[chain[0]], plist[chain[-1]], plist[p]) > 0
    for u, v in zip(chain, chain[1:]):
        if left:
            mesh.add(u, v, p)
        else:
            mesh.add(v, u, p)
    cyc = chain + [p] if left else chain[::-1] + [p]
    for u, v in zip(cyc, cyc[1:] + cyc[:1]):
        nxt[u] = v
        prv[v] = u
    last = p
    for q in order[k + 1 :]:
        pq = plist[q]

        def visible(u):
            return orient2d(plist[u], plist[nxt[u]], pq) < 0

        start = None
        for cand in (last, prv[last]):
            if visible(cand):
                start = cand
                break
        if start is None:
            u = nxt[last]
            while u != last:
                if visible(u):
                    start = u
                    break
                u = nxt[u]
        if start is None:
            raise DegenerateInput("could not locate a visible hull edge")
        lo = start
        while visible(prv[lo]):
            lo = prv[lo]
        hi = start
        while visible(nxt[hi]):
            hi = nxt[hi]
        stack = []
        u = lo
        while True:
            w = nxt[u]
            mesh.add(w, u, q)
            stack.append((u, w))
            if u == hi:
                break
            u = w
        end = nxt[hi]
        u = nxt[lo]
        while u != end:
            nu = nxt[u]
            del nxt[u], prv[u]
            u = nu
        nxt[lo] = q
        prv[q] = lo
        nxt[q] = end
        prv[end] = q
        mesh.legalize(stack)
        last = q
    return mesh


def circumcircles(pts: np.ndarray, tris: np.ndarray):
    a = pts[tris[:, 0]]
    b = pts[tris[:, 1]] - a
    c = pts[tris[:, 2]] - a
    b2 = (b**2).sum(axis=1)
    c2 = (c**2).sum(axis=1)
    d = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (c[:, 1] * b2 - b[:, 1] * c2) / d
        uy = (b[:, 0] * c2 - c[:, 0] * b2) / d
    centers = a + np.column_stack([ux, uy])
    radii = np.hypot(ux, uy)
    return centers, radii


def _finish(pts: np.ndarray, mesh: _Mesh) -> Triangulation:
    tris = []
    for a, b, c in mesh.tris:
        r = min(range(3), key=lambda k: (a, b, c)[k])
        tris.append(((a, b, c)[r], (a, b, c)[(r + 1) % 3], (a, b, c)[(r + 2) % 3]))
    tris.sort()
    tri_arr = np.array(tris, dtype=int).reshape(-1, 3)
    emap = {}
    for t, (a, b, c) in enumerate(tris):
        emap[(a, b)] = t
        emap[(b, c)] = t
        emap[(c, a)] = t
    nb = np.full(tri_arr.shape, -1, dtype=int)
    for t, (a, b, c) in enumerate(tris):
        nb[t, 0] = emap.get((c, b), -1)
        nb[t, 1] = emap.get((a, c), -1)
        nb[t, 2] = emap.get((b, a), -1)
    centers, radii = circumcircles(pts, tri_arr)
    for arr in (pts, tri_arr, nb, centers, radii):
        arr.setflags(write=False)
    return Triangulation(pts, tri_arr, nb, centers, radii)


def delaunay_triangulate(sites, engine: str = "auto") -> Triangulation:
    """Delaunay triangulation of at least three non-collinear, distinct sites.

    ``engine`` is ``"qhull"``, ``"incremental"`` or ``"auto"`` (Qhull with the
    incremental builder as fallback). All engines finish with the same exact
    legalization, so they agree up to cocircular ties.
    """
    pts = _check_sites(sites).copy()
    plist = [tuple(p) for p in pts.tolist()]
    mesh = None
    if engine in ("auto", "qhull"):
        mesh = _qhull_mesh(pts, plist)
        if mesh is None and engine == "qhull":
            raise DegenerateInput("Qhull could not triangulate the sites")
    if mesh is None:
        if engine not in ("auto", "incremental", "qhull"):
            raise ValueError(f"unknown engine {engine!r}")
        mesh = _incremental_mesh(pts, plist)
    mesh.legalize_all()
    return _finish(pts, mesh)


def lift(sites) -> list:
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    return [LiftedPoint(x, y, x * x + y * y) for x, y in pts.tolist()]


def lower_hull_violations(T: Triangulation, tol: float = 1e-9) -> np.ndarray:
    """Per triangle, the number of lifted sites strictly below its lifted plane."""
    L = np.array(lift(T.sites))
    a = L[T.triangles[:, 0]]
    n = np.cross(L[T.triangles[:, 1]] - a, L[T.triangles[:, 2]] - a)
    # upward normal for CCW triangles; sites below the plane have (s - a).n < 0
    out = np.zeros(len(a), dtype=int)
    for lo in range(0, len(a), 256):
        sl = slice(lo, lo + 256)
        rel = L[None, :, :] - a[sl, None, :]
        h = np.einsum("tsk,tk->ts", rel, n[sl])
        scale = np.linalg.norm(rel, axis=2) ** 2 * np.linalg.norm(n[sl], axis=1)[:, None]
        out[sl] = (h < -tol * scale).sum(axis=1)
    return out


def verify_lower_hull(T: Triangulation, tol: float = 1e-9) -> bool:
    """True iff every lifted triangle supports the lifted sites from below."""
    if len(T.triangles) == 0:
        return True
    u = T.sites[T.triangles[:, 1]] - T.sites[T.triangles[:, 0]]
    v = T.sites[T.triangles[:, 2]] - T.sites[T.triangles[:, 0]]
    if np.any(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0] <= 0):
        return False
    return not lower_hull_violations(T, tol).any()


def triangulation_from_triangles(sites, triangles) -> Triangulation:
    """Wrap an arbitrary (possibly non-Delaunay) CCW triangle list; no legalization."""
    pts = np.asarray(sites, dtype=float).reshape(-1, 2).copy()
    mesh = _Mesh([tuple(p) for p in pts.tolist()])
    for a, b, c in np.asarray(triangles, dtype=int).tolist():
        if orient2d(pts[a], pts[b], pts[c]) < 0:
            b, c = c, b
        mesh.add(a, b, c)
    return _finish(pts, mesh)


# --------------------------------------------------------------------------
# Voronoi diagram


@dataclass(frozen=True, eq=False)
class VoronoiEdge:
    """Piece of the bisector of ``site_a`` and ``site_b``.

    ``kind`` is ``"segment"`` (``start``..``end``), ``"ray"`` (``start`` plus unit
    ``direction``) or ``"line"`` (through ``start`` along ``direction``).
    """

    site_a: int
    site_b: int
    kind: str
    start: np.ndarray
    end: np.ndarray | None = None
    direction: np.ndarray | None = None
    triangles: tuple = ()
    degenerate: bool = False

    @property
    def length(self) -> float:
        if self.kind == "segment":
            return float(np.hypot(*(self.end - self.start)))
        return math.inf

    def points_along(self, n: int, reach: float = 0.0) -> np.ndarray:
        """``n + 1`` evenly spaced points; rays/lines are truncated at ``reach``."""
        t = np.linspace(0.0, 1.0, n + 1)[:, None]
        if self.kind == "segment":
            return self.start + t * (self.end - self.start)
        if self.kind == "ray":
            return self.start + t * reach * self.direction
        return self.start + (2.0 * t - 1.0) * reach * self.direction

    def distance(self, p) -> float:
        p = np.asarray(p, dtype=float)
        if self.kind == "segment":
            return _dist_point_segment(p, self.start, self.end)
        v = p - self.start
        t = float(v @ self.direction)
        if self.kind == "ray":
            t = max(t, 0.0)
        return float(np.hypot(*(v - t * self.direction)))


def _dist_point_segment(p, a, b) -> float:
    d = b - a
    L2 = float(d @ d)
    if L2 == 0.0:
        return float(np.hypot(*(p - a)))
    t = min(1.0, max(0.0, float((p - a) @ d) / L2))
    return float(np.hypot(*(p - a - t * d)))


@dataclass(frozen=True, eq=False)
class VoronoiCell:
    """Convex cell of one site, described by its boundary pieces.

    For a bounded cell ``vertices`` is the closed boundary polygon. For an
    unbounded cell the boundary is ``ray_in`` (arriving at ``vertices[0]``),
    the vertex chain, then ``ray_out`` (leaving ``vertices[-1]``).
    """

    site: int
    site_point: np.ndarray
    vertices: np.ndarray
    edges: tuple
    ray_in: np.ndarray | None = None
    ray_out: np.ndarray | None = None
    lines: tuple = ()

    @property
    def bounded(self) -> bool:
        return self.ray_in is None and not self.lines

    def pieces(self):
        """Boundary as ``(kind, point, direction_or_endpoint)`` tuples."""
        out = []
        V = self.vertices
        for line in self.lines:
            out.append(("line", line[0], line[1]))
        if self.lines:
            return out
        if self.bounded:
            for i in range(len(V)):
                out.append(("segment", V[i], V[(i + 1) % len(V)]))
            return out
        out.append(("ray", V[0], self.ray_in))
        for i in range(len(V) - 1):
            out.append(("segment", V[i], V[i + 1]))
        out.append(("ray", V[-1], self.ray_out))
        return out

    def _halfplanes(self):
        s = self.site_point
        hp = []
        for kind, p0, q in self.pieces():
            d = q - p0 if kind == "segment" else q
            nrm = float(np.hypot(*d))
            if nrm == 0.0:
                continue
            d = d / nrm
            side = d[0] * (s[1] - p0[1]) - d[1] * (s[0] - p0[0])
            hp.append((p0, d, 1.0 if side >= 0 else -1.0))
        return hp

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.asarray(p, dtype=float)
        for p0, d, sgn in self._halfplanes():
            if sgn * (d[0] * (p[1] - p0[1]) - d[1] * (p[0] - p0[0])) < -tol:
                return False
        return True

    def contains_many(self, P, tol: float = 1e-12) -> np.ndarray:
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        ok = np.ones(len(P), dtype=bool)
        for p0, d, sgn in self._halfplanes():
            ok &= sgn * (d[0] * (P[:, 1] - p0[1]) - d[1] * (P[:, 0] - p0[0])) >= -tol
        return ok

    def distance(self, p) -> float:
        """Euclidean distance from ``p`` to the closed cell (0 inside)."""
        p = np.asarray(p, dtype=float)
        if self.contains(p):
            return 0.0
        best = math.inf
        for kind, p0, q in self.pieces():
            if kind == "segment":
                best = min(best, _dist_point_segment(p, p0, q))
            else:
                v = p - p0
                t = float(v @ q)
                if kind == "ray":
                    t = max(t, 0.0)
                best = min(best, float(np.hypot(*(v - t * q))))
        return best

    @property
    def diameter(self) -> float:
        if not self.bounded:
            return math.inf
        V = self.vertices
        if len(V) < 2:
            return 0.0
        return float(np.max(np.hypot(*(V[:, None, :] - V[None, :, :]).transpose(2, 0, 1))))

    def vertex_distances(self) -> np.ndarray:
        if len(self.vertices) == 0:
            return np.empty(0)
        return np.hypot(*(self.vertices - self.site_point).T)


@dataclass(frozen=True, eq=False)
class VoronoiDiagram:
    sites: np.ndarray
    edges: tuple
    cells: tuple
    triangulation: Triangulation | None = None
    vertices: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def edges_of(self, site: int):
        return self.cells[site].edges

    def locate(self, p) -> int:
        """Index of the site whose cell contains ``p`` (nearest site)."""
        d = np.hypot(*(self.sites - np.asarray(p, dtype=float)).T)
        return int(np.argmin(d))

    def bbox_diagonal(self) -> float:
        span = self.sites.max(axis=0) - self.sites.min(axis=0)
        return float(np.hypot(*span))


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.hypot(*v)


def voronoi_dual(T: Triangulation) -> VoronoiDiagram:
    """Voronoi diagram dual to a Delaunay triangulation.

    Bounded edges join circumcenters of adjacent triangles; each hull edge
    yields a ray from its triangle's circumcenter along the outward normal.
    """
    pts = T.sites
    emap = T.edge_map()
    diag = float(np.hypot(*(pts.max(axis=0) - pts.min(axis=0))))
    deg_tol = DEGENERATE_EDGE_TOL * diag
    edges = []
    index = {}
    for a, b in T.edges().tolist():
        t1 = emap.get((a, b))
        t2 = emap.get((b, a))
        if t1 is not None and t2 is not None:
            p0, p1 = T.centers[t1], T.centers[t2]
            e = VoronoiEdge(
                a, b, "segment", p0.copy(), p1.copy(), triangles=(t1, t2),
                degenerate=bool(np.hypot(*(p1 - p0)) <= deg_tol),
            )
        else:
            t = t1 if t1 is not None else t2
            u, v = (a, b) if t1 is not None else (b, a)
            d = pts[v] - pts[u]
            e = VoronoiEdge(
                a, b, "ray", T.centers[t].copy(), direction=_unit((d[1], -d[0])), triangles=(t,)
            )
        index[(a, b)] = len(edges)
        edges.append(e)

    first = {}
    for (u, _), t in emap.items():
        first.setdefault(u, t)
    tris = T.triangles.tolist()
    cells = [
        _build_cell(s, first.get(s), T, emap, edges, index, tris) for s in range(len(pts))
    ]
    return VoronoiDiagram(pts, tuple(edges), tuple(cells), T, T.centers)


def _build_cell(s, start_t, T, emap, edges, index, tris) -> VoronoiCell:
    pts = T.sites
    if start_t is None:
        raise DegenerateInput(f"site {s} is not a triangulation vertex")

    def third_after(t):
        a, b, c = tris[t]
        if a == s:
            return b, c
        if b == s:
            return c, a
        return a, b

    # rotate clockwise to the first triangle of the fan (hull) or stay (interior)
    t = start_t
    seen = {t}
    hull = False
    while True:
        u, _ = third_after(t)
        prev = emap.get((u, s))
        if prev is None:
            hull = True
            break
        if prev in seen:
            break
        seen.add(prev)
        t = prev
    fan = [t]
    nbrs = [third_after(t)[0]]
    while True:
        _, w = third_after(fan[-1])
        nbrs.append(w)
        nt = emap.get((s, w))
        if nt is None or nt == fan[0]:
            break
        fan.append(nt)
    if not hull:
        nbrs.pop()
    verts = T.centers[fan]
    edge_ids = tuple(index[(min(s, w), max(s, w))] for w in nbrs)
    if hull:
        # pieces: ray dual to (s, nbrs[0]), segments for interior nbrs, ray for (s, nbrs[-1])
        first, last = edges[edge_ids[0]], edges[edge_ids[-1]]
        ray_in, ray_out = first.direction, last.direction
        verts, keep = _collapse(verts, edge_ids[1:-1], edges)
        ids = (edge_ids[0],) + keep + (edge_ids[-1],)
        return VoronoiCell(s, pts[s], verts, ids, ray_in=ray_in, ray_out=ray_out)
    # interior: nbrs[i] separates fan[i-1] and fan[i]; reorder so segments follow vertices
    seg_ids = edge_ids[1:] + edge_ids[:1]
    verts, keep = _collapse(verts, seg_ids, edges, closed=True)
    return VoronoiCell(s, pts[s], verts, keep)


def _collapse(verts, seg_ids, edges, closed=False):
    """Drop vertices joined by degenerate edges; keep the non-degenerate edge ids."""
    out = [verts[0]]
    keep = []
    for i, eid in enumerate(seg_ids):
        if closed and i == len(seg_ids) - 1:
            if not edges[eid].degenerate:
                keep.append(eid)
            elif len(out) > 1:
                out.pop()
            break
        if edges[eid].degenerate:
            continue
        keep.append(eid)
        out.append(verts[i + 1])
    return np.array(out).reshape(-1, 2), tuple(keep)


def voronoi_diagram(sites) -> VoronoiDiagram:
    """Voronoi diagram of arbitrary distinct sites, including 2-site and collinear inputs."""
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        raise DegenerateInput("need at least 2 sites")
    if len(pts) >= 3:
        try:
            return voronoi_dual(delaunay_triangulate(pts))
        except DegenerateInput as exc:
            if "collinear" not in str(exc):
                raise
    return _collinear_voronoi(pts)


def _collinear_voronoi(pts: np.ndarray) -> VoronoiDiagram:
    if len(np.unique(pts, axis=0)) != len(pts):
        raise DegenerateInput("duplicate sites")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    d = _unit(pts[order[-1]] - pts[order[0]])
    perp = np.array([-d[1], d[0]])
    edges = []
    lines = {i: [] for i in range(len(pts))}
    eids = {i: [] for i in range(len(pts))}
    for a, b in zip(order[:-1], order[1:]):
        mid = 0.5 * (pts[a] + pts[b])
        e = VoronoiEdge(int(min(a, b)), int(max(a, b)), "line", mid, direction=perp.copy())
        for s in (a, b):
            lines[s].append((mid, perp.copy()))
            eids[s].append(len(edges))
        edges.append(e)
    cells = tuple(
        VoronoiCell(i, pts[i], np.empty((0, 2)), tuple(eids[i]), lines=tuple(lines[i]))
        for i in range(len(pts))
    )
    return VoronoiDiagram(pts, tuple(edges), cells, None, np.empty((0, 2)))
