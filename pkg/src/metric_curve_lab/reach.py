"""Reach three ways, plus the set-distance harness used to watch samples converge.

The reach of a smooth compact curve is ``min(q, rho / 2)`` with ``q`` the
minimum radius of curvature and ``rho`` the narrowest bottleneck width.
:func:`reach_exact` evaluates that formula from the polynomial systems;
:func:`reach_voronoi` and :func:`reach_delaunay` estimate it from a sample.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .delaunay import VoronoiCell, VoronoiDiagram, voronoi_diagram
from .errors import EmptySet, SingularCurve, TooFewPoints
from .features import (
    bottleneck_candidates,
    classify_edges,
    default_delta,
    estimate_curvature_local,
    medial_axis_short_edges,
)
from .poly2 import Poly2
from .sampler import BoundingBox, epsilon_sample, project_to_curve
from .solver import real_bottlenecks, real_critical_curvature, singular_points

REACH_SCHEMA = "metric-curve-lab/reach/1"
CONVERGENCE_SCHEMA = "metric-curve-lab/convergence/1"


@dataclass(frozen=True)
class ReachReport:
    q: float
    rho: float
    tau_exact: float
    tau_voronoi: float
    tau_delaunay: float
    sample_size: int
    epsilon: float
    critical_points: int = 0
    bottleneck_pairs: int = 0
    notes: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["notes"] = list(self.notes)
        return {"schema": REACH_SCHEMA, **{k: _json_num(v) for k, v in d.items()}}


def _json_num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


# --------------------------------------------------------------------------
# estimators


@dataclass(frozen=True, eq=False)
class VoronoiReach:
    """Intermediate quantities of the Voronoi-based estimate."""

    tau: float
    curvature_bound: float
    bottleneck_bound: float
    local_radii: np.ndarray
    candidates: list


def _bounding_radius(pts: np.ndarray) -> float:
    c = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
    return float(np.max(np.hypot(*(pts - c).T)))


def reach_voronoi_details(A, P: Poly2, V: VoronoiDiagram | None = None) -> VoronoiReach:
    pts = np.asarray(A.all_points, dtype=float)
    V = V if V is not None else voronoi_diagram(pts)
    classes = classify_edges(V, P)
    st = cKDTree(pts)
    vt = cKDTree(np.asarray(V.vertices)) if len(V.vertices) else None
    radii = np.full(len(pts), math.inf)
    for i, p in enumerate(pts):
        if vt is None:
            continue
        delta = default_delta(V, p, vt)
        try:
            radii[i] = estimate_curvature_local(pts, p, delta, site_tree=st, epsilon=0.0)
        except TooFewPoints:
            pass
    cands = bottleneck_candidates(V, classes)
    bottle = _bounding_radius(pts)
    if cands:
        bottle = min(bottle, cands[0].width / 2.0)
    curv = float(radii.min()) if len(radii) else math.inf
    return VoronoiReach(min(curv, bottle), curv, bottle, radii, cands)


def reach_voronoi(A, P: Poly2, V: VoronoiDiagram | None = None) -> float:
    """Voronoi-based estimate: min of the local curvature radii and half the narrowest candidate.

    The bottleneck term starts at the radius of a disk containing the sample.
    """
    return reach_voronoi_details(A, P, V).tau


def reach_delaunay(A) -> float:
    """Smallest distance from a Delaunay circumcenter to the sample."""
    from .delaunay import delaunay_triangulate

    pts = np.asarray(getattr(A, "all_points", A), dtype=float)
    T = delaunay_triangulate(pts)
    d, _ = cKDTree(pts).query(T.centers)
    return float(d.min())


def _sample_box(A, pad: float = 0.25) -> BoundingBox:
    pts = A.all_points
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    m = pad * float(np.max(hi - lo)) + 1e-9
    return BoundingBox(lo[0] - m, hi[0] + m, lo[1] - m, hi[1] + m)


def reach_exact(P: Poly2, A, box: BoundingBox | None = None, estimators: bool = True) -> ReachReport:
    """``tau = min(q, rho/2)`` from the critical-curvature and bottleneck solutions."""
    box = box if box is not None else _sample_box(A)
    sing = singular_points(P, box)
    if sing:
        raise SingularCurve(f"curve has singular point(s) {[tuple(p) for p in sing]}; reach is zero")
    notes = []
    crit = real_critical_curvature(P, A)
    bott = real_bottlenecks(P, A)
    for fam in crit.families + bott.families:
        notes.append(f"{fam.kind}: {fam.note}")
    q, rho = crit.q, bott.rho
    tau = min(q, rho / 2.0)
    tv = reach_voronoi(A, P) if estimators else math.nan
    td = reach_delaunay(A) if estimators else math.nan
    return ReachReport(q, rho, tau, tv, td, len(A), A.epsilon, len(crit.points), len(bott.pairs),
                       tuple(notes))


# --------------------------------------------------------------------------
# set distances


@dataclass(frozen=True, eq=False)
class Soup:
    """A compact set given as points and segments."""

    points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    segments: np.ndarray = field(default_factory=lambda: np.empty((0, 2, 2)))

    @classmethod
    def of(cls, obj) -> "Soup":
        if isinstance(obj, Soup):
            return obj
        if isinstance(obj, tuple) and len(obj) == 2 and not np.isscalar(obj[0]):
            return cls(np.asarray(obj[0], float).reshape(-1, 2), np.asarray(obj[1], float).reshape(-1, 2, 2))
        arr = np.asarray(obj, dtype=float)
        if arr.ndim == 3:
            return cls(segments=arr.reshape(-1, 2, 2))
        return cls(points=arr.reshape(-1, 2))

    def is_empty(self) -> bool:
        return len(self.points) == 0 and len(self.segments) == 0

    def extent(self) -> np.ndarray:
        return np.vstack([self.points, self.segments.reshape(-1, 2)])

    def densify(self, h: float) -> np.ndarray:
        out = [self.points]
        for a, b in self.segments:
            n = max(1, int(math.ceil(np.hypot(*(b - a)) / h)))
            t = np.linspace(0.0, 1.0, n + 1)[:, None]
            out.append(a + t * (b - a))
        return np.vstack(out)


def _seg_dist(p: np.ndarray, seg: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Exact distance from each point to the nearest segment."""
    a, b = seg[:, 0], seg[:, 1]
    d = b - a
    L2 = np.einsum("ij,ij->i", d, d)
    L2 = np.where(L2 == 0.0, 1.0, L2)
    out = np.empty(len(p))
    for k in range(0, len(p), chunk):
        q = p[k:k + chunk, None, :]
        t = np.clip(np.einsum("nij,ij->ni", q - a, d) / L2, 0.0, 1.0)
        r = q - a - t[..., None] * d
        out[k:k + chunk] = np.sqrt(np.min(np.einsum("nij,nij->ni", r, r), axis=1))
    return out


def _dist_to(p: np.ndarray, S: Soup) -> np.ndarray:
    best = np.full(len(p), np.inf)
    if len(S.points):
        best = np.minimum(best, cKDTree(S.points).query(p)[0])
    if len(S.segments):
        best = np.minimum(best, _seg_dist(p, S.segments))
    return best


def hausdorff(A, B, resolution: float = 1e-3) -> float:
    """Hausdorff distance between point/segment soups.

    Segments of the measuring side are sampled every ``resolution`` times the
    joint diameter; distances to the other side are exact.
    """
    SA, SB = Soup.of(A), Soup.of(B)
    if SA.is_empty() or SB.is_empty():
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    allp = np.vstack([SA.extent(), SB.extent()])
    diam = float(np.hypot(*(allp.max(axis=0) - allp.min(axis=0))))
    if diam == 0.0:
        return 0.0
    h = resolution * diam
    ab = float(_dist_to(SA.densify(h), SB).max())
    ba = float(_dist_to(SB.densify(h), SA).max())
    return max(ab, ba)


def wijsman_profile(x, sets) -> list:
    """Distances from ``x`` to each convex cell (0 inside)."""
    return [float(c.distance(x)) for c in sets]


# --------------------------------------------------------------------------
# convergence harness


@dataclass
class ConvergenceRow:
    epsilon: float
    n_points: int
    metrics: dict

    def flat(self) -> dict:
        return {"epsilon": self.epsilon, "n_points": self.n_points, **self.metrics}


@dataclass(frozen=True)
class Probe:
    """A probe point and the curve point whose (nearest-site) cell it measures."""

    point: tuple
    track: tuple


def default_probes(P: Poly2, box: BoundingBox, k: int = 5, offset: float = 0.2, eps: float = 0.1) -> list:
    """``k`` curve points spread along a coarse sample, each probed at ``offset`` along its tangent.

    Points are taken where the tracing step is limited by ``eps`` rather than
    by curvature, so their neighbors move in proportion to epsilon.
    """
    from .poly2 import curvature

    A = epsilon_sample(P, box, eps)
    pts = A.all_points
    kappa = np.array([curvature(P, p, on_curve_tol=1e-6).curvature for p in pts])
    pts = pts[kappa <= 0.2 / eps]
    out = []
    for i in np.linspace(0, len(pts), k, endpoint=False).astype(int):
        x = pts[i]
        gx, gy = P.gradient(*x)
        t = np.array([-gy, gx]) / math.hypot(gx, gy)
        out.append(Probe(tuple(map(float, x + offset * t)), tuple(map(float, x))))
    return out


def _largest_triangles(V: VoronoiDiagram, box: BoundingBox, k: int) -> list:
    T = V.triangulation
    ok = [i for i in range(len(T.triangles)) if box.contains(T.centers[i])]
    ok.sort(key=lambda i: -T.radii[i])
    return [T.sites[T.triangles[i]] for i in ok[:k]]


def _triangle_soup(tris) -> np.ndarray:
    return np.array([[t[i], t[(i + 1) % 3]] for t in tris for i in range(3)]).reshape(-1, 2, 2)


def convergence_experiment(P: Poly2, box: BoundingBox, eps0: float, halvings: int, probes=None,
                           singular=(), k_triangles: int = 2) -> list:
    """Sample at ``eps0 / 2**k`` for ``k = 0..halvings`` and tabulate convergence metrics.

    Per row: Wijsman distance from each probe to the cell of its tracked curve
    point (traced as a seed, so it is a site of every sample), the radii of
    the ``k_triangles`` largest-circumradius Delaunay triangles (circumcenter
    in the box), and the Hausdorff distances
    of those triangles and of the short-edge medial approximation to their
    counterparts in the next row. Without ``probes``, :func:`default_probes`
    supplies five.
    """
    if halvings > 6:
        raise ValueError("at most 6 halvings")
    if probes is None:
        probes = default_probes(P, box, eps=eps0)
    probes = [p if isinstance(p, Probe) else Probe(tuple(p[0]), tuple(p[1])) for p in probes]
    tracks = []
    for pr in probes:
        q = project_to_curve(P, pr.track)
        tracks.append(pr.track if q is None else q)
    clip = box.diagonal
    rows, tri_sets, medials = [], [], []
    for k in range(halvings + 1):
        eps = eps0 / 2**k
        A = epsilon_sample(P, box, eps, singular, seeds=tracks)
        V = voronoi_diagram(A.all_points)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            classes = classify_edges(V, P)
        M = medial_axis_short_edges(V, classes, eps).segments(clip)
        medials.append(_clip_segments(M, box))
        tris = _largest_triangles(V, box, k_triangles)
        tri_sets.append(tris)
        metrics = {}
        for j, pr in enumerate(probes):
            site = V.locate(tracks[j])
            metrics[f"wijsman_{j}"] = wijsman_profile(pr.point, [V.cells[site]])[0]
        for j, t in enumerate(tris):
            metrics[f"triangle_radius_{j}"] = float(_circumradius(t))
        rows.append(ConvergenceRow(eps, len(A), metrics))
    for k, row in enumerate(rows):
        nxt = k + 1 < len(rows)
        row.metrics["triangles_hausdorff"] = (
            hausdorff(_triangle_soup(tri_sets[k]), _triangle_soup(tri_sets[k + 1]))
            if nxt and tri_sets[k] and tri_sets[k + 1] else math.nan
        )
        row.metrics["medial_hausdorff"] = (
            hausdorff(medials[k], medials[k + 1]) if nxt and len(medials[k]) and len(medials[k + 1]) else math.nan
        )
    return rows


def _circumradius(t) -> float:
    a, b, c = (np.hypot(*(t[i] - t[(i + 1) % 3])) for i in range(3))
    area2 = abs((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0]))
    return a * b * c / (2.0 * area2) if area2 else math.inf


def _clip_segments(seg: np.ndarray, box: BoundingBox) -> np.ndarray:
    """Liang-Barsky clipping of segments to the box."""
    out = []
    lo = np.array([box.xmin, box.ymin])
    hi = np.array([box.xmax, box.ymax])
    for a, b in seg:
        d = b - a
        t0, t1 = 0.0, 1.0
        for k in range(2):
            if d[k] == 0.0:
                if not lo[k] <= a[k] <= hi[k]:
                    t0, t1 = 1.0, 0.0
                continue
            u0, u1 = (lo[k] - a[k]) / d[k], (hi[k] - a[k]) / d[k]
            t0, t1 = max(t0, min(u0, u1)), min(t1, max(u0, u1))
        if t0 <= t1:
            out.append((a + t0 * d, a + t1 * d))
    return np.array(out, dtype=float).reshape(-1, 2, 2)


def rows_to_csv(rows) -> str:
    flat = [r.flat() for r in rows]
    keys = []
    for f in flat:
        keys.extend(k for k in f if k not in keys)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for f in flat:
        w.writerow({k: ("" if isinstance(f.get(k), float) and math.isnan(f[k]) else f.get(k, "")) for k in keys})
    return buf.getvalue()


def rows_to_dict(rows) -> dict:
    return {
        "schema": CONVERGENCE_SCHEMA,
        "rows": [{k: _json_num(v) for k, v in r.flat().items()} for r in rows],
    }


def rows_to_json(rows) -> str:
    return json.dumps(rows_to_dict(rows), indent=2, sort_keys=True)


def cell_of(V: VoronoiDiagram, p) -> VoronoiCell:
    return V.cells[V.locate(p)]
