"""Real solutions of the critical-curvature, bottleneck and singularity systems.

All solutions are seeded from a traced sample of the curve and polished with
Newton's method, so the lists are complete only empirically: a solution whose
neighborhood the sample never visits is missed. Each reported solution carries
its residuals so it can be checked independently.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CurveLabWarning, DegreeError, NoConvergence, SingularJacobian
from .newton import newton_refine
from .parallel import pmap
from .poly2 import (
    Point,
    Poly2,
    affine_critical_curvature_poly,
    bottleneck_residual,
    critical_curvature_poly,
    curvature,
)

__all__ = [
    "BottleneckPair",
    "BottleneckReport",
    "CriticalPoint",
    "CriticalReport",
    "DegenerateFamily",
    "newton_refine",
    "real_bottlenecks",
    "real_critical_curvature",
    "singular_points",
]

DEDUPE_TOL = 1e-6
NEWTON_TOL = 1e-10


@dataclass(frozen=True)
class CriticalPoint:
    p: Point
    radius: float
    curvature: float
    residuals: tuple  # (|F|, |G|)


@dataclass(frozen=True)
class BottleneckPair:
    x: Point
    y: Point
    width: float
    residual_norm: float


@dataclass(frozen=True)
class DegenerateFamily:
    """A positive-dimensional solution set, reported by one representative."""

    kind: str
    representative: tuple
    value: float
    note: str


class CriticalReport(NamedTuple):
    points: list
    q: float
    families: list


class BottleneckReport(NamedTuple):
    pairs: list
    rho: float
    families: list


def _dedupe(points, tol):
    out = []
    for p in points:
        if all(np.max(np.abs(np.asarray(p) - np.asarray(o))) > tol for o in out):
            out.append(p)
    return out


def _chains(A):
    for comp, closed in zip(A.components, A.closed):
        if len(comp) < 2:
            continue
        yield (np.vstack([comp, comp[:1]]) if closed else comp)


# --------------------------------------------------------------------------
# critical curvature


def _critical_system(P: Poly2, G: Poly2, sF: float, sG: float):
    Fx, Fy, Gx, Gy = P.diff("x"), P.diff("y"), G.diff("x"), G.diff("y")

    def system(v):
        x, y = v
        r = np.array([P(x, y) / sF, G(x, y) / sG])
        J = np.array([[Fx(x, y) / sF, Fy(x, y) / sF], [Gx(x, y) / sG, Gy(x, y) / sG]])
        return r, J

    return system


def _critical_seeds(G: Poly2, A) -> list:
    seeds = []
    for chain in _chains(A):
        g = G(chain[:, 0], chain[:, 1])
        s = np.sign(g)
        seeds.extend(chain[s == 0])
        for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
            t = g[i] / (g[i] - g[i + 1])
            seeds.append(chain[i] + t * (chain[i + 1] - chain[i]))
    return seeds


def _solve_critical(P: Poly2, G: Poly2, A, dedupe_tol: float, tol: float):
    dropped = 0
    Gx, Gy = G.diff("x"), G.diff("y")

    def refine(seed):
        x, y = seed
        sF = max(float(P.scale(x, y)), 1e-300)
        # every term of G can vanish at a point (the ellipse axes), so fall
        # back to the size of its gradient terms
        sG = max(float(G.scale(x, y)), float(Gx.scale(x, y)) + float(Gy.scale(x, y)), 1e-300)
        try:
            return newton_refine(_critical_system(P, G, sF, sG), seed, tol=tol)
        except (NoConvergence, SingularJacobian):
            return None

    sols = pmap(refine, _critical_seeds(G, A))
    dropped = sum(s is None for s in sols)
    pts = _dedupe([s for s in sols if s is not None], dedupe_tol)
    pts.sort(key=lambda p: (round(p[0], 9), round(p[1], 9)))
    return pts, dropped


def _constant_curvature(P: Poly2, A, G: Poly2) -> bool:
    pts = A.all_points
    g = np.abs(G(pts[:, 0], pts[:, 1]))
    return bool(np.all(g <= 1e-9 * np.maximum(G.scale(pts[:, 0], pts[:, 1]), 1e-300)))


def real_critical_curvature(P: Poly2, A, *, box=None, retries: int = 3,
                            dedupe_tol: float = DEDUPE_TOL, tol: float = NEWTON_TOL) -> CriticalReport:
    """Real points of ``P = 0`` where curvature is critical, found along the sample's traces.

    Seeds are the sign changes of the critical-curvature polynomial between
    consecutive sample points. When ``box`` is given the curve is resampled at
    half the spacing (up to ``retries`` times) until the solution set is stable.
    Conics use the affine variant of the polynomial; constant-curvature curves
    come back as a :class:`DegenerateFamily`.
    """
    from .sampler import epsilon_sample

    if P.degree >= 3:
        G = critical_curvature_poly(P)
    elif P.degree == 2:
        G = affine_critical_curvature_poly(P)
    else:
        raise DegreeError("a line has no curvature")
    if G.degree < 0 or _constant_curvature(P, A, G):
        p = A.all_points[0]
        c = curvature(P, p, on_curve_tol=1e-6)
        fam = DegenerateFamily("critical_curvature", (Point(*map(float, p)),), c.radius,
                               "curvature is constant along the curve")
        return CriticalReport([], c.radius, [fam])

    pts, dropped = _solve_critical(P, G, A, dedupe_tol, tol)
    if box is not None:
        eps = A.epsilon
        for _ in range(retries):
            eps /= 2.0
            A2 = epsilon_sample(P, box, eps, A.singular_points)
            pts2, dropped = _solve_critical(P, G, A2, dedupe_tol, tol)
            same = len(pts2) == len(pts) and all(
                min(np.max(np.abs(a - b)) for b in pts2) <= dedupe_tol for a in pts
            )
            pts = pts2
            if same:
                break
        else:
            warnings.warn("critical-curvature count changed under every refinement", CurveLabWarning,
                          stacklevel=2)
    if dropped:
        warnings.warn(f"{dropped} critical-curvature seed(s) did not converge", CurveLabWarning, stacklevel=2)

    out = []
    for x, y in pts:
        c = curvature(P, (x, y), on_curve_tol=1e-6)
        out.append(CriticalPoint(Point(float(x), float(y)), c.radius, c.curvature,
                                 (abs(float(P(x, y))), abs(float(G(x, y))))))
    q = min((c.radius for c in out), default=math.inf)
    return CriticalReport(out, q, [])


# --------------------------------------------------------------------------
# bottlenecks


def _bottleneck_system(P: Poly2, s: np.ndarray):
    Fx, Fy = P.diff("x"), P.diff("y")
    Fxx, Fxy, Fyy = Fx.diff("x"), Fx.diff("y"), Fy.diff("y")

    def system(v):
        x0, x1, y0, y1 = v
        gx = np.array([Fx(x0, x1), Fy(x0, x1)])
        gy = np.array([Fx(y0, y1), Fy(y0, y1)])
        hx = (Fxx(x0, x1), Fxy(x0, x1), Fyy(x0, x1))
        hy = (Fxx(y0, y1), Fxy(y0, y1), Fyy(y0, y1))
        dx, dy = y0 - x0, y1 - x1
        r = np.array([P(x0, x1), P(y0, y1), dx * gx[1] - dy * gx[0], -dx * gy[1] + dy * gy[0]])
        J = np.array(
            [
                [gx[0], gx[1], 0.0, 0.0],
                [0.0, 0.0, gy[0], gy[1]],
                [-gx[1] + dx * hx[1] - dy * hx[0], gx[0] + dx * hx[2] - dy * hx[1], gx[1], -gx[0]],
                [gy[1], -gy[0], -gy[1] - dx * hy[1] + dy * hy[0], gy[0] - dx * hy[2] + dy * hy[1]],
            ]
        )
        return r / s, J / s[:, None]

    return system


def _alignment_seeds(P: Poly2, A) -> list:
    """Cells of the (site, site) grid where both normal-alignment residuals change sign."""
    chains = list(_chains(A))
    pts = np.vstack(chains)
    # index of each point's successor along its chain (-1 at chain ends)
    nxt = []
    off = 0
    for c in chains:
        n = len(c)
        nxt.extend(range(off + 1, off + n))
        nxt.append(-1)
        off += n
    nxt = np.array(nxt)
    g = np.column_stack(P.gradient(pts[:, 0], pts[:, 1]))
    g = g / np.hypot(g[:, 0], g[:, 1])[:, None]
    d = pts[None, :, :] - pts[:, None, :]  # d[i, j] = p_j - p_i
    L = np.hypot(d[..., 0], d[..., 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        c1 = (d[..., 0] * g[:, None, 1] - d[..., 1] * g[:, None, 0]) / L
    c2 = c1.T  # alignment of the chord with the normal at j
    i = np.nonzero(nxt >= 0)[0]
    a, b = np.meshgrid(i, i, indexing="ij")
    a2, b2 = nxt[a], nxt[b]

    def changes(c):
        corners = np.stack([c[a, b], c[a2, b], c[a, b2], c[a2, b2]])
        ok = np.all(np.isfinite(corners), axis=0)
        return ok & (corners.min(axis=0) <= 0) & (corners.max(axis=0) >= 0)

    hit = changes(c1) & changes(c2) & (a < b)
    seeds = []
    for u, v in zip(a[hit], b[hit]):
        x = 0.5 * (pts[u] + pts[nxt[u]])
        y = 0.5 * (pts[v] + pts[nxt[v]])
        seeds.append(np.concatenate([x, y]))
    return seeds


def _refine_pair(P: Poly2, seed, tol):
    x, y = seed[:2], seed[2:]
    w = max(float(np.hypot(*(y - x))), 1e-12)
    g = max(float(np.hypot(*P.gradient(*x))), float(np.hypot(*P.gradient(*y))), 1e-300)
    s = np.array([max(float(P.scale(*x)), 1e-300), max(float(P.scale(*y)), 1e-300), w * g, w * g])
    system = _bottleneck_system(P, s)
    try:
        return newton_refine(system, seed, tol=tol * 1e-2), False
    except (NoConvergence, SingularJacobian):
        pass
    try:
        v = newton_refine(system, seed, tol=tol * 1e-2, rank_deficient=True)
    except (NoConvergence, SingularJacobian):
        return None, False
    sv = np.linalg.svd(system(v)[1], compute_uv=False)
    return v, bool(sv[-1] <= 1e-8 * sv[0])


def real_bottlenecks(P: Poly2, A, candidates=None, *, dedupe_tol: float = DEDUPE_TOL,
                     tol: float = NEWTON_TOL) -> BottleneckReport:
    """Real bottleneck pairs of ``P = 0`` seeded from the sample (and optional candidates).

    Pairs closer than ``10 * dedupe_tol`` (the diagonal) are discarded. A
    solution with a rank-deficient Jacobian is reported as a degenerate family.
    """
    seeds = _alignment_seeds(P, A)
    for c in candidates or ():
        seeds.append(np.array([*c.point_a, *c.point_b], dtype=float))
    results = pmap(lambda s: _refine_pair(P, s, tol), seeds)
    dropped = 0
    found = []
    families = []
    for v, degenerate in results:
        if v is None:
            dropped += 1
            continue
        x, y = v[:2], v[2:]
        width = float(np.hypot(*(y - x)))
        if width < 10.0 * dedupe_tol:
            continue
        if degenerate:
            if not families:
                families.append(DegenerateFamily("bottleneck", (Point(*map(float, x)), Point(*map(float, y))), width,
                                                 "rank-deficient Jacobian: a continuum of bottlenecks"))
            continue
        if tuple(np.round(x, 6)) > tuple(np.round(y, 6)):
            x, y = y, x
        found.append(np.concatenate([x, y]))
    uniq = _dedupe(found, dedupe_tol)
    pairs = []
    for v in uniq:
        x, y = Point(*map(float, v[:2])), Point(*map(float, v[2:]))
        r = float(np.max(np.abs(bottleneck_residual(P, x, y))))
        pairs.append(BottleneckPair(x, y, float(np.hypot(x.x - y.x, x.y - y.y)), r))
    pairs.sort(key=lambda b: (b.width, b.x, b.y))
    if dropped and not families:
        warnings.warn(f"{dropped} bottleneck seed(s) did not converge", CurveLabWarning, stacklevel=2)
    widths = [b.width for b in pairs] + [f.value for f in families]
    return BottleneckReport(pairs, min(widths, default=math.inf), families)


# --------------------------------------------------------------------------
# singular points


def singular_points(P: Poly2, box, grid_n: int = 24, tol: float = 1e-9) -> list:
    """Real points of the box where ``F``, ``F_x`` and ``F_y`` all vanish."""
    x0, x1, y0, y1 = box.as_tuple() if hasattr(box, "as_tuple") else box
    Fx, Fy = P.diff("x"), P.diff("y")
    Fxx, Fxy, Fyy = Fx.diff("x"), Fx.diff("y"), Fy.diff("y")
    if Fx.degree < 0 and Fy.degree < 0:
        return []
    corners = (np.array([x0, x1, x0, x1]), np.array([y0, y0, y1, y1]))

    # a fixed scale: the gradient's own term size vanishes at a cusp
    s = max(float(np.max(Fx.scale(*corners) + Fy.scale(*corners))), 1e-300)

    def system(v):
        x, y = v
        r = np.array([Fx(x, y), Fy(x, y)]) / s
        J = np.array([[Fxx(x, y), Fxy(x, y)], [Fxy(x, y), Fyy(x, y)]]) / s
        return r, J

    seeds = [np.array([x, y]) for x in np.linspace(x0, x1, grid_n) for y in np.linspace(y0, y1, grid_n)]

    def refine(seed):
        try:
            return newton_refine(system, seed, max_iter=100, tol=1e-26)
        except (NoConvergence, SingularJacobian):
            return None

    found = []
    for v in pmap(refine, seeds):
        if v is None:
            continue
        x, y = v
        if not (x0 - 1e-9 <= x <= x1 + 1e-9 and y0 - 1e-9 <= y <= y1 + 1e-9):
            continue
        if abs(P(x, y)) > tol * max(float(P.scale(x, y)), 1.0):
            continue
        found.append(v)
    scale = max(abs(x0), abs(x1), abs(y0), abs(y1), 1.0)
    pts = _dedupe(found, 1e-5 * scale)
    pts = [Point(float(x) + 0.0, float(y) + 0.0) for x, y in pts]
    return sorted(pts)
