"""Dense ordered samples of the real curve ``F = 0`` inside a box.

Seeds come from sign changes of F along the edges of a uniform grid; each
seed is traced in both directions with a tangent predictor and a Newton
corrector that projects back onto the curve along the gradient.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoxExit, NoConvergence, NoRealPoints, SingularEncounter
from .newton import newton_refine
from .poly2 import ON_CURVE_TOL, Point, Poly2, curvature

MAX_HALVINGS = 20
MAX_TURN = math.radians(60.0)
_GRAD_TOL = 1e-10


@dataclass(frozen=True)
class BoundingBox:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"empty bounding box {self}")

    @classmethod
    def square(cls, half: float, center=(0.0, 0.0)):
        return cls(center[0] - half, center[0] + half, center[1] - half, center[1] + half)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)

    def contains(self, p) -> bool:
        return self.xmin <= p[0] <= self.xmax and self.ymin <= p[1] <= self.ymax

    def as_tuple(self):
        return (self.xmin, self.xmax, self.ymin, self.ymax)


@dataclass(frozen=True, eq=False)
class Sample:
    """Ordered point chains of an epsilon-approximation plus declared singular points.

    ``closed[k]`` says whether ``components[k]`` is a loop (last point links back
    to the first).
    """

    epsilon: float
    components: tuple
    closed: tuple
    singular_points: tuple = ()
    all_points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def __len__(self):
        return len(self.all_points)

    def to_dict(self) -> dict:
        return {
            "schema": "metric-curve-lab/sample/1",
            "epsilon": self.epsilon,
            "components": [c.tolist() for c in self.components],
            "closed": list(self.closed),
            "singular": [list(p) for p in self.singular_points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Sample":
        comps = tuple(np.asarray(c, dtype=float).reshape(-1, 2) for c in d["components"])
        closed = tuple(d.get("closed", [False] * len(comps)))
        sing = tuple(Point(*p) for p in d.get("singular", []))
        return cls(float(d["epsilon"]), comps, closed, sing, _flatten(comps, sing))

    def chords(self) -> np.ndarray:
        """Lengths of consecutive-point chords over all components (closing chord included)."""
        out = []
        for comp, cl in zip(self.components, self.closed):
            if len(comp) > 1:
                out.append(np.hypot(*np.diff(comp, axis=0).T))
            if cl and len(comp) > 1:
                out.append([np.hypot(*(comp[0] - comp[-1]))])
        return np.concatenate(out) if out else np.empty(0)


def _flatten(comps, singular) -> np.ndarray:
    pts = [c for c in comps if len(c)]
    if singular:
        pts.append(np.asarray(singular, dtype=float).reshape(-1, 2))
    if not pts:
        return np.empty((0, 2))
    allp = np.concatenate(pts)
    _, idx = np.unique(allp, axis=0, return_index=True)
    out = allp[np.sort(idx)]
    out.setflags(write=False)
    return out


# --------------------------------------------------------------------------
# seeding


def _on_curve(P: Poly2, p, tol=ON_CURVE_TOL) -> bool:
    return abs(float(P(p[0], p[1]))) <= tol * float(P.scale(p[0], p[1]))


def project_to_curve(P: Poly2, p, max_iter: int = 30):
    """Gradient-direction Newton projection of ``p`` onto ``F = 0``; None on failure."""
    x, y = float(p[0]), float(p[1])
    Fx, Fy = P.diff("x"), P.diff("y")
    for _ in range(max_iter):
        f = float(P(x, y))
        sc = float(P.scale(x, y))
        if abs(f) <= 1e-13 * sc:
            return (x, y)
        gx, gy = float(Fx(x, y)), float(Fy(x, y))
        g2 = gx * gx + gy * gy
        if g2 == 0.0 or not math.isfinite(g2):
            return None
        x -= f * gx / g2
        y -= f * gy / g2
    return (x, y) if _on_curve(P, (x, y)) else None


def _bisect_edges(P: Poly2, a: np.ndarray, b: np.ndarray, iters: int = 60) -> np.ndarray:
    fa = P(a[:, 0], a[:, 1])
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = P(m[:, 0], m[:, 1])
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left[:, None], m, a)
        fa = np.where(left, fm, fa)
        b = np.where(left[:, None], b, m)
    return 0.5 * (a + b)


def seed_points(P: Poly2, box: BoundingBox, grid_n: int = 64) -> list:
    """On-curve points from sign changes of F along grid edges, lexicographically sorted.

    A component smaller than a grid cell can be missed.
    """
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    xs = np.linspace(box.xmin, box.xmax, grid_n + 1)
    ys = np.linspace(box.ymin, box.ymax, grid_n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    F = P(X, Y)
    S = P.scale(X, Y)
    found = []
    zero = np.abs(F) <= ON_CURVE_TOL * S
    found.extend(np.column_stack([X[zero], Y[zero]]))
    sg = np.sign(F)
    for axis in (0, 1):
        sl0 = [slice(None), slice(None)]
        sl1 = [slice(None), slice(None)]
        sl0[axis] = slice(0, -1)
        sl1[axis] = slice(1, None)
        ch = sg[tuple(sl0)] * sg[tuple(sl1)] < 0
        if ch.any():
            a = np.column_stack([X[tuple(sl0)][ch], Y[tuple(sl0)][ch]])
            b = np.column_stack([X[tuple(sl1)][ch], Y[tuple(sl1)][ch]])
            found.extend(_bisect_edges(P, a, b))
    seeds = []
    for p in found:
        q = project_to_curve(P, p)
        if q is not None and box.contains(q) and _on_curve(P, q):
            seeds.append(q)
    if not seeds:
        raise NoRealPoints("no real points of the curve found in the box")
    seeds = sorted(set(seeds))
    out = [seeds[0]]
    tol = 1e-12 * box.diagonal
    for s in seeds[1:]:
        if math.hypot(s[0] - out[-1][0], s[1] - out[-1][1]) > tol:
            out.append(s)
    return [Point(*s) for s in out]


# --------------------------------------------------------------------------
# tracing


def _tangent(P: Poly2, p, sign: float):
    gx, gy = P.gradient(p[0], p[1])
    g = math.hypot(gx, gy)
    if g == 0.0:
        return None, 0.0
    return np.array([-gy * sign / g, gx * sign / g]), g


def _grad_scale(P: Poly2, p) -> float:
    return float(P.diff("x").scale(p[0], p[1])) + float(P.diff("y").scale(p[0], p[1]))


def _step_size(P: Poly2, p, epsilon: float) -> float:
    h = 0.5 * epsilon
    try:
        k = curvature(P, p, on_curve_tol=1e-6).curvature
    except (ValueError, ArithmeticError):
        return h
    if k > 0:
        h = min(h, 0.2 / k)
    return h


def _trace_one_way(P, start, sign, epsilon, box, singular, origin, min_loop, origin_tangent=None,
                   max_steps=None):
    """March from ``start``; returns (points, reason) with reason in
    {"closed", "box", "singular", "declared"}.

    The march closes on ``origin`` when it arrives there moving along
    ``origin_tangent`` (default: the starting tangent)."""
    pts = [np.asarray(start, dtype=float)]
    cur = pts[0]
    t, _ = _tangent(P, cur, sign)
    if t is None:
        return pts, "singular"
    t0 = t if origin_tangent is None else origin_tangent
    travelled = 0.0
    limited = max_steps is not None
    if not limited:
        max_steps = int(50 * (box.diagonal * 4 / epsilon)) + 1000
    for _ in range(max_steps):
        h = _step_size(P, cur, epsilon)
        accepted = None
        for _ in range(MAX_HALVINGS + 1):
            q = project_to_curve(P, cur + h * t, max_iter=12)
            if q is not None:
                q = np.array(q)
                chord = float(np.hypot(*(q - cur)))
                tn, g = _tangent(P, q, sign)
                if (
                    tn is not None
                    and 0.0 < chord <= epsilon
                    and float(tn @ t) >= math.cos(MAX_TURN)
                    and float((q - cur) @ t) > 0.0
                ):
                    accepted = (q, tn, g, chord)
                    break
            h *= 0.5
        if accepted is None:
            return pts, "singular"
        q, tn, g, chord = accepted
        # loop closure: the new step reaches or passes the starting point
        if origin is not None and travelled > min_loop:
            d0 = float(np.hypot(*(cur - origin)))
            seg = q - cur
            s = float((origin - cur) @ seg) / float(seg @ seg)
            if d0 <= epsilon and s >= 0.0 and float(t @ t0) > 0.0 and (
                s <= 1.0 or float(np.hypot(*(q - origin))) <= 0.5 * epsilon
            ):
                return pts, "closed"
        if not box.contains(q):
            return pts, "box"
        if g <= _GRAD_TOL * max(_grad_scale(P, q), 1e-300):
            return pts, "singular"
        pts.append(q)
        for s_pt in singular:
            if math.hypot(q[0] - s_pt[0], q[1] - s_pt[1]) <= epsilon:
                return pts, "declared"
        travelled += chord
        cur, t = q, tn
    return pts, ("steps" if limited else "singular")


def _trace(P, seed, epsilon, box, singular=()):
    seed = np.asarray(seed, dtype=float)
    fwd, why_f = _trace_one_way(P, seed, 1.0, epsilon, box, singular, seed, 2.0 * epsilon)
    if why_f == "closed":
        # close the loop opposite the seed instead, so the seed's two
        # neighbors are both one regular step away
        m = len(fwd) // 2
        if m >= 2:
            target = fwd[m]
            tt, _ = _tangent(P, target, -1.0)
            bwd, why_b = _trace_one_way(P, seed, -1.0, epsilon, box, singular, target, 0.0, tt)
            if why_b == "closed" and len(bwd) > 1:
                return np.concatenate([np.array(fwd[: m + 1]), np.array(bwd[:0:-1])]), True, (why_b,)
        return np.array(fwd), True, (why_f,)
    bwd, why_b = _trace_one_way(P, seed, -1.0, epsilon, box, singular, None, 0.0)
    arc = np.concatenate([np.array(bwd[:0:-1]).reshape(-1, 2), np.array(fwd)])
    return arc, False, (why_b, why_f)


def trace_component(P: Poly2, seed, epsilon: float, box: BoundingBox) -> np.ndarray:
    """Trace the component through ``seed`` with chord spacing at most ``epsilon``.

    Returns the ordered points of a closed loop (first point not repeated).
    Raises :class:`BoxExit` or :class:`SingularEncounter` for arcs, with the
    partial arc (traced both ways) attached as ``.points``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not _on_curve(P, seed, 1e-6):
        raise ValueError(f"seed {tuple(seed)} is not on the curve")
    arc, closed, why = _trace(P, seed, epsilon, box)
    if closed:
        return arc
    if "singular" in why:
        raise SingularEncounter("gradient vanishes along the trace", arc)
    raise BoxExit("curve leaves the bounding box", arc)


def _near_polyline(p, t, comps, tol) -> bool:
    for comp, cl in comps:
        if len(comp) < 2:
            if len(comp) and math.hypot(*(comp[0] - p)) <= tol:
                return True
            continue
        a = comp
        b = np.roll(comp, -1, axis=0) if cl else comp[1:]
        a = a if cl else comp[:-1]
        d = b - a
        L2 = (d**2).sum(axis=1)
        L2[L2 == 0] = 1.0
        s = np.clip(((p - a) * d).sum(axis=1) / L2, 0.0, 1.0)
        dist = np.hypot(*(a + s[:, None] * d - p).T)
        k = int(np.argmin(dist))
        if dist[k] <= tol:
            dk = d[k] / math.sqrt(L2[k])
            if abs(float(dk @ t)) >= 0.9:
                return True
    return False


def _pin(P, chain, closed, x, epsilon, box, singular):
    """Splice ``x`` into ``chain`` with one regular tracing step on either side."""
    fwd, _ = _trace_one_way(P, x, 1.0, epsilon, box, singular, None, 0.0, max_steps=1)
    bwd, _ = _trace_one_way(P, x, -1.0, epsilon, box, singular, None, 0.0, max_steps=1)
    t, _ = _tangent(P, x, 1.0)
    new = [p for p in (bwd[1:] + [np.asarray(x, dtype=float)] + fwd[1:])]
    lo = float((new[0] - x) @ t)
    hi = float((new[-1] - x) @ t)
    s = (chain - x) @ t
    near = np.hypot(*(chain - x).T) <= 2.0 * epsilon
    # a quarter-step margin keeps near-duplicates of the new end points out;
    # the gaps left behind stay below 1.25 steps
    m = 0.25 * min(-lo, hi) if lo < 0 < hi else 1e-12
    drop = near & (s > lo - m) & (s < hi + m)
    keep_idx = np.nonzero(~drop)[0]
    if len(keep_idx) == len(chain):
        # no point strictly between: insert after the last point behind x
        behind = np.nonzero(near & (s <= lo - m))[0]
        if len(behind) == 0:
            return chain
        at = int(behind[-1]) + 1
    else:
        at = int(np.nonzero(drop)[0][0])
    # the chain may run against the tangent at x
    k = max(at - 1, 0)
    d = chain[min(k + 1, len(chain) - 1)] - chain[k]
    if float(d @ t) < 0:
        new = new[::-1]
    before = [chain[i] for i in keep_idx if i < at]
    after = [chain[i] for i in keep_idx if i >= at]
    return np.array(before + new + after)


def epsilon_sample(P: Poly2, box: BoundingBox, epsilon: float, singular_pts=(), grid_n: int = 64,
                   seeds=()) -> Sample:
    """Epsilon-approximation of ``V(P)`` in ``box``: traced chains plus ``singular_pts``.

    Extra ``seeds`` (projected onto the curve) are traced first, or spliced
    into an already traced chain, with one regular step on each side. They
    therefore belong to the sample at every epsilon with evenly spaced neighbors.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    singular = tuple(Point(float(p[0]), float(p[1])) for p in singular_pts)
    extra_ok = [q for q in (project_to_curve(P, q) for q in seeds) if q is not None]
    seeds = extra_ok + list(seed_points(P, box, grid_n))
    done = []
    for k, s in enumerate(seeds):
        sp = np.asarray(s)
        if any(math.hypot(s[0] - q[0], s[1] - q[1]) <= epsilon for q in singular):
            continue
        t, g = _tangent(P, sp, 1.0)
        if t is None or g <= _GRAD_TOL * max(_grad_scale(P, sp), 1e-300):
            continue
        if _near_polyline(sp, t, done, epsilon):
            if k < len(extra_ok):
                done = [
                    (_pin(P, c, cl, sp, epsilon, box, singular), cl)
                    if _near_polyline(sp, t, [(c, cl)], epsilon) else (c, cl)
                    for c, cl in done
                ]
            continue
        arc, closed, _ = _trace(P, sp, epsilon, box, singular)
        done.append((arc, closed))
    comps = tuple(a for a, _ in done)
    for c in comps:
        c.setflags(write=False)
    return Sample(
        float(epsilon), comps, tuple(c for _, c in done), singular, _flatten(comps, singular)
    )


def sample_with_count(P: Poly2, box: BoundingBox, n_points: int, singular_pts=(), grid_n: int = 64,
                      iters: int = 40) -> Sample:
    """Epsilon-sample whose size is as close as possible to ``n_points`` (bisection on epsilon)."""
    lo, hi = 1e-5 * box.diagonal, box.diagonal
    best = None
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        A = epsilon_sample(P, box, mid, singular_pts, grid_n)
        if best is None or abs(len(A) - n_points) < abs(len(best) - n_points):
            best = A
        if len(A) == n_points:
            return A
        if len(A) > n_points:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1 + 1e-9:
            break
    return best


# --------------------------------------------------------------------------
# foot points


def nearest_point_on_curve(P: Poly2, p, seed, max_iter: int = 50) -> Point:
    """Foot point ``q`` of ``p``: F(q) = 0 and ``p - q`` parallel to the normal at q."""
    p = np.asarray(p, dtype=float)
    Fx, Fy = P.diff("x"), P.diff("y")
    Fxx, Fxy, Fyy = Fx.diff("x"), Fx.diff("y"), Fy.diff("y")

    def system(q):
        x, y = q
        gx, gy = float(Fx(x, y)), float(Fy(x, y))
        hxx, hxy, hyy = float(Fxx(x, y)), float(Fxy(x, y)), float(Fyy(x, y))
        a0, a1 = p[0] - x, p[1] - y
        sF = max(float(P.scale(x, y)), 1e-300)
        sC = max(math.hypot(a0, a1) * math.hypot(gx, gy), _grad_scale(P, q) * 1e-3, 1e-300)
        r = np.array([float(P(x, y)) / sF, (a0 * gy - a1 * gx) / sC])
        J = np.array(
            [
                [gx / sF, gy / sF],
                [(-gy + a0 * hxy - a1 * hxx) / sC, (gx + a0 * hyy - a1 * hxy) / sC],
            ]
        )
        return r, J

    try:
        q = newton_refine(system, np.asarray(seed, dtype=float), max_iter=max_iter, tol=1e-13)
    except ArithmeticError as exc:
        raise NoConvergence(f"foot point iteration failed: {exc}") from exc
    return Point(float(q[0]), float(q[1]))
