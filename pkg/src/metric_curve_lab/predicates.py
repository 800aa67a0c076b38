"""Orientation and in-circle predicates with exact-arithmetic fallback.

Each predicate is first evaluated in double precision together with a forward
error bound (Shewchuk's stage-A bounds). If the magnitude of the result does
not clear the bound, the determinant is recomputed in integer arithmetic after
scaling all coordinates by a common power of two, which is exact.
"""
import numpy as np

_EPS = np.finfo(float).eps / 2.0
CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def _sign(v) -> int:
    return int(v > 0) - int(v < 0)


def orient2d(a, b, c) -> int:
    """+1 if a, b, c turn counter-clockwise, -1 if clockwise, 0 if collinear."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    if abs(det) > CCW_BOUND * (abs(detleft) + abs(detright)):
        return _sign(det)
    return orient2d_exact(a, b, c)


def _as_ints(values):
    """Scale floats by a common power of two so they become exact integers."""
    parts = [float(v).as_integer_ratio() for v in values]
    den = max(d for _, d in parts)
    return [n * (den // d) for n, d in parts]


def orient2d_exact(a, b, c) -> int:
    ax, ay, bx, by, cx, cy = _as_ints((*a[:2], *b[:2], *c[:2]))
    return _sign((ax - cx) * (by - cy) - (ay - cy) * (bx - cx))


def incircle(a, b, c, d) -> int:
    """+1 if d lies inside the circle through CCW-ordered a, b, c; 0 on it."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    if abs(det) > ICC_BOUND * permanent:
        return _sign(det)
    return incircle_exact(a, b, c, d)


def incircle_exact(a, b, c, d) -> int:
    ax, ay, bx, by, cx, cy, dx, dy = _as_ints((*a[:2], *b[:2], *c[:2], *d[:2]))
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    return _sign(det)
