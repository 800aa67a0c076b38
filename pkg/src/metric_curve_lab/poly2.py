"""Dense bivariate/trivariate polynomials and plane-curve differential geometry.

Coefficients are stored exactly (``fractions.Fraction``) whenever the input is
rational, so symbolic constructions such as the Hessian determinant or the
critical-curvature polynomial are free of cancellation error. Evaluation always
goes through a cached float64 copy of the coefficient grid.

``c[i, j]`` is the coefficient of ``x**i * y**j`` (``c[i, j, k]`` adds ``z**k``).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    DegreeError,
    HessianDegenerate,
    NotOnCurve,
    PolySyntaxError,
    SingularPoint,
)

MAX_DEGREE = 64
ON_CURVE_TOL = 1e-9
_ZERO = Fraction(0)
_VARS = {"x": 0, "y": 1, "z": 2}


class Point(NamedTuple):
    x: float
    y: float


def _coerce(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (bool, np.bool_)):
        raise TypeError("boolean coefficient")
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, (float, np.floating)):
        c = float(c)
        if not math.isfinite(c):
            raise ValueError("polynomial coefficients must be finite")
        return c
    if isinstance(c, Decimal):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


class _DensePoly:
    """Immutable dense polynomial in ``nvars`` variables."""

    nvars = 0
    __slots__ = ("_c", "_fc", "_terms", "_cache")

    def __init__(self, coeffs):
        arr = np.array(coeffs, dtype=object)
        if arr.ndim == 0:
            arr = arr.reshape((1,) * self.nvars)
        if arr.ndim != self.nvars:
            raise ValueError(f"expected a {self.nvars}-D coefficient grid, got {arr.ndim}-D")
        if arr.size == 0:
            arr = np.full((1,) * self.nvars, _ZERO, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for idx, c in np.ndenumerate(arr):
            out[idx] = _coerce(c)
        self._c = _trim(out)
        self._c.setflags(write=False)
        self._fc = None
        self._terms = None
        self._cache = {}

    @classmethod
    def from_terms(cls, terms):
        """Build from ``{(i, j[, k]): coeff}``."""
        terms = {tuple(k): v for k, v in terms.items()}
        if not terms:
            return cls(0)
        shape = tuple(max(k[a] for k in terms) + 1 for a in range(cls.nvars))
        arr = np.full(shape, _ZERO, dtype=object)
        for k, v in terms.items():
            arr[k] = arr[k] + _coerce(v)
        return cls(arr)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c.copy()

    @property
    def float_coeffs(self) -> np.ndarray:
        if self._fc is None:
            self._fc = np.array(self._c, dtype=float)
            self._fc.setflags(write=False)
        return self._fc

    def terms(self):
        """Nonzero ``(exponents, coefficient)`` pairs."""
        if self._terms is None:
            self._terms = tuple((idx, c) for idx, c in np.ndenumerate(self._c) if c != 0)
        return self._terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(idx) for idx, _ in self.terms()), default=-1)

    @property
    def is_zero(self) -> bool:
        return not self.terms()

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for _, c in self.terms())

    def _like(self, other):
        if isinstance(other, type(self)):
            return other
        if isinstance(other, (int, float, Fraction, np.integer, np.floating)):
            return type(self)(other)
        return NotImplemented

    def __add__(self, other):
        other = self._like(other)
        if other is NotImplemented:
            return other
        shape = tuple(max(a, b) for a, b in zip(self._c.shape, other._c.shape))
        out = np.full(shape, _ZERO, dtype=object)
        out[tuple(slice(0, n) for n in self._c.shape)] += self._c
        out[tuple(slice(0, n) for n in other._c.shape)] += other._c
        return type(self)(out)

    __radd__ = __add__

    def __neg__(self):
        return type(self)(-self._c)

    def __sub__(self, other):
        other = self._like(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._like(other)
        if other is NotImplemented:
            return other
        shape = tuple(a + b - 1 for a, b in zip(self._c.shape, other._c.shape))
        out = np.full(shape, _ZERO, dtype=object)
        b_terms = other.terms()
        for ia, ca in self.terms():
            for ib, cb in b_terms:
                k = tuple(p + q for p, q in zip(ia, ib))
                out[k] = out[k] + ca * cb
        return type(self)(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        if self.degree * n > MAX_DEGREE:
            raise OverflowError(f"degree {self.degree * n} exceeds {MAX_DEGREE}")
        out = type(self)(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        other = self._like(other)
        if other is NotImplemented:
            return other
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash((type(self).__name__, self.terms()))

    def diff(self, var):
        """Partial derivative; ``var`` is ``'x'``, ``'y'``, ``'z'`` or an axis index."""
        axis = _VARS[var] if isinstance(var, str) else int(var)
        if not 0 <= axis < self.nvars:
            raise ValueError(f"no variable {var!r} in a {self.nvars}-variable polynomial")
        key = ("d", axis)
        if key not in self._cache:
            n = self._c.shape[axis]
            if n == 1:
                self._cache[key] = type(self)(0)
            else:
                mult = np.arange(1, n, dtype=object).reshape(
                    tuple(-1 if a == axis else 1 for a in range(self.nvars))
                )
                sl = tuple(slice(1, None) if a == axis else slice(None) for a in range(self.nvars))
                self._cache[key] = type(self)(self._c[sl] * mult)
        return self._cache[key]

    def to_float(self):
        return type(self)(self.float_coeffs)


def _trim(arr: np.ndarray) -> np.ndarray:
    nz = np.array([[c != 0 for c in arr.ravel()]]).reshape(arr.shape)
    if not nz.any():
        return np.full((1,) * arr.ndim, _ZERO, dtype=object)
    sl = []
    for axis in range(arr.ndim):
        other = tuple(a for a in range(arr.ndim) if a != axis)
        used = nz.any(axis=other) if other else nz
        sl.append(slice(0, int(np.nonzero(used)[0].max()) + 1))
    return arr[tuple(sl)].copy()


class Poly2(_DensePoly):
    """Bivariate polynomial in ``x`` and ``y``."""

    nvars = 2
    __slots__ = ()

    def __call__(self, x, y):
        return npoly.polyval2d(x, y, self.float_coeffs)

    def scale(self, x, y):
        """Sum of ``|c_ij| |x|^i |y|^j``; the size of the terms being cancelled."""
        return npoly.polyval2d(np.abs(x), np.abs(y), np.abs(self.float_coeffs))

    def jet(self, x, y):
        """Values of F and all partials through order two (arrays allowed)."""
        fx, fy = self.diff("x"), self.diff("y")
        return (
            self(x, y),
            fx(x, y),
            fy(x, y),
            fx.diff("x")(x, y),
            fx.diff("y")(x, y),
            fy.diff("y")(x, y),
        )

    def gradient(self, x, y):
        return self.diff("x")(x, y), self.diff("y")(x, y)

    def __repr__(self):
        return f"Poly2({self.to_expr()!r})"

    def to_expr(self) -> str:
        """Render in the grammar accepted by :func:`parse_poly`."""
        terms = sorted(self.terms(), key=lambda t: (-sum(t[0]), -t[0][0]))
        if not terms:
            return "0"
        parts = []
        for k, ((i, j), c) in enumerate(terms):
            neg = c < 0
            mag = -c if neg else c
            mono = "*".join(
                f"{v}^{e}" if e > 1 else v for v, e in (("x", i), ("y", j)) if e > 0
            )
            cs = _format_coeff(mag)
            if mono and cs == "1":
                body = mono
            elif mono:
                body = f"{cs}*{mono}"
            else:
                body = cs
            if k == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f" - {body}" if neg else f" + {body}")
        return "".join(parts)

    def homogenize(self, d: int | None = None) -> "Poly3":
        return homogenize(self, self.degree if d is None else d)


class Poly3(_DensePoly):
    """Trivariate polynomial in ``x, y, z``."""

    nvars = 3
    __slots__ = ()

    def __call__(self, x, y, z):
        return npoly.polyval3d(x, y, z, self.float_coeffs)

    @property
    def homogeneous_degree(self):
        """Common total degree of all terms, or None if not homogeneous."""
        degs = {sum(idx) for idx, _ in self.terms()}
        return degs.pop() if len(degs) == 1 else None

    def dehomogenize(self) -> Poly2:
        """Substitute ``z = 1``."""
        return Poly2.from_terms(_accumulate(((i, j), c) for (i, j, _), c in self.terms()))

    def __repr__(self):
        return f"Poly3(degree={self.degree}, terms={len(self.terms())})"


def _accumulate(pairs):
    out = {}
    for k, c in pairs:
        out[k] = out.get(k, 0) + c
    return out


def _format_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"({c.numerator}/{c.denominator})"
    s = format(Decimal(c), "f")
    return s


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<var>[xy])|(?P<op>[-+*^/()]))")


def _tokenize(text: str):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise PolySyntaxError(f"unexpected character {text[bad]!r}", text, _byte(text, bad))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), _byte(text, start)))
        pos = m.end()
    toks.append(("end", "", _byte(text, n)))
    return toks


def _byte(text: str, char_index: int) -> int:
    return len(text[:char_index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise PolySyntaxError(msg, self.text, tok[2])

    def take(self, value):
        tok = self.peek()
        if tok[1] != value:
            self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def parse(self) -> Poly2:
        p = self.expr()
        if self.peek()[0] != "end":
            tok = self.peek()
            if tok[0] in ("num", "var") or tok[1] == "(":
                self.error("implicit multiplication is not allowed")
            self.error(f"unexpected {tok[1]!r}")
        return p

    def expr(self) -> Poly2:
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take(self.peek()[1])[1] == "-" else 1
        acc = self.term() * sign
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.take(self.peek()[1])[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Poly2:
        acc = self.factor()
        while self.peek()[1] == "*":
            self.take("*")
            acc = acc * self.factor()
            _check_degree(acc, self)
        return acc

    def factor(self) -> Poly2:
        kind, val, off = self.peek()
        if kind == "num":
            self.i += 1
            return Poly2(Fraction(val))
        if kind == "var":
            self.i += 1
            e = self.power()
            if e > MAX_DEGREE:
                raise OverflowError(f"degree {e} exceeds {MAX_DEGREE}")
            shape = [1, 1]
            shape[_VARS[val]] = e + 1
            arr = np.full(shape, _ZERO, dtype=object)
            arr[(e, 0) if val == "x" else (0, e)] = Fraction(1)
            return Poly2(arr)
        if val == "(":
            if self._is_fraction():
                self.take("(")
                num = int(self.peek()[1])
                self.i += 1
                self.take("/")
                tok = self.peek()
                den = int(tok[1])
                if den == 0:
                    self.error("zero denominator", tok)
                self.i += 1
                self.take(")")
                return Poly2(Fraction(num, den))
            self.take("(")
            inner = self.expr()
            self.take(")")
            if self.peek()[1] == "^":
                e = self.power()
                if inner.degree * e > MAX_DEGREE:
                    raise OverflowError(f"degree {inner.degree * e} exceeds {MAX_DEGREE}")
                inner = inner**e
            return inner
        if kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {val!r}")

    def power(self) -> int:
        if self.peek()[1] != "^":
            return 1
        self.take("^")
        kind, val, _ = self.peek()
        if kind != "num" or not val.isdigit():
            self.error("exponent must be an unsigned integer")
        self.i += 1
        return int(val)

    def _is_fraction(self) -> bool:
        t = [self.peek(k) for k in range(5)]
        return (
            t[1][0] == "num"
            and t[1][1].isdigit()
            and t[2][1] == "/"
            and t[3][0] == "num"
            and t[3][1].isdigit()
            and t[4][1] == ")"
        )


def _check_degree(p: Poly2, parser: _Parser):
    if p.degree > MAX_DEGREE:
        raise OverflowError(f"degree {p.degree} exceeds {MAX_DEGREE}")


def parse_poly(text: str) -> Poly2:
    """Parse an expression such as ``"x^4 - x^2*y^2 + (1/4)*y - 1"``.

    Terms are products of coefficients, ``x``/``y`` powers and parenthesised
    sub-expressions; multiplication must be written out. Fractions are written
    ``(p/q)``.
    """
    if not isinstance(text, str) or not text.strip():
        raise PolySyntaxError("empty expression", text or "", 0)
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# arithmetic helpers with the module-level call style


def poly_diff(P, var):
    return P.diff(var)


def poly_mul(P, Q):
    return P * Q


def poly_add(P, Q):
    return P + Q


def homogenize(P: Poly2, d: int) -> Poly3:
    if d < P.degree:
        raise DegreeError(f"cannot homogenize degree {P.degree} polynomial to degree {d}")
    return Poly3.from_terms({(i, j, d - i - j): c for (i, j), c in P.terms()})


# --------------------------------------------------------------------------
# pointwise geometry


@dataclass(frozen=True)
class Jet2:
    f: float
    fx: float
    fy: float
    fxx: float
    fxy: float
    fyy: float


def eval_jet2(P: Poly2, p) -> Jet2:
    return Jet2(*(float(v) for v in P.jet(float(p[0]), float(p[1]))))


@dataclass(frozen=True)
class CurvatureData:
    """Signed radius, unsigned curvature and center of curvature at a point.

    At an inflection (flat point) ``radius_signed`` is ``inf``, ``curvature`` is
    0 and ``center`` is None.
    """

    radius_signed: float
    curvature: float
    center: Point | None

    @property
    def is_flat(self) -> bool:
        return self.center is None

    @property
    def radius(self) -> float:
        return abs(self.radius_signed)


def _check_smooth(P: Poly2, j: Jet2, p, on_curve_tol: float):
    x, y = float(p[0]), float(p[1])
    if abs(j.f) > on_curve_tol * float(P.scale(x, y)):
        raise NotOnCurve(f"|F{tuple(p)}| = {abs(j.f):.3g} is not within tolerance")
    g2 = j.fx * j.fx + j.fy * j.fy
    gscale = float(P.diff("x").scale(x, y)) + float(P.diff("y").scale(x, y))
    if g2 == 0.0 or math.sqrt(g2) <= 1e-10 * gscale:
        raise SingularPoint(f"gradient vanishes at {tuple(p)}")
    return g2


def curvature(P: Poly2, p, on_curve_tol: float = ON_CURVE_TOL) -> CurvatureData:
    j = eval_jet2(P, p)
    g2 = _check_smooth(P, j, p, on_curve_tol)
    D = j.fxx * j.fy**2 - 2.0 * j.fxy * j.fx * j.fy + j.fyy * j.fx**2
    Dscale = abs(j.fxx) * j.fy**2 + 2.0 * abs(j.fxy * j.fx * j.fy) + abs(j.fyy) * j.fx**2
    if D == 0.0 or abs(D) <= 1e-12 * Dscale:
        return CurvatureData(math.inf, 0.0, None)
    R = g2**1.5 / D
    s = g2 / D
    center = Point(float(p[0]) - j.fx * s, float(p[1]) - j.fy * s)
    return CurvatureData(R, abs(D) / g2**1.5, center)


def curvature_homogeneous(P: Poly2, p, on_curve_tol: float = ON_CURVE_TOL) -> float:
    """Signed radius of curvature from the 3x3 Hessian of the homogenized polynomial.

    On the curve the Hessian determinant equals ``-(d-1)^2`` times the affine
    curvature numerator, so the sign convention matches :func:`curvature`.
    """
    j = eval_jet2(P, p)
    g2 = _check_smooth(P, j, p, on_curve_tol)
    d = P.degree
    F3 = homogenize(P, d)
    x, y = float(p[0]), float(p[1])
    hess = np.empty((3, 3))
    hscale = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            h = F3.diff(a).diff(b)
            hess[a, b] = hess[b, a] = h(x, y, 1.0)
            hscale[a, b] = hscale[b, a] = npoly.polyval3d(
                abs(x), abs(y), 1.0, np.abs(h.float_coeffs)
            )
    H = float(np.linalg.det(hess))
    # permanent of the term magnitudes bounds the determinant's cancellation
    bound = sum(
        hscale[0, i] * hscale[1, k] * hscale[2, l]
        for i, k, l in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))
    )
    if H == 0.0 or abs(H) <= 1e-12 * bound:
        raise HessianDegenerate(f"Hessian determinant vanishes at {tuple(p)}")
    return -((d - 1) ** 2) * g2**1.5 / H


# --------------------------------------------------------------------------
# symbolic constructions


def hessian_det_poly(P: Poly2) -> Poly2:
    """det of the 3x3 Hessian of the homogenized polynomial, at ``z = 1``."""
    F3 = homogenize(P, P.degree)
    h = [[F3.diff(a).diff(b) for b in range(3)] for a in range(3)]
    det = (
        h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
        - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
        + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0])
    )
    return det.dehomogenize()


def critical_curvature_poly(P: Poly2) -> Poly2:
    """Polynomial whose zeros on the curve are the critical points of curvature.

    Built from the projective radius formula, so its degree is at most
    ``6d - 10``.
    """
    if P.degree < 3:
        raise DegreeError(
            f"critical curvature needs degree >= 3 (got {P.degree}); "
            "lines and circles have constant curvature"
        )
    Fx, Fy = P.diff("x"), P.diff("y")
    Fxx, Fxy, Fyy = Fx.diff("x"), Fx.diff("y"), Fy.diff("y")
    H = hessian_det_poly(P)
    N = Fx * Fx + Fy * Fy
    lhs = N * (Fy * H.diff("x") - Fx * H.diff("y"))
    rhs = 3 * H * ((Fxx - Fyy) * Fx * Fy + Fxy * (Fy * Fy - Fx * Fx))
    return lhs - rhs


def affine_critical_curvature_poly(P: Poly2) -> Poly2:
    """Tangential derivative of the affine radius formula (valid for any degree).

    Vanishes identically on circles and lines. Higher degree than
    :func:`critical_curvature_poly`, but usable for conics.
    """
    Fx, Fy = P.diff("x"), P.diff("y")
    Fxx, Fxy, Fyy = Fx.diff("x"), Fx.diff("y"), Fy.diff("y")
    N = Fx * Fx + Fy * Fy
    D = Fxx * Fy * Fy - 2 * Fxy * Fx * Fy + Fyy * Fx * Fx
    half = Fraction(3, 2)
    a = N * D.diff("x") - half * D * N.diff("x")
    b = N * D.diff("y") - half * D * N.diff("y")
    return a * Fy - b * Fx


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def bottleneck_residual(P: Poly2, x, y) -> np.ndarray:
    """``(F(x), F(y), (y-x) x grad F(x), (x-y) x grad F(y))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gx = P.gradient(x[0], x[1])
    gy = P.gradient(y[0], y[1])
    return np.array(
        [P(x[0], x[1]), P(y[0], y[1]), _cross(y - x, gx), _cross(x - y, gy)], dtype=float
    )


def medial_residual(P: Poly2, m, q1, q2) -> np.ndarray:
    """Residuals certifying ``m`` is equidistant from two normal feet ``q1, q2``."""
    m, q1, q2 = (np.asarray(v, dtype=float) for v in (m, q1, q2))
    g1 = P.gradient(q1[0], q1[1])
    g2 = P.gradient(q2[0], q2[1])
    d1, d2 = m - q1, m - q2
    return np.array(
        [
            P(q1[0], q1[1]),
            P(q2[0], q2[1]),
            d1 @ d1 - d2 @ d2,
            _cross(d1, g1),
            _cross(d2, g2),
        ],
        dtype=float,
    )


BUTTERFLY = "x^4 - x^2*y^2 + y^4 - 4*x^2 - 2*y^2 - x - 4*y + 1"
