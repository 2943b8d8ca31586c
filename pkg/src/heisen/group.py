"""Group law, dilations, left-invariant fields and the homogeneous Taylor expansion.

Points are (x, y, s) with x, y in R^d.  Generators are numbered 1..2d+1:
X_1..X_d, then Y_1..Y_d, then the central S.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Point:
    x: tuple
    y: tuple
    s: float

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        if len(x) != len(y) or len(x) < 1:
            raise ValueError("x and y must have equal length d >= 1")
        s = float(self.s)
        if not all(math.isfinite(v) for v in x + y + (s,)):
            raise ValueError("non-finite coordinate")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "s", s)

    @property
    def d(self):
        return len(self.x)

    @classmethod
    def zero(cls, d):
        return cls((0.0,) * d, (0.0,) * d, 0.0)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        d = (a.size - 1) // 2
        return cls(a[:d], a[d:2 * d], a[-1])

    def as_array(self):
        return np.array(self.x + self.y + (self.s,))

    def __repr__(self):
        return f"Point(x={self.x}, y={self.y}, s={self.s})"


def _mul(x1, y1, s1, x2, y2, s2):
    # array form of the group law; x, y carry d on the last axis
    s = s1 + s2 + 0.5 * (np.sum(y1 * x2, axis=-1) - np.sum(x1 * y2, axis=-1))
    return x1 + x2, y1 + y2, s


def group_mul(p: Point, q: Point) -> Point:
    if p.d != q.d:
        raise ValueError(f"dimension mismatch: {p.d} vs {q.d}")
    x, y, s = _mul(np.array(p.x), np.array(p.y), p.s, np.array(q.x), np.array(q.y), q.s)
    return Point(x, y, s)


def inverse(p: Point) -> Point:
    return Point(tuple(-v for v in p.x), tuple(-v for v in p.y), -p.s)


def dilate(p: Point, t) -> Point:
    if t == 0:
        raise ValueError("dilation by t = 0")
    return Point(tuple(t * v for v in p.x), tuple(t * v for v in p.y), t * t * p.s)


def homogeneous_norm(p: Point) -> float:
    z2 = sum(v * v for v in p.x + p.y)
    return (z2 * z2 + p.s * p.s) ** 0.25


@dataclass(frozen=True)
class MultiIndex:
    """Ordered word I = (i_1, ..., i_k); D^I = D_{i_1} ... D_{i_k}."""
    ids: tuple
    d: int

    def __post_init__(self):
        ids = tuple(int(i) for i in self.ids)
        for i in ids:
            if not 1 <= i <= 2 * self.d + 1:
                raise ValueError(f"generator id {i} out of range for d={self.d}")
        object.__setattr__(self, "ids", ids)

    @property
    def length(self):
        """Homogeneous length: S counts twice."""
        return sum(2 if i == 2 * self.d + 1 else 1 for i in self.ids)

    def __len__(self):
        return len(self.ids)

    def label(self):
        return "".join(generator_name(i, self.d) for i in self.ids) or "1"


def generator_name(i, d):
    if i <= d:
        return f"X{i}"
    if i <= 2 * d:
        return f"Y{i - d}"
    return "S"


@dataclass(frozen=True)
class SmoothField:
    """A complex function on H^d evaluated on batches of points.

    value(x, y, s): x and y have shape (..., d), s has shape (...).
    partials, if given, maps "x", "y", "s" to callables of the same signature
    (x/y partials return shape (..., d)).
    """
    value: Callable
    d: int
    partials: Optional[dict] = None
    scale: float = 1.0

    def __call__(self, x, y, s):
        return self.value(np.asarray(x, float), np.asarray(y, float), np.asarray(s, float))

    def at(self, p: Point):
        return complex(np.asarray(self(np.array(p.x), np.array(p.y), p.s)))

    def compose_left(self, w: Point) -> "SmoothField":
        """The field v -> f(w ⊞ v)."""
        wx, wy, ws = np.array(w.x), np.array(w.y), w.s

        def g(x, y, s):
            return self.value(*_mul(wx, wy, ws, x, y, s))
        return SmoothField(g, self.d, scale=self.scale)


_FD4 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_FD4_OFF = np.array([-2.0, -1.0, 1.0, 2.0])


def _partial(f: SmoothField, coord, k, x, y, s):
    """d/d(coord)_k of f by 4th-order central differences (or analytic)."""
    if f.partials and coord in f.partials:
        out = f.partials[coord](x, y, s)
        return out[..., k] if coord != "s" else out
    h = EPS ** 0.2 * f.scale
    acc = 0.0
    for c, o in zip(_FD4, _FD4_OFF):
        xx, yy, ss = x.copy(), y.copy(), s.copy()
        if coord == "x":
            xx[..., k] += o * h
        elif coord == "y":
            yy[..., k] += o * h
        else:
            ss = ss + o * h
        acc = acc + c * f.value(xx, yy, ss)
    return acc / h


def field_derivative(i, f: SmoothField) -> SmoothField:
    """The field D_i f, itself evaluable on batches."""
    d = f.d
    if not 1 <= i <= 2 * d + 1:
        raise ValueError(f"generator id {i} out of range for d={d}")

    def g(x, y, s):
        x = np.array(x, dtype=float)
        y = np.array(y, dtype=float)
        s = np.array(s, dtype=float)
        if i == 2 * d + 1:
            return _partial(f, "s", 0, x, y, s)
        ds = _partial(f, "s", 0, x, y, s)
        if i <= d:
            k = i - 1
            return _partial(f, "x", k, x, y, s) + 0.5 * y[..., k] * ds
        k = i - d - 1
        return _partial(f, "y", k, x, y, s) - 0.5 * x[..., k] * ds
    return SmoothField(g, d, scale=f.scale)


def word_field(I, f: SmoothField) -> SmoothField:
    ids = I.ids if isinstance(I, MultiIndex) else tuple(I)
    g = f
    for i in reversed(ids):  # rightmost field acts first
        g = field_derivative(i, g)
    return g


def apply_field(i, f: SmoothField, p: Point):
    val = field_derivative(i, f).at(p)
    if not np.isfinite(val):
        raise FloatingPointError("non-finite field evaluation")
    return val


def apply_word(I, f: SmoothField, p: Point):
    val = word_field(I, f).at(p)
    if not np.isfinite(val):
        raise FloatingPointError("non-finite field evaluation")
    return val


def fd_weights(nodes, order):
    """Finite-difference weights at 0 for the given derivative order (Fornberg)."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, nodes[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, nodes[i]
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def symmetric_stencil(n, extra=5):
    """Symmetric nodes (in units of h) for the n-th derivative: n+2+2*extra points."""
    p = n + 2 + 2 * extra
    return np.arange(p) - (p - 1) / 2.0


def taylor_term(v: Point, n: int, f: SmoothField, w: Point, h0=0.1, extra=5):
    """M_v^n f(w) = d^n/dt^n f(w ⊞ δ_t v) at t = 0.

    The step in t is h0 / |v| so that the sample points do not depend on how
    v is dilated; this makes the homogeneity in v exact up to rounding.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return f.at(w)
    nv = homogeneous_norm(v)
    if nv == 0.0:
        return 0j
    h = h0 * f.scale / nv
    if h < EPS ** 0.5:
        raise FloatingPointError(f"stencil step {h:.3g} too small")
    nodes = symmetric_stencil(n, extra)
    wts = fd_weights(nodes, n)
    t = nodes * h
    vx, vy = np.array(v.x), np.array(v.y)
    px = t[:, None] * vx
    py = t[:, None] * vy
    ps = t * t * v.s
    x, y, s = _mul(np.array(w.x), np.array(w.y), w.s, px, py, ps)
    g = np.asarray(f(x, y, s), dtype=complex)
    return complex(np.dot(wts, g) / h ** n)


def taylor_remainder(v: Point, n: int, f: SmoothField, w: Point, **kw):
    """(Σ_{j≤n} M_v^j f(w)/j!, f(w ⊞ v) − that sum)."""
    approx = sum(taylor_term(v, j, f, w, **kw) / math.factorial(j) for j in range(n + 1))
    exact = f.at(group_mul(w, v))
    return approx, exact - approx
