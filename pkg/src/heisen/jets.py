"""Truncated Taylor arithmetic for exact derivatives of multiplier symbols.

A Jet holds c[k] = f^(k)(x0)/k! for k = 0..K over an array of base points.
"""
from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, c):
        self.c = np.asarray(c)

    @property
    def order(self):
        return self.c.shape[0] - 1

    @classmethod
    def variable(cls, x, K):
        x = np.asarray(x, dtype=float)
        c = np.zeros((K + 1,) + x.shape)
        c[0] = x
        if K >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, v, like):
        c = np.zeros(like.c.shape, dtype=np.result_type(like.c, v))
        c[0] = v
        return cls(c)

    def derivatives(self):
        f = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * f.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def value(self):
        return self.c[0]

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self)

    def __add__(self, other):
        other = self._lift(other)
        return Jet(self.c + other.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        K = self.order
        out = np.zeros(np.broadcast_shapes(self.c.shape, other.c.shape),
                       dtype=np.result_type(self.c, other.c))
        for k in range(K + 1):
            for j in range(k + 1):
                out[k] = out[k] + self.c[j] * other.c[k - j]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        a, b = self.c, other.c
        K = self.order
        q = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
        for k in range(K + 1):
            acc = a[k]
            for j in range(1, k + 1):
                acc = acc - b[j] * q[k - j]
            q[k] = acc / b[0]
        return Jet(q)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = Jet.constant(1.0, self)
            for _ in range(p):
                out = out * self
            return out
        return power(self, p)


def power(u: Jet, p):
    """u^p for real p, u0 > 0."""
    c = u.c
    K = u.order
    w = np.zeros(c.shape, dtype=np.result_type(c, float))
    w[0] = c[0] ** p
    for k in range(1, K + 1):
        acc = 0.0
        for j in range(1, k + 1):
            acc = acc + ((p + 1) * j - k) * c[j] * w[k - j]
        w[k] = acc / (k * c[0])
    return Jet(w)


def exp(u: Jet):
    c = u.c
    K = u.order
    w = np.zeros(c.shape, dtype=np.result_type(c, float))
    w[0] = np.exp(c[0])
    for k in range(1, K + 1):
        acc = 0.0
        for j in range(1, k + 1):
            acc = acc + j * c[j] * w[k - j]
        w[k] = acc / k
    return Jet(w)


def flat_top(u: Jet, cut=1e-3):
    """g(x) = exp(-1/x) for x > 0, 0 otherwise (all derivatives vanish at 0)."""
    x0 = np.asarray(u.c[0])
    live = x0 > cut
    safe = Jet(np.where(live, u.c, np.where(np.arange(u.order + 1).reshape(
        (-1,) + (1,) * x0.ndim) == 0, 1.0, 0.0)))
    g = exp(-(1.0 / safe))
    return Jet(np.where(live, g.c, 0.0))


def smooth_low(u: Jet):
    """χ^L: 1 on [0, 1/2], 0 on [1, ∞), smooth in between."""
    a = flat_top(1.0 - u)
    b = flat_top(u - 0.5)
    return _ratio(a, a + b)


def smooth_high(u: Jet):
    """χ^H = 1 - χ^L, written so that the two add to one to rounding."""
    a = flat_top(1.0 - u)
    b = flat_top(u - 0.5)
    return _ratio(b, a + b)


def _ratio(num, den):
    # den > 0 everywhere: at least one of the two flat-top factors is alive
    return num / den
