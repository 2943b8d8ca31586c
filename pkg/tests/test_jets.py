import math

import numpy as np
import pytest
import sympy as sp

from heisen import jets as J
from heisen.jets import Jet

x = sp.Symbol("x")
X0 = np.array([0.3, 0.75, 1.4, 2.9])
K = 5


def sympy_derivs(expr, points, K):
    out = np.empty((K + 1, len(points)))
    for k in range(K + 1):
        f = sp.lambdify(x, sp.diff(expr, x, k), "numpy")
        out[k] = f(points)
    return out


@pytest.mark.parametrize("build,expr", [
    (lambda u: u * u * u - 2 * u + 1, x ** 3 - 2 * x + 1),
    (lambda u: 1 / (1 + u), 1 / (1 + x)),
    (lambda u: J.power(1 + u, -2.5), (1 + x) ** sp.Rational(-5, 2)),
    (lambda u: J.exp(-0.7 * u) * u ** 2, sp.exp(-0.7 * x) * x ** 2),
    (lambda u: (u / (1 + u)) ** 3, (x / (1 + x)) ** 3),
    (lambda u: J.exp(u ** 2) / (2 + u), sp.exp(x ** 2) / (2 + x)),
])
def test_jet_derivatives_match_sympy(build, expr):
    u = Jet.variable(X0, K)
    got = build(u).derivatives()
    ref = sympy_derivs(expr, X0, K)
    assert np.allclose(got, ref, rtol=1e-11, atol=1e-11)


def test_constant_and_value():
    u = Jet.variable(X0, 3)
    c = Jet.constant(2.0, u)
    assert np.all(c.derivatives()[1:] == 0)
    assert np.allclose((u - 1).value(), X0 - 1)
    assert np.allclose((1 - u).c[1], -1)
    assert u.order == 3


def test_complex_phase():
    # e^{i t x^2}: derivative i 2 t x e^{i t x^2}
    u = Jet.variable(X0, 2)
    ph = J.exp(1j * 0.8 * u * u)
    d1 = ph.derivatives()[1]
    assert np.allclose(d1, 1.6j * X0 * np.exp(0.8j * X0 ** 2))


def test_flat_top():
    u = Jet.variable(np.array([-1.0, 0.0, 1e-4, 0.5, 2.0]), 3)
    g = J.flat_top(u)
    assert np.all(g.c[:, :3] == 0)
    assert g.value()[3] == pytest.approx(math.exp(-2.0))
    assert g.derivatives()[1][4] == pytest.approx(math.exp(-0.5) / 4)


def test_smooth_partition():
    s = np.linspace(0, 3, 301)
    u = Jet.variable(s, 4)
    lo, hi = J.smooth_low(u), J.smooth_high(u)
    assert np.max(np.abs(lo.value() + hi.value() - 1)) <= 1e-15
    assert np.allclose((lo.c + hi.c)[1:], 0, atol=1e-9)
    assert np.all(lo.value()[s <= 0.5] == 1) and np.all(lo.value()[s >= 1] == 0)
    assert np.all(np.diff(lo.value()) <= 1e-15)


def test_smooth_low_derivative_vs_differences():
    s = np.linspace(0.52, 0.98, 24)
    h = 1e-5
    lo = lambda v: J.smooth_low(Jet.variable(v, 1)).value()
    fd = (lo(s + h) - lo(s - h)) / (2 * h)
    assert np.allclose(J.smooth_low(Jet.variable(s, 1)).derivatives()[1], fd, atol=1e-7)
