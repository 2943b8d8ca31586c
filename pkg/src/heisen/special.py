"""Laguerre and Hermite functions, Gauss rules, Schrödinger-representation matrix elements."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal
from scipy.special import gammaln


# ------------------------------------------------------------------ Laguerre

def laguerre_table(nmax, alpha, t):
    """L_k^alpha(t) for k = 0..nmax by the ascending three-term recurrence.

    Returns an array of shape (nmax+1,) + t.shape.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((nmax + 1,) + t.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 1.0 + alpha - t
    for k in range(1, nmax):
        out[k + 1] = ((2 * k + 1 + alpha - t) * out[k] - (k + alpha) * out[k - 1]) / (k + 1)
    return out


def laguerre(n, alpha, t):
    if n < 0:
        raise ValueError("n must be >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    with np.errstate(over="ignore", invalid="ignore"):
        val = laguerre_table(n, alpha, t)[n]
    if not np.all(np.isfinite(val)):
        raise OverflowError(f"L_{n}^{alpha} overflows on the given t")
    return val if val.ndim else float(val)


def laguerre_fn_table(nmax, alpha, t):
    """L_k^alpha(t) e^{-t/2}, which stays bounded; same recurrence, damped start."""
    t = np.asarray(t, dtype=float)
    out = np.empty((nmax + 1,) + t.shape)
    out[0] = np.exp(-0.5 * t)
    if nmax >= 1:
        out[1] = (1.0 + alpha - t) * out[0]
    for k in range(1, nmax):
        out[k + 1] = ((2 * k + 1 + alpha - t) * out[k] - (k + alpha) * out[k - 1]) / (k + 1)
    return out


def laguerre_derivative(n, alpha, t):
    """d/dt L_n^alpha = -L_{n-1}^{alpha+1}."""
    if n == 0:
        return np.zeros_like(np.asarray(t, dtype=float))
    return -laguerre_table(n - 1, alpha + 1, t)[n - 1]


class LaguerreEvaluator:
    """L_n^alpha with fixed alpha (alpha = d - 1 for H^d)."""

    def __init__(self, alpha):
        self.alpha = float(alpha)

    def __call__(self, n, t):
        return laguerre(n, self.alpha, t)

    def table(self, nmax, t):
        return laguerre_table(nmax, self.alpha, t)

    def norm2(self, n):
        """∫ (L_n^alpha)^2 t^alpha e^{-t} dt = Γ(n+alpha+1)/n!."""
        return math.exp(gammaln(n + self.alpha + 1) - gammaln(n + 1))


# ------------------------------------------------------------- Gauss rules

@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray
    label: str = ""

    def integrate(self, values):
        return np.tensordot(self.weights, values, axes=(0, 0))


def _ortho_recurrence(x, a, b, p0, N):
    """Orthonormal p_N, p_N' and the Christoffel sum Σ_{k<N} p_k^2 at x.

    Values are rescaled per node to avoid overflow; the common factor is
    returned as logc (true value = scaled * exp(logc)).
    """
    x = np.asarray(x, dtype=float)
    pm, p = np.zeros_like(x), np.full_like(x, p0)
    dpm, dp = np.zeros_like(x), np.zeros_like(x)
    S = np.zeros_like(x)
    logc = np.zeros_like(x)
    for k in range(N):
        S = S + p * p
        pn = ((x - a[k]) * p - b[k] * pm) / b[k + 1]
        dpn = (p + (x - a[k]) * dp - b[k] * dpm) / b[k + 1]
        pm, p, dpm, dp = p, pn, dp, dpn
        big = np.abs(p) > 1e100
        if np.any(big):
            for arr in (pm, p, dpm, dp):
                arr[big] *= 1e-100
            S[big] *= 1e-200
            logc[big] += 100 * math.log(10)
    return p, dp, S, logc


def gauss_rule(a, b, mu0, N, label=""):
    """Golub–Welsch: nodes are eigenvalues of the Jacobi matrix.

    a[k], k < N: diagonal; b[k], 1 <= k <= N: off-diagonal (b[0] unused).
    Nodes are polished by Newton steps; weights come from the Christoffel
    sum 1/Σ p_k(x)^2, which keeps full relative accuracy in the tails.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = eigvalsh_tridiagonal(a[:N], b[1:N])
    p0 = 1.0 / math.sqrt(mu0)
    for _ in range(2):
        p, dp, _, _ = _ortho_recurrence(x, a, b, p0, N)
        x = x - p / dp
    _, _, S, logc = _ortho_recurrence(x, a, b, p0, N)
    logw = -np.log(S) - 2 * logc
    return QuadratureRule(x, np.exp(logw), logw, label)


@lru_cache(maxsize=64)
def gauss_laguerre(N, alpha=0.0):
    """Nodes/weights for ∫_0^∞ g(t) t^alpha e^{-t} dt."""
    k = np.arange(N + 1, dtype=float)
    a = 2 * k + alpha + 1
    b = np.sqrt(k * (k + alpha))
    mu0 = math.exp(gammaln(alpha + 1))
    return gauss_rule(a, b, mu0, N, f"gauss-laguerre(N={N}, alpha={alpha})")


@lru_cache(maxsize=64)
def gauss_hermite(N):
    """Nodes/weights for ∫ g(u) e^{-u^2} du."""
    k = np.arange(N + 1, dtype=float)
    return gauss_rule(np.zeros(N + 1), np.sqrt(k / 2), math.sqrt(math.pi), N,
                      f"gauss-hermite(N={N})")


def log_trapezoid(lo, hi, n):
    """Trapezoid rule in u = log t on [lo, hi]; returns QuadratureRule in t."""
    if not 0 < lo < hi or n < 2:
        raise ValueError("need 0 < lo < hi and n >= 2")
    u = np.linspace(math.log(lo), math.log(hi), n)
    t = np.exp(u)
    w = np.full(n, u[1] - u[0]) * t
    w[0] *= 0.5
    w[-1] *= 0.5
    return QuadratureRule(t, w, np.log(w), f"log-trapezoid[{lo},{hi}]x{n}")


# ------------------------------------------------------------------ Hermite

def hermite_poly_table(mmax, u):
    """Polynomial parts h_k with η_k(u) = h_k(u) e^{-u^2/2} orthonormal."""
    u = np.asarray(u, dtype=float)
    out = np.empty((mmax + 1,) + u.shape)
    out[0] = math.pi ** -0.25
    if mmax >= 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for k in range(1, mmax):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * u * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_1d_table(mmax, q):
    q = np.asarray(q, dtype=float)
    return hermite_poly_table(mmax, q) * np.exp(-0.5 * q * q)


def _as_multi(m):
    return tuple(int(v) for v in np.atleast_1d(m))


def hermite_fn(m, q):
    """Orthonormal Hermite function η_m on R^d; q has shape (..., d)."""
    m = _as_multi(m)
    q = np.asarray(q, dtype=float)
    if q.ndim == 0 or q.shape[-1] != len(m):
        q = q[..., None] if len(m) == 1 else q
    out = 1.0
    for k, mk in enumerate(m):
        out = out * hermite_1d_table(mk, q[..., k])[mk]
    return out


def scaled_hermite(m, lam, q):
    """η_m^λ(q) = |λ|^{d/4} η_m(|λ|^{1/2} q)."""
    if lam == 0:
        raise ValueError("λ must be nonzero")
    m = _as_multi(m)
    a = abs(lam)
    return a ** (len(m) / 4) * hermite_fn(m, math.sqrt(a) * np.asarray(q, dtype=float))


class HermiteBasis:
    """Cached 1-D Hermite functions on a fixed sample of points."""

    def __init__(self, d, mmax, q):
        self.d = d
        self.mmax = mmax
        self.q = np.asarray(q, dtype=float)
        self._table = hermite_1d_table(mmax, self.q)

    def __call__(self, k):
        return self._table[k]


def multi_indices(n, d):
    """All m in N^d with |m| = n."""
    return [m for m in itertools.product(range(n + 1), repeat=d) if sum(m) == n]


def _rep_1d(mk, mpk, c, xk, yk, sgn, rule):
    u = rule.nodes
    shift = 0.5 * c * yk
    mx = max(mk, mpk)
    hm = hermite_poly_table(mx, u - shift)[mk]
    hp = hermite_poly_table(mx, u + shift)[mpk]
    return np.sum(rule.weights * hm * hp * np.exp(1j * sgn * c * xk * u))


def rep_matrix_element(v, lam, m, mp, nodes=96, tol=1e-10):
    """⟨η_m^λ, U_v^λ η_{m'}^λ⟩ with U_v^λ α(q) = e^{iλ(s + x·q + x·y/2)} α(q + y).

    After centering the product of Gaussian envelopes the integral factorises
    over coordinates; each factor is a Gauss–Hermite sum.  Two rule sizes are
    compared and a mismatch above tol is reported as an error.
    """
    if lam == 0:
        raise ValueError("λ must be nonzero")
    m, mp = _as_multi(m), _as_multi(mp)
    d = v.d
    if len(m) != d or len(mp) != d:
        raise ValueError("multi-index length must equal d")
    c = math.sqrt(abs(lam))
    sgn = 1.0 if lam > 0 else -1.0
    vals = []
    for N in (nodes, nodes + 24):
        rule = gauss_hermite(N)
        prod = 1.0 + 0j
        for k in range(d):
            prod *= _rep_1d(m[k], mp[k], c, v.x[k], v.y[k], sgn, rule)
        vals.append(prod)
    if abs(vals[0] - vals[1]) > tol * max(1.0, abs(vals[1])):
        raise RuntimeError("matrix-element quadrature did not converge")
    y2 = sum(t * t for t in v.y)
    return complex(np.exp(-0.25 * abs(lam) * y2 + 1j * lam * v.s) * vals[1])


def rep_trace(v, lam, n, **kw):
    """Σ_{|m|=n} ⟨U_v^λ η_m^λ, η_m^λ⟩ (first slot conjugated)."""
    return sum(np.conj(rep_matrix_element(v, lam, m, m, **kw)) for m in multi_indices(n, v.d))


def lemma_trace_closed_form(v, lam, n):
    """e^{-iλs} L_n^{d-1}(|λ||z|^2/2) e^{-|λ||z|^2/4}."""
    z2 = sum(t * t for t in v.x + v.y)
    a = abs(lam) * z2
    return complex(np.exp(-1j * lam * v.s) * laguerre(n, v.d - 1, a / 2) * math.exp(-a / 4))
