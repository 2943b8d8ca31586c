"""The biradial transform G on H^d and its frequency-side calculus.

Coefficients live on (n, λ) with n = 0..N_max and λ on a signed log-spaced
grid.  Conventions:

    ℓ_n^λ(z, s) = C(d-1+n, n)^{-1} e^{-iλs - |λ||z|²/4} L_n^{d-1}(|λ||z|²/2)
    G f(n, λ)   = ⟨ℓ_n^λ, f⟩  (first slot conjugated)
    f           = (2π)^{-(d+1)} ∫ |λ|^d Σ_n C(d-1+n, n) G f(n, λ) ℓ_n^λ dλ

The grid weights carry the measure |λ|^d dλ / (2π)^{d+1}.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from math import comb
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from .group import fd_weights
from .special import gauss_laguerre, laguerre_fn_table


@dataclass(frozen=True)
class SpectralGrid:
    d: int = 1
    lam_min: float = 1e-3
    lam_max: float = 1e3
    n_lam: int = 400          # nodes per sign
    n_max: int = 100

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0 < self.lam_min < self.lam_max:
            raise ValueError("need 0 < lam_min < lam_max")
        if self.n_lam < 5:
            raise ValueError("need at least 5 λ-nodes per sign")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        u = np.linspace(math.log(self.lam_min), math.log(self.lam_max), self.n_lam)
        pos = np.exp(u)
        du = u[1] - u[0]
        w = np.full(self.n_lam, du) * pos ** (self.d + 1) / (2 * math.pi) ** (self.d + 1)
        w[0] *= 0.5
        w[-1] *= 0.5
        object.__setattr__(self, "lam", np.concatenate([-pos[::-1], pos]))
        object.__setattr__(self, "weights", np.concatenate([w[::-1], w]))
        object.__setattr__(self, "du", du)

    @property
    def Q(self):
        return 2 * self.d + 2

    @property
    def size(self):
        return 2 * self.n_lam

    def binom(self, rows=None):
        """C(d-1+n, n) for n = 0..rows-1."""
        n = np.arange(self.n_max + 1 if rows is None else rows)
        return np.exp(gammaln(self.d + n) - gammaln(n + 1) - gammaln(self.d))

    def sigma(self, rows=None):
        """Frequencies |λ|(d + 2n), shape (rows, 2*n_lam)."""
        n = np.arange(self.n_max + 1 if rows is None else rows)
        return np.abs(self.lam)[None, :] * (self.d + 2 * n)[:, None]

    def refined(self, factor=2, n_max=None):
        return replace(self, n_lam=(self.n_lam - 1) * factor + 1,
                       n_max=self.n_max if n_max is None else n_max)

    def same_as(self, other):
        return (self.d, self.lam_min, self.lam_max, self.n_lam, self.n_max) == \
            (other.d, other.lam_min, other.lam_max, other.n_lam, other.n_max)


@dataclass(frozen=True)
class BiradialFunction:
    """Coefficients F(n, λ_j) with optional exact λ-derivative channels.

    coeffs has n_max+1+extra rows; the extra rows are a buffer used by the
    λ < 0 branch of the Z-multiplier.  derivs[k-1] holds ∂_λ^k F.  source,
    when present, evaluates (n, λ) -> stack of ∂_λ^k F for k = 0..K at any λ.
    """
    grid: SpectralGrid
    coeffs: np.ndarray
    derivs: tuple = ()
    source: Optional[Callable] = None
    label: str = ""

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[1] != self.grid.size or c.shape[0] < self.grid.n_max + 1:
            raise ValueError(f"coefficient shape {c.shape} does not match the grid")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficients")
        ds = tuple(np.asarray(v, dtype=complex) for v in self.derivs)
        for v in ds:
            if v.shape != c.shape:
                raise ValueError("derivative channel shape mismatch")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "derivs", ds)

    @property
    def rows(self):
        return self.coeffs.shape[0]

    @property
    def extra(self):
        return self.rows - self.grid.n_max - 1

    @property
    def visible(self):
        return self.coeffs[: self.grid.n_max + 1]

    @property
    def order(self):
        return len(self.derivs)

    def dlam(self):
        """∂_λ F: exact channel when present, else finite differences in λ."""
        if self.derivs:
            return self.derivs[0]
        return numeric_dlam(self.grid, self.coeffs)

    def with_coeffs(self, coeffs, derivs=(), source=None, label=None):
        return BiradialFunction(self.grid, coeffs, derivs, source,
                                self.label if label is None else label)

    @classmethod
    def zeros(cls, grid, extra=1):
        return cls(grid, np.zeros((grid.n_max + 1 + extra, grid.size), complex))

    @classmethod
    def from_function(cls, grid, func, K=0, extra=1, label=""):
        """func(n, lam, K) -> array (K+1, len(n), len(lam)) of ∂_λ^k values."""
        n = np.arange(grid.n_max + 1 + extra)
        jets = np.asarray(func(n, grid.lam, K))
        return cls(grid, jets[0], tuple(jets[1:]), func, label)


@dataclass(frozen=True)
class BiradialInput:
    """A biradial function handed to ``analyze``.

    Either fhat(rho, lam) = ∫ e^{iλs} f(ρ, s) ds (partial Fourier transform
    in s) or f(rho, s) with an s-window [-s_window, s_window] sampled by
    n_s trapezoid points.  rate is the Gaussian rate a in f ~ e^{-a ρ²} (a
    number, or a callable of λ); the radial rule is scaled so that this
    envelope is absorbed into the weight.
    decay_radius: beyond it |f| < 1e-14.
    """
    fhat: Optional[Callable] = None
    f: Optional[Callable] = None
    s_window: float = 0.0
    n_s: int = 0
    rate: object = 0.25
    decay_radius: float = 10.0

    def __post_init__(self):
        if (self.fhat is None) == (self.f is None):
            raise ValueError("give exactly one of fhat or f")
        if self.f is not None and (self.s_window <= 0 or self.n_s < 3):
            raise ValueError("position input needs s_window > 0 and n_s >= 3")
        if not callable(self.rate) and self.rate <= 0:
            raise ValueError("rate must be positive")

    def rate_at(self, lam):
        r = self.rate(lam) if callable(self.rate) else self.rate
        return np.broadcast_to(np.asarray(r, dtype=float), np.shape(lam))

    def partial_fourier(self, rho, lam):
        if self.fhat is not None:
            return np.asarray(self.fhat(rho, lam), dtype=complex)
        s = np.linspace(-self.s_window, self.s_window, self.n_s)
        ws = np.full(self.n_s, s[1] - s[0])
        ws[[0, -1]] *= 0.5
        vals = np.asarray(self.f(np.asarray(rho)[..., None], s), dtype=complex)
        return np.sum(vals * (ws * np.exp(1j * lam * s)), axis=-1)


def _radial_constant(d):
    # |S^{2d-1}| 2^{d-1}: ∫_{R^2d} g(|z|) dz = this * |λ|^{-d} ∫ t^{d-1} g dt
    return 2 * math.pi ** d / math.gamma(d) * 2 ** (d - 1)


def analyze(f: BiradialInput, grid: SpectralGrid, extra=1, n_quad=None):
    """Gf on the grid, rows 0..n_max+extra."""
    d = grid.d
    rows = grid.n_max + 1 + extra
    N = n_quad or max(rows + 40, 64)
    rule = gauss_laguerre(N, float(d - 1))
    lam = grid.lam
    a = np.abs(lam)
    kappa = 1.0 / (0.5 + 2 * f.rate_at(lam) / a)                 # t = kappa * u
    t = kappa[:, None] * rule.nodes[None, :]
    rho = np.sqrt(2 * t / a[:, None])
    wmod = np.exp(rule.log_weights + rule.nodes)          # W_i e^{u_i}
    out = np.empty((rows, grid.size), complex)
    for j in range(grid.size):
        fh = f.partial_fourier(rho[j], lam[j])
        if not np.all(np.isfinite(fh)):
            raise ValueError("non-finite input values")
        lf = laguerre_fn_table(rows - 1, d - 1, t[j])     # L_n(t) e^{-t/2}
        out[:, j] = kappa[j] ** d * (lf @ (wmod * fh))
    binom = grid.binom(rows)
    out *= _radial_constant(d) * a[None, :] ** (-d) / binom[:, None]
    return BiradialFunction(grid, out, label="analyze")


def tail_estimate(F: BiradialFunction):
    """Plancherel mass in the top visible row relative to the total."""
    g = F.grid
    mass = (g.binom()[:, None] * np.abs(F.visible) ** 2) @ g.weights
    tot = mass.sum()
    return float(mass[-1] / tot) if tot > 0 else 0.0


def synthesize(F: BiradialFunction, rho, s):
    """G^{-1}F at points with |z| = rho and central coordinate s (broadcast)."""
    g = F.grid
    rho, s = np.broadcast_arrays(np.asarray(rho, float), np.asarray(s, float))
    shape = rho.shape
    rho, s = rho.ravel(), s.ravel()
    a = np.abs(g.lam)
    out = np.zeros(rho.size, complex)
    nv = g.n_max
    for j in range(g.size):
        t = a[j] * rho ** 2 / 2
        lf = laguerre_fn_table(nv, g.d - 1, t)
        out += g.weights[j] * np.exp(-1j * g.lam[j] * s) * (F.visible[:, j] @ lf)
    return out.reshape(shape)


def synthesize_at(F: BiradialFunction, p):
    rho = math.sqrt(sum(v * v for v in p.x + p.y))
    return complex(synthesize(F, rho, p.s))


def synthesize_partial(F: BiradialFunction):
    """G^{-1}F as a BiradialInput given by its partial Fourier transform.

    Only the grid λ-nodes are available, which is all ``analyze`` asks for.
    """
    g = F.grid
    col = {float(l): j for j, l in enumerate(g.lam)}
    coeffs = F.coeffs

    def fhat(rho, lam):
        j = col[float(lam)]
        a = abs(lam)
        lf = laguerre_fn_table(coeffs.shape[0] - 1, g.d - 1, a * np.asarray(rho) ** 2 / 2)
        return (2 * math.pi) ** (-g.d) * a ** g.d * np.tensordot(coeffs[:, j], lf, axes=(0, 0))
    return BiradialInput(fhat=fhat, rate=lambda lam: np.abs(lam) / 4)


def plancherel_norm(F: BiradialFunction):
    g = F.grid
    val = (g.binom()[:, None] * np.abs(F.visible) ** 2) @ g.weights
    return math.sqrt(max(float(val.sum()), 0.0))


def parseval(F: BiradialFunction, G: BiradialFunction):
    if not F.grid.same_as(G.grid):
        raise ValueError("grid mismatch")
    g = F.grid
    val = (g.binom()[:, None] * np.conj(F.visible) * G.visible) @ g.weights
    return complex(val.sum())


# ---------------------------------------------------------------- λ-calculus

def numeric_dlam(grid: SpectralGrid, C):
    """4th-order differences in u = log|λ| per sign; ∂_λ = λ^{-1} ∂_u."""
    n = grid.n_lam
    out = np.empty_like(C)
    for sl, rev in ((slice(0, n), True), (slice(n, 2 * n), False)):
        block = C[:, sl][:, ::-1] if rev else C[:, sl]
        du = np.empty_like(block)
        for j in range(n):
            lo = min(max(j - 2, 0), n - 5)
            nodes = np.arange(lo, lo + 5) - j
            w = fd_weights(nodes, 1)
            du[:, j] = block[:, lo:lo + 5] @ w / grid.du
        out[:, sl] = du[:, ::-1] if rev else du
    return out / grid.lam[None, :]


def z_step(J, lam, n_lo, d, sign, top=None):
    """One application of Z = is - |z|²/4 on λ-jets of consecutive rows.

    J: array (K+1, R, L) with J[k] = ∂_λ^k F for rows n_lo..n_lo+R-1 on
    columns lam (all of one sign).  Returns (K, R', L):
      λ > 0: ZF(n) = ∂_λF(n) - (n/λ)(F(n) - F(n-1)); the first row is
             dropped unless n_lo == 0 (then F(-1) is never needed);
      λ < 0: ZF(n) = ∂_λF(n) - ((d+n)/λ)(F(n+1) - F(n)); the last row is
             dropped unless ``top`` supplies F(n_lo+R) (jets, (K+1, L)).
    """
    J = np.asarray(J)
    K = J.shape[0] - 1
    if K < 1:
        raise ValueError("need at least one λ-derivative")
    R = J.shape[1]
    n = n_lo + np.arange(R)
    if sign > 0:
        prev = np.concatenate([np.zeros_like(J[:, :1]), J[:, :-1]], axis=1)
        diff = J - prev
        coef = n.astype(float)
        keep = slice(0, R) if n_lo == 0 else slice(1, R)
    else:
        if top is not None:
            nxt = np.concatenate([J[:, 1:], np.asarray(top)[:, None, :]], axis=1)
            keep = slice(0, R)
        else:
            nxt = np.concatenate([J[:, 1:], np.zeros_like(J[:, :1])], axis=1)
            keep = slice(0, R - 1)
        diff = nxt - J
        coef = (d + n).astype(float)
    lam = np.asarray(lam, dtype=float)
    out = np.empty((K,) + J.shape[1:], dtype=complex)
    for k in range(K):
        acc = J[k + 1].astype(complex)
        for i in range(k + 1):
            dinv = (-1) ** i * math.factorial(i) * lam ** (-i - 1)   # ∂^i (1/λ)
            acc = acc - comb(k, i) * coef[:, None] * dinv * diff[k - i]
        out[k] = acc
    return out[:, keep]


def mult_by_Z(F: BiradialFunction, tail_tol=1e-10):
    """Exact frequency-side action of multiplication by Z = is - |z|²/4."""
    g = F.grid
    n = g.n_lam
    if F.derivs:
        J = np.stack((F.coeffs,) + F.derivs)
    else:
        J = np.stack((F.coeffs, numeric_dlam(g, F.coeffs)))
    K = J.shape[0] - 1
    neg, pos = slice(0, n), slice(n, 2 * n)
    zp = z_step(J[:, :, pos], g.lam[pos], 0, g.d, +1)
    if F.extra >= 1:
        zn = z_step(J[:, :, neg], g.lam[neg], 0, g.d, -1)
        zp = zp[:, :-1]
    else:
        top = np.abs(F.coeffs[-1, neg]).max()
        ref = max(np.abs(F.coeffs).max(), 1e-300)
        if top > tail_tol * ref:
            raise ValueError("N_max boundary: the λ<0 branch needs F(N_max+1); "
                             f"top row is {top / ref:.2e} of the peak")
        zn = z_step(J[:, :, neg], g.lam[neg], 0, g.d, -1, top=np.zeros_like(J[:, 0, neg]))
    out = np.concatenate([zn, zp], axis=2)
    derivs = tuple(out[1:]) if F.derivs else ()
    return BiradialFunction(g, out[0], derivs, label=f"Z({F.label})")


def moment_norm(F: BiradialFunction, m):
    G = F
    for _ in range(m):
        G = mult_by_Z(G)
    return plancherel_norm(G)


def dilate_spectral(F: BiradialFunction, t, tol=1e-12):
    """Coefficients F(n, t²λ): the G-side of f -> t^{-Q} f∘δ_{1/t}."""
    if t == 0:
        raise ValueError("t must be nonzero")
    g = F.grid
    t2 = t * t
    if F.source is not None:
        K = F.order
        jets = np.asarray(F.source(np.arange(F.rows), t2 * g.lam, K))
        scale = t2 ** np.arange(K + 1)
        jets = jets * scale[:, None, None]
        src = F.source

        def s2(n, lam, K_):
            return np.asarray(src(n, t2 * np.asarray(lam), K_)) * (t2 ** np.arange(K_ + 1))[:, None, None]
        return BiradialFunction(g, jets[0], tuple(jets[1:]), s2, label=f"dil({F.label})")
    shift = 2 * math.log(abs(t)) / g.du
    k = int(round(shift))
    if abs(shift - k) > 1e-9:
        raise ValueError("t is not grid-compatible and F has no analytic source")
    chans = (F.coeffs,) + F.derivs
    n = g.n_lam
    out = []
    for c in chans:
        new = np.zeros_like(c)
        for sl, rev in ((slice(0, n), True), (slice(n, 2 * n), False)):
            block = c[:, sl][:, ::-1] if rev else c[:, sl]
            sh = np.zeros_like(block)
            # the zero-filled end stands for values off the grid; the grid
            # edge it borders must already be negligible
            if k >= 0:
                sh[:, : n - k] = block[:, k:]
                edge = block[:, n - k:]
            else:
                sh[:, -k:] = block[:, : n + k]
                edge = block[:, : -k]
            if edge.size and np.abs(edge).max() > tol * max(np.abs(c).max(), 1e-300):
                raise ValueError("dilation needs values outside the λ-grid")
            new[:, sl] = sh[:, ::-1] if rev else sh
        out.append(new)
    scale = [t2 ** k_ for k_ in range(len(out))]
    return BiradialFunction(g, out[0], tuple(o * s for o, s in zip(out[1:], scale[1:])),
                            label=f"dil({F.label})")


def dump_csv(F: BiradialFunction, fh=None):
    """CSV text with columns n, lambda, re, im, re_dlambda, im_dlambda."""
    g = F.grid
    dl = F.dlam()
    buf = fh or io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "lambda", "re", "im", "re_dlambda", "im_dlambda"])
    for nn in range(g.n_max + 1):
        for j, lam in enumerate(g.lam):
            c, dc = F.coeffs[nn, j], dl[nn, j]
            w.writerow([nn, repr(float(lam)), repr(float(c.real)), repr(float(c.imag)),
                        repr(float(dc.real)), repr(float(dc.imag))])
    if fh is None:
        return buf.getvalue()
