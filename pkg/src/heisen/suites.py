"""Identity suites run by ``heisen verify``.  Each returns a ProbeReport."""
from __future__ import annotations

import math
import warnings
from math import comb

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import eval_genlaguerre, gammaln, roots_genlaguerre

from . import algebra as A
from . import multipliers as M
from . import probes as P
from .biradial import (BiradialFunction, SpectralGrid, analyze, mult_by_Z,
                       plancherel_norm, synthesize_partial, tail_estimate)
from .group import MultiIndex, Point, SmoothField, dilate, taylor_remainder
from .special import (gauss_laguerre, laguerre_table, lemma_trace_closed_form,
                      rep_trace)


# ------------------------------------------------------------- special

def laguerre_orthogonality(dims=(1, 2, 3), nmax=20, tol=1e-10):
    rep = P.ProbeReport("special.laguerre_orthogonality")
    worst = 0.0
    for d in dims:
        alpha = d - 1.0
        rule = gauss_laguerre(nmax + 2, alpha)
        L = laguerre_table(nmax, alpha, rule.nodes)
        G = (L * rule.weights) @ L.T
        n = np.arange(nmax + 1)
        h = np.exp(gammaln(n + alpha + 1) - gammaln(n + 1))
        worst = max(worst, float(np.max(np.abs(G / np.sqrt(np.outer(h, h)) - np.eye(nmax + 1)))))
    rep.add("max_relative_error", worst, tol)
    return rep


def gauss_rules(N=60, tol=1e-11):
    rep = P.ProbeReport("special.gauss_rules")
    for alpha in (0.0, 1.0, 2.0):
        ours = gauss_laguerre(N, alpha)
        x, w = roots_genlaguerre(N, alpha)
        rep.add(f"nodes(alpha={alpha:g})", float(np.max(np.abs(ours.nodes - x) / x)), tol)
        rep.add(f"weights(alpha={alpha:g})", float(np.max(np.abs(ours.weights[:30] - w[:30])
                                                          / w[:30])), 1e3 * tol)
    return rep


def trace_identity(rng, cases=10, nmax=6, tol=1e-6):
    rep = P.ProbeReport("special.trace_identity")
    worst = 0.0
    for _ in range(cases):
        lam = float(rng.choice([-1, 1]) * np.exp(rng.uniform(-1.5, 1.5)))
        v = Point((rng.uniform(-1.5, 1.5),), (rng.uniform(-1.5, 1.5),), rng.uniform(-2, 2))
        for n in range(nmax + 1):
            a = rep_trace(v, lam, n)
            b = lemma_trace_closed_form(v, lam, n)
            worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    rep.add("max_relative_error", worst, tol)
    return rep


# ------------------------------------------------------------- biradial

def round_trip(rng, tol=1e-8):
    g = SpectralGrid(1, 1e-2, 1e2, 40, 30)
    c = rng.standard_normal((g.n_max + 2, g.size)) + 1j * rng.standard_normal((g.n_max + 2, g.size))
    F = BiradialFunction(g, c)
    G = analyze(synthesize_partial(F), g)
    rep = P.ProbeReport("biradial.round_trip")
    rep.add("max_abs_error", float(np.max(np.abs(G.coeffs - F.coeffs))), tol)
    return rep


def odd_gaussian_fhat(rho, lam):
    """Partial Fourier transform of s e^{-s²/2} e^{-ρ²/4}."""
    return 1j * math.sqrt(2 * math.pi) * lam * math.exp(-lam * lam / 2) \
        * np.exp(-np.asarray(rho) ** 2 / 4)


def plancherel_position(tol=1e-4):
    from .biradial import BiradialInput
    g = SpectralGrid(1, 1e-3, 40.0, 160, 160)
    F = analyze(BiradialInput(fhat=odd_gaussian_fhat, rate=0.25), g)
    rep = P.ProbeReport("biradial.plancherel")
    exact = math.pi ** 0.75                    # ‖s e^{-s²/2} e^{-|z|²/4}‖ on H^1
    rep.add("relative_error", abs(plancherel_norm(F) - exact) / exact, tol)
    rep.add("tail_fraction", tail_estimate(F), 1e-6)
    return rep


def heat_z_oracle(n, lam, d=1):
    """G[Z K](n, λ) for the heat kernel e^{Δ}δ by radial quadrature.

    Uses the closed-form partial Fourier transform in s,
    ∫ e^{iλs} K ds = (2π)^{-d} (|λ|/(2 sinh|λ|))^d exp(-|λ| coth|λ| |z|²/4).
    """
    a = abs(lam)
    sg = math.copysign(1.0, lam)
    amp = (a / (2 * math.sinh(a))) ** d
    B = a / math.tanh(a)
    dA = d * (1 / a - 1 / math.tanh(a))
    dB = 1 / math.tanh(a) - a / math.sinh(a) ** 2

    def integrand(r):
        r2 = r * r
        k = amp * math.exp(-B * r2 / 4)
        dk = sg * k * (dA - dB * r2 / 4)
        return r ** (2 * d - 1) * math.exp(-a * r2 / 4) * eval_genlaguerre(n, d - 1, a * r2 / 2) \
            * (dk - r2 / 4 * k)
    with warnings.catch_warnings():
        # roundoff warnings only occur where |value| < 1e-8, which callers skip
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(integrand, 0, math.inf, limit=400, epsabs=0, epsrel=1e-12)
    return 2 * math.pi ** d / math.factorial(d - 1) * val / comb(d - 1 + n, n) / (2 * math.pi) ** d


def z_multiplier(tol=1e-6):
    g = SpectralGrid(1, 0.05, 20.0, 40, 40)
    Z = mult_by_Z(M.kernel_coeffs(M.heat(), g))
    rep = P.ProbeReport("biradial.z_multiplier")
    for sgn, name in ((-1, "lambda<0"), (1, "lambda>0")):
        worst = 0.0
        for j in range(g.size):
            lam = g.lam[j]
            if np.sign(lam) != sgn or not 0.1 <= abs(lam) <= 5:
                continue
            for n in (0, 1, 2, 4):
                o = heat_z_oracle(n, lam)
                if abs(o) < 1e-8:
                    continue
                worst = max(worst, abs(Z.coeffs[n, j] - o) / abs(o))
        rep.add(f"max_relative_error[{name}]", worst, tol)
    return rep


def dilation(tol_point=1e-6, tol_norm=1e-8):
    """Kernel dilation: pointwise, L² and moment scaling at t = 2 (d = 1)."""
    rep = P.ProbeReport("biradial.dilation")
    t = 2.0
    # grid with lam_max/lam_min a power of 4 and t² an integer number of steps
    g = SpectralGrid(1, 2.0 ** -27, 2.0 ** 7, 34 * 8 + 1, 60)
    phi = M.heat()
    K1 = M.kernel_coeffs(phi.scaled(t * t), g, K=0, extra=0)
    K0 = M.kernel_coeffs(phi, g, K=0, extra=0)
    from .biradial import synthesize_at
    worst = 0.0
    for v in (Point((0.3,), (0.2,), 0.1), Point((1.0,), (-0.5,), 0.7), Point((0.0,), (0.8,), -0.4)):
        lhs = synthesize_at(K1, v)
        rhs = t ** -g.Q * synthesize_at(K0, dilate(v, 1 / t))
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    rep.add("pointwise_relative_error", worst, tol_point)
    n1 = M.l2_kernel_norm(phi.scaled(t * t))[0]
    n0 = M.l2_kernel_norm(phi)[0]
    rep.add("norm_scaling_error", abs(n1 / n0 - t ** (-g.Q / 2)), tol_norm)
    for m in (1, 2):
        ts = [1.0, 1.5, 2.0, 3.0]
        vals = [M.kernel_moment_norm(phi.scaled(s * s), m) for s in ts]
        slope, _ = M.fit_slope(np.log(ts), np.log(vals))
        rep.add(f"moment_slope_error[m={m}]", abs(slope - (2 * m - g.Q / 2)), 1e-3)
    return rep


def kernel_tail(grid: SpectralGrid, phi: M.MultiplierSpec, tol=1e-2):
    """Kernel L² mass missed by the grid: detects an N_max too small for φ."""
    rep = P.ProbeReport(f"biradial.kernel_tail[{phi.label}]")
    rep.add("tail_fraction", M.kernel_tail_mass(phi, grid), tol)
    return rep


# ---------------------------------------------------------- multipliers

def _random_symbol(rng):
    k = rng.integers(5)
    if k == 0:
        return M.heat(float(rng.uniform(0.1, 3)))
    if k == 1:
        return M.bessel(float(rng.uniform(-1, 4)))
    if k == 2:
        return M.schrodinger(float(rng.uniform(0.5, 2)), float(rng.uniform(0, 50)), float(rng.uniform(0, 4)))
    if k == 3:
        return M.littlewood_paley(int(rng.integers(1, 4)))
    return M.chi_low(float(rng.uniform(0.5, 5)))


def operator_bound(rng, trials=100):
    g = SpectralGrid(1, 1e-2, 1e2, 30, 20)
    rep = P.ProbeReport("multipliers.operator_bound")
    worst = -math.inf
    for _ in range(trials):
        phi = _random_symbol(rng)
        F = P.random_field(g, rng, damp=False)
        sup = float(np.max(np.abs(phi(g.sigma(F.rows)))))
        worst = max(worst, plancherel_norm(M.apply(phi, F)) - sup * plancherel_norm(F))
    rep.add("max_excess", worst, 1e-12)
    return rep


def homomorphism(rng):
    g = SpectralGrid(1, 1e-2, 1e2, 30, 20)
    F = P.random_field(g, rng, damp=False)
    a, b = M.heat(0.7), M.schrodinger(1.0, 3.0, 2.0)
    lhs = M.apply(b, M.apply(a, F)).coeffs
    rhs = M.apply(a.times(b), F).coeffs
    rep = P.ProbeReport("multipliers.homomorphism")
    rep.add("max_relative_error", float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))), 1e-14)
    return rep


def kernel_norms():
    rep = P.ProbeReport("multipliers.kernel_norms")
    # heat, d = 1: 2 (2π)^{-2} Σ (1+2n)^{-2} ∫σ e^{-2σ} = 1/64
    rep.add("heat_error", abs(M.l2_kernel_norm(M.heat())[0] - 0.125), 1e-10)
    val, flag = M.l2_kernel_norm(M.identity())
    rep.add("identity_divergent", 0.0 if (val == math.inf and not flag) else 1.0, 0.0)
    a = 2.0                                   # Q/4 + 1 at d = 1
    phi = M.bessel(2 * a)
    n1, ok = M.l2_kernel_norm(phi)
    n2, _ = M.l2_kernel_norm(phi, n_nodes=8001)
    rep.add("bessel_refinement_change", abs(n1 - n2) / n2, 1e-4)
    rep.add("bessel_admissible", 0.0 if ok else 1.0, 0.0)
    norms = [M.l2_kernel_norm(M.schrodinger(1.0, t, 4.0))[0] for t in (0.0, 1.0, 10.0, 100.0)]
    rep.add("schrodinger_t_variation", (max(norms) - min(norms)) / min(norms), 1e-10)
    return rep


def moment_growth():
    rep = P.ProbeReport("multipliers.moment_growth")
    ts = [1.0, 3.0, 10.0, 30.0, 100.0]
    h = M.moment_growth_probe(lambda t: M.heat(), 1, ts)
    rep.add("heat_slope", abs(h["slope"]), 0.01)
    f = M.moment_growth_probe(lambda t: M.schrodinger_high(1.0, 8.0, t), 1, ts)
    rep.add_fit(f["slope"], f["r2"], 2.1)
    return rep


# --------------------------------------------------------------- probes

def flow(rng, nus=(0.5, 1.0, 2.0), tol=1e-12):
    g = SpectralGrid(1, 1e-3, 1e3, 100, 60)
    u = P.random_field(g, rng)
    n0 = plancherel_norm(u)
    rep = P.ProbeReport("probes.flow")
    for nu in nus:
        cons = semi = 0.0
        for t1, t2 in ((0.5, 2.0), (3.0, 97.0), (40.0, 60.0)):
            a = P.evolve(P.evolve(u, t1, nu), t2, nu)
            b = P.evolve(u, t1 + t2, nu)
            cons = max(cons, abs(plancherel_norm(a) / n0 - 1))
            semi = max(semi, plancherel_norm(BiradialFunction(g, a.coeffs - b.coeffs)) / n0)
        rep.add(f"conservation[nu={nu:g}]", cons, tol)
        rep.add(f"semigroup[nu={nu:g}]", semi, tol)
    return rep


def sobolev(rng, fields=10):
    g = SpectralGrid(1, 1e-2, 1e2, 40, 30)
    rep = P.ProbeReport("probes.sobolev")
    worst = max(P.sobolev_identity_p2(P.random_field(g, rng, damp=False)).metrics[-1]["value"]
                for _ in range(fields))
    rep.add("max_relative_error", worst, 1e-10)
    return rep


def littlewood_paley(rng):
    g = SpectralGrid(1, 1e-2, 1e2, 40, 30)
    rep = P.ProbeReport("probes.littlewood_paley")
    for N in (1, 2, 3):
        F = P.random_field(g, rng)
        r = P.lp_norm_p2(F, N) / plancherel_norm(F)
        exact = math.sqrt(math.exp(gammaln(2 * N))) * 2.0 ** (-N - 0.5)
        rep.add(f"ratio_error[N={N}]", abs(r - exact) / exact, 1e-6)
    return rep


def lemma25():
    r = P.lemma25_ratio(P.GaussianData(), MultiIndex((1,), 1), scales=(1.0, 2.0))
    r.name = "probes.lemma25"
    return r


def miyachi():
    r = P.miyachi_probe(1.0, "2")
    r.name = "probes.miyachi"
    return r


# --------------------------------------------------------------- algebra

def commutators(dims=(1, 2)):
    rep = P.ProbeReport("algebra.commutators")
    bad = 0
    for d in dims:
        S = A.AlgebraElement.S(d)
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                c = A.commutator(A.AlgebraElement.X(i, d), A.AlgebraElement.Y(j, d))
                bad += c != (-S if i == j else A.AlgebraElement(d))
        bad += not A.delta_commutator_check(d)
    rep.add("mismatches", bad, 0)
    return rep


def swap_identities(nmax=3, dims=(1, 2), max_len=2):
    rep = P.ProbeReport("algebra.swap_identities")
    bad = 0
    for d in dims:
        for n in range(1, nmax + 1):
            bad += not A.delta_power_identities(n, d)
            for length in range(1, max_len + 1):
                for I in A.sorted_words(length, d):
                    bad += not A.verify_swap_identities(n, I, d)["match"]
    rep.add("mismatches", bad, 0)
    return rep


# ----------------------------------------------------------------- group

def _taylor_fields():
    def smooth(x, y, s):
        return np.exp(0.3 * x[..., 0] - 0.2 * y[..., 0]) * np.cos(0.5 * s) + np.sin(x[..., 0] * y[..., 0])

    def poly3(x, y, s):                            # homogeneous degree 3
        return x[..., 0] * s + x[..., 0] ** 2 * y[..., 0] - 2 * y[..., 0] * s

    return SmoothField(smooth, 1), SmoothField(poly3, 1)


def taylor():
    rep = P.ProbeReport("group.taylor")
    f, p = _taylor_fields()
    w = Point((0.4,), (-0.3,), 0.2)
    v = Point((0.7,), (0.5,), -0.6)
    for n in (1, 2, 3):
        eps = np.geomspace(0.01, 0.04, 5)
        rem = [abs(taylor_remainder(dilate(v, e), n, f, w)[1]) for e in eps]
        slope, _ = M.fit_slope(np.log(eps), np.log(rem))
        rep.add(f"slope_rel_error[n={n}]", abs(slope - (n + 1)) / (n + 1), 0.05)
    rep.add("poly_remainder[n=3]", abs(taylor_remainder(v, 3, p, w)[1]), 1e-10)
    return rep


# -------------------------------------------------------------- registry

def default_suites(seed=42):
    """(name, thunk) pairs in report order; every randomized suite owns its stream."""
    def rng(i):
        return np.random.default_rng([seed, i])
    return [
        ("special.laguerre_orthogonality", laguerre_orthogonality),
        ("special.gauss_rules", gauss_rules),
        ("special.trace_identity", lambda: trace_identity(rng(0))),
        ("biradial.round_trip", lambda: round_trip(rng(1))),
        ("biradial.plancherel", plancherel_position),
        ("biradial.z_multiplier", z_multiplier),
        ("biradial.dilation", dilation),
        ("multipliers.operator_bound", lambda: operator_bound(rng(2))),
        ("multipliers.homomorphism", lambda: homomorphism(rng(3))),
        ("multipliers.kernel_norms", kernel_norms),
        ("multipliers.moment_growth", moment_growth),
        ("probes.flow", lambda: flow(rng(4))),
        ("probes.sobolev", lambda: sobolev(rng(5))),
        ("probes.littlewood_paley", lambda: littlewood_paley(rng(6))),
        ("probes.lemma25", lemma25),
        ("probes.miyachi", miyachi),
        ("algebra.commutators", commutators),
        ("algebra.swap_identities", swap_identities),
        ("group.taylor", taylor),
    ]
