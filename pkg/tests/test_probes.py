import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from heisen import probes as P
from heisen.biradial import BiradialFunction, SpectralGrid, analyze, plancherel_norm
from heisen.group import MultiIndex

G = SpectralGrid(1, 1e-3, 1e3, 100, 60)


@pytest.fixture
def u0():
    return P.random_field(G, np.random.default_rng(9))


def diff_norm(a, b):
    return plancherel_norm(BiradialFunction(a.grid, a.coeffs - b.coeffs))


def test_report_schema():
    rep = P.ProbeReport("x")
    assert rep.add("a", 0.5, 1.0) and not rep.add("b", 2.0, 1.0)
    rep.add_fit(1.0, 0.99, 2.1)
    d = json.loads(rep.to_json())
    assert set(d) == {"name", "metrics", "exponent_fits", "pass"}
    assert d["metrics"][0] == {"key": "a", "value": 0.5, "tolerance": 1.0, "pass": True}
    assert d["pass"] is False
    ok = P.ProbeReport("y")
    ok.add("info", 3.0)
    assert ok.passed


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0])
def test_flow_conservation_and_semigroup(u0, nu):
    n0 = plancherel_norm(u0)
    assert P.evolve(u0, 0.0, nu) is u0
    for t in (0.1, 1.0, 10.0, 100.0):
        assert abs(plancherel_norm(P.evolve(u0, t, nu)) / n0 - 1) <= 1e-12
    a = P.evolve(P.evolve(u0, 30.0, nu), 70.0, nu)
    assert diff_norm(a, P.evolve(u0, 100.0, nu)) <= 1e-12 * n0
    back = P.evolve(P.evolve(u0, 50.0, nu), -50.0, nu)
    assert diff_norm(back, u0) <= 1e-12 * n0


def test_flow_errors_and_state(u0):
    with pytest.raises(ValueError):
        P.evolve(u0, 1.0, 0.0)
    st = P.EvolutionState(u0, 0.0, 1.0).advance(2.0).advance(3.0)
    assert st.t == 5.0
    assert diff_norm(st.u, P.evolve(u0, 5.0)) <= 1e-12 * plancherel_norm(u0)
    with pytest.raises(ValueError):
        P.EvolutionState(u0, -1.0, 1.0)


def test_bessel_potentials(u0):
    assert P.bessel(u0, 0) is u0
    assert np.allclose(P.bessel(P.bessel(u0, 1.7), -1.7).coeffs, u0.coeffs, rtol=1e-12, atol=0)
    two = P.bessel(u0, 2.0)
    assert np.allclose(two.coeffs, u0.coeffs * (1 + G.sigma(u0.rows)), rtol=1e-14)
    a = P.bessel(P.evolve(u0, 3.0, 1.5), 1.0).coeffs
    b = P.evolve(P.bessel(u0, 1.0), 3.0, 1.5).coeffs
    assert np.allclose(a, b, rtol=1e-14, atol=1e-300)


def test_sobolev_identity():
    rng = np.random.default_rng(1)
    g = SpectralGrid(1, 1e-2, 1e2, 40, 30)
    for _ in range(50):
        rep = P.sobolev_identity_p2(P.random_field(g, rng, damp=False))
        assert rep.passed
    zero = P.sobolev_identity_p2(BiradialFunction.zeros(g))
    assert zero.passed and zero.metrics[0]["value"] == 0


def test_sobolev_single_mode():
    g = SpectralGrid(1, 0.5, 8.0, 5, 3)          # λ = 2 is a node
    j = int(np.argmin(np.abs(g.lam - 2)))
    c = np.zeros((g.n_max + 2, g.size), complex)
    c[1, j] = 0.6 - 0.8j
    rep = P.sobolev_identity_p2(BiradialFunction(g, c))
    expect = g.weights[j] * (1 + 2 * 3) * 1.0 * 1          # binom C(1, 1) = 1 at d = 1
    vals = {m["key"]: m["value"] for m in rep.metrics}
    assert vals["lhs"] == pytest.approx(expect, rel=1e-14)
    assert vals["rhs"] == pytest.approx(expect, rel=1e-14)


def test_lp_constant_by_quadrature():
    for N in (1, 2, 3):
        val, _ = quad(lambda r: (r ** (-2 * N) * math.exp(-1 / r ** 2)) ** 2 / r, 0, math.inf)
        assert val == pytest.approx(P.lp_constant(N), rel=1e-10)
    assert math.sqrt(P.lp_constant(1)) == pytest.approx(1 / (2 * math.sqrt(2)))


@pytest.mark.parametrize("N", [1, 2, 3])
def test_lp_ratio(N):
    g = SpectralGrid(1, 1e-2, 1e2, 40, 30)
    exact = math.sqrt(math.gamma(2 * N)) * 2.0 ** (-N - 0.5)
    rng = np.random.default_rng(N)
    for _ in range(3):
        F = P.random_field(g, rng)
        r = P.lp_norm_p2(F, N) / plancherel_norm(F)
        assert abs(r - exact) <= 1e-6 * exact
        assert P.lp_norm_p2(F, N, method="closed") / plancherel_norm(F) == pytest.approx(exact, rel=1e-14)
        r2 = P.lp_norm_p2(P.evolve(F, 7.0), N) / plancherel_norm(F)
        assert abs(r2 - r) <= 1e-12


def test_lp_errors_and_zero():
    g = SpectralGrid(1, 1e-2, 1e2, 10, 5)
    assert P.lp_norm_p2(BiradialFunction.zeros(g), 1) == 0
    with pytest.raises(ValueError):
        P.lp_norm_p2(BiradialFunction.zeros(g), 0)
    with pytest.raises(ValueError):
        P.lp_norm_p2(BiradialFunction.zeros(g), 1, method="other")


def test_gaussian_data_fhat():
    # partial Fourier transform against direct s-quadrature
    for k, t in ((1, 1.0), (2, 1.5), (0, 0.7)):
        f = P.GaussianData(k=k, t=t)
        fld = f.field()
        for lam in (-1.3, 0.4, 2.0):
            rho = 0.8
            x = np.array([rho])
            y = np.array([0.0])

            def part(s, which):
                v = fld.value(x, y, np.asarray(s)) * np.exp(1j * lam * s)
                return float(np.real(v) if which == 0 else np.imag(v))
            ref = complex(quad(part, -30, 30, args=(0,), epsabs=1e-13, limit=200)[0],
                          quad(part, -30, 30, args=(1,), epsabs=1e-13, limit=200)[0])
            assert abs(f.fhat(rho, lam) - ref) <= 1e-10


def test_gaussian_plancherel():
    f = P.GaussianData()
    F = analyze(f.input(), SpectralGrid(1, 1e-3, 60.0, 160, 160))
    assert plancherel_norm(F) == pytest.approx(math.pi ** 0.75, rel=1e-4)


@pytest.mark.parametrize("word", [(1,), (2,), (3,), (1, 1), (2, 2), (1, 2)])
def test_lemma25_single_species(word):
    rep = P.lemma25_ratio(P.GaussianData(), MultiIndex(word, 1))
    assert rep.passed, rep.to_dict()
    assert max(rep.data["R"]) <= 1 + 5e-3


def test_lemma25_horizontal_exact_value():
    # for this data ‖X f‖² = ⟨f, -Δf⟩/2 by the x↔y symmetry
    rep = P.lemma25_ratio(P.GaussianData(), MultiIndex((1,), 1), scales=(1.0,))
    assert rep.data["R"][0] == pytest.approx(1 / math.sqrt(2), rel=1e-6)


def test_lemma25_rejects_d2():
    with pytest.raises(ValueError):
        P.lemma25_ratio(P.GaussianData(), MultiIndex((1,), 2))


def test_miyachi_p2():
    rep = P.miyachi_probe(1.0, "2")
    assert rep.passed
    assert rep.metrics[0]["value"] <= 1e-12


def test_miyachi_substitutes_nu2():
    rep = P.miyachi_probe(2.0, "1", t_list=(1.0, 10.0, 100.0))
    assert rep.passed, rep.to_dict()
    assert rep.exponent_fits[0]["slope"] <= 2.1
    assert len(rep.data["dispersion_sup"]) == 3
    assert all(m["tolerance"] is not None for m in rep.metrics)


def test_random_field_damping():
    g = SpectralGrid(1, 1e-2, 1e2, 20, 10)
    F = P.random_field(g, np.random.default_rng(0))
    assert np.all(np.abs(F.coeffs) <= 10 * np.exp(-g.sigma(F.rows)))
    a = P.random_field(g, np.random.default_rng(4)).coeffs
    b = P.random_field(g, np.random.default_rng(4)).coeffs
    assert np.array_equal(a, b)
