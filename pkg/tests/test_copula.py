"""Tests for the copula families: densities, CDFs, scores, information, tails."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from sgasc import copula as cp
from sgasc import fim
from sgasc.errors import DomainError, NotAvailable

ALL_SPECS = {
    "gaussian": cp.make_spec("gaussian"),
    "studentt": cp.make_spec("studentt", nu=5.0),
    "clayton": cp.make_spec("clayton"),
    "gumbel": cp.make_spec("gumbel"),
    "frank": cp.make_spec("frank"),
    "plackett": cp.make_spec("plackett"),
}

MID_KAPPA = {
    "gaussian": 0.5,
    "studentt": 0.5,
    "clayton": 2.0,
    "gumbel": 2.0,
    "frank": 5.0,
    "plackett": 4.0,
}


def random_kappa(family, rng, n=1):
    lo, hi, scale = {
        "gaussian": (-0.95, 0.95, "lin"),
        "studentt": (-0.95, 0.95, "lin"),
        "clayton": (0.05, 15.0, "log"),
        "gumbel": (1.01, 15.0, "log1p"),
        "frank": (0.05, 28.0, "signedlog"),
        "plackett": (0.01, 90.0, "log"),
    }[family]
    if scale == "lin":
        k = rng.uniform(lo, hi, n)
    elif scale == "log":
        k = np.exp(rng.uniform(np.log(lo), np.log(hi), n))
    elif scale == "log1p":
        k = 1.0 + np.exp(rng.uniform(np.log(lo - 1.0), np.log(hi - 1.0), n))
    else:
        k = np.exp(rng.uniform(np.log(lo), np.log(hi), n)) * rng.choice([-1, 1], n)
    return k


class TestLink:
    def test_midpoint(self):
        link = cp.LinkSpec(-1.0, 1.0)
        assert cp.map_link(0.0, link) == pytest.approx(0.0, abs=1e-15)

    def test_tanh_identity_belgium_value(self):
        # lambda on (-1, 1) equals tanh(x/2); x = 0.9779 maps near 0.4533
        link = cp.LinkSpec(-1.0, 1.0)
        x = 0.9779
        assert cp.map_link(x, link) == pytest.approx(math.tanh(x / 2), abs=1e-14)
        assert cp.map_link(x, link) == pytest.approx(0.4533, abs=5e-4)

    def test_upper_limit(self):
        link = cp.LinkSpec(-1.0, 1.0)
        assert cp.map_link(40.0, link) == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(-12, 12), st.floats(-5, 2), st.floats(0.1, 6))
    @settings(max_examples=200, deadline=None)
    def test_roundtrip(self, x, lo, width):
        link = cp.LinkSpec(lo, lo + width)
        val = cp.map_link(x, link)
        assert lo < val < lo + width
        assert cp.map_link_inverse(val, link) == pytest.approx(x, abs=1e-9)

    def test_roundtrip_tight_midrange(self):
        link = cp.LinkSpec(-1.0, 1.0)
        for x in np.linspace(-8, 8, 33):
            assert cp.map_link_inverse(cp.map_link(x, link), link) == pytest.approx(
                x, abs=1e-12
            )

    def test_log_scale(self):
        link = cp.LinkSpec(0.001, 100.0, scale="log")
        vals = cp.map_link(np.linspace(-20, 20, 41), link)
        assert np.all(np.diff(vals) > 0)
        assert vals[0] > 0.001 and vals[-1] < 100.0
        x = 1.3
        assert cp.map_link_inverse(cp.map_link(x, link), link) == pytest.approx(x, abs=1e-10)

    def test_deriv_positive_and_matches_fd(self):
        for link in (cp.LinkSpec(-1, 1), cp.LinkSpec(0.001, 100, scale="log")):
            x = np.linspace(-6, 6, 25)
            d = cp.map_link_deriv(x, link)
            assert np.all(d > 0)
            h = 1e-6
            fd = (cp.map_link(x + h, link) - cp.map_link(x - h, link)) / (2 * h)
            np.testing.assert_allclose(d, fd, rtol=1e-6)

    def test_inverse_out_of_range(self):
        link = cp.LinkSpec(-1.0, 1.0)
        with pytest.raises(DomainError):
            cp.map_link_inverse(1.0, link)


class TestLogpdf:
    def test_gaussian_independence_is_flat(self):
        spec = ALL_SPECS["gaussian"]
        for u, v in [(0.5, 0.5), (0.2, 0.9), (0.7, 0.1)]:
            assert cp.copula_logpdf(spec, u, v, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_studentt_large_nu_approaches_gaussian(self):
        big = cp._spec_unchecked("studentt", (1e4,))
        g = ALL_SPECS["gaussian"]
        for u, v in [(0.3, 0.6), (0.1, 0.2), (0.8, 0.9)]:
            tv = cp.copula_logpdf(big, u, v, 0.5)
            gv = cp.copula_logpdf(g, u, v, 0.5)
            assert tv == pytest.approx(gv, abs=1e-3)

    @pytest.mark.parametrize("family", cp.FAMILIES)
    def test_density_integrates_to_one(self, family):
        spec = ALL_SPECS[family]
        kappa = MID_KAPPA[family]
        x, w = np.polynomial.legendre.leggauss(200)
        u = 0.5 * (x + 1.0)
        ww = 0.5 * w
        U, V = np.meshgrid(u, u)
        c = np.exp(cp.copula_logpdf(spec, U.ravel(), V.ravel(), kappa)).reshape(U.shape)
        total = float(np.einsum("i,j,ij->", ww, ww, c))
        assert total == pytest.approx(1.0, abs=1e-4)

    def test_corner_rejected(self):
        with pytest.raises(DomainError):
            cp.copula_logpdf(ALL_SPECS["gaussian"], 0.0, 0.5, 0.3)


class TestCdf:
    @pytest.mark.parametrize("family", cp.FAMILIES)
    def test_uniform_margins(self, family):
        spec = ALL_SPECS[family]
        kappa = MID_KAPPA[family]
        for u in np.arange(0.1, 1.0, 0.1):
            assert cp.copula_cdf(spec, u, 1.0, kappa) == pytest.approx(u, abs=1e-9)
            assert cp.copula_cdf(spec, 1.0, u, kappa) == pytest.approx(u, abs=1e-9)
            assert cp.copula_cdf(spec, u, 0.0, kappa) == 0.0
            assert cp.copula_cdf(spec, 0.0, u, kappa) == 0.0

    def test_gaussian_independence_product(self):
        spec = ALL_SPECS["gaussian"]
        rng = np.random.default_rng(1)
        u = rng.uniform(size=50)
        v = rng.uniform(size=50)
        np.testing.assert_allclose(cp.copula_cdf(spec, u, v, 0.0), u * v, atol=1e-12)

    def test_studentt_against_monte_carlo(self):
        spec = ALL_SPECS["studentt"]
        n = 10_000_000
        rng = np.random.default_rng(77)
        u, v = cp.copula_sample(spec, 0.5, n, rng)
        ref = np.mean((u <= 0.3) & (v <= 0.4))
        se = math.sqrt(ref * (1 - ref) / n)
        val = cp.copula_cdf(spec, 0.3, 0.4, 0.5)
        assert abs(val - ref) < 3 * se

    @pytest.mark.parametrize("family", cp.FAMILIES)
    def test_two_increasing_rectangles(self, family):
        spec = ALL_SPECS[family]
        kappa = MID_KAPPA[family]
        rng = np.random.default_rng(9)
        a = rng.uniform(0, 1, (10_000, 2))
        b = rng.uniform(0, 1, (10_000, 2))
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        mass = (
            cp.copula_cdf(spec, hi[:, 0], hi[:, 1], kappa)
            - cp.copula_cdf(spec, lo[:, 0], hi[:, 1], kappa)
            - cp.copula_cdf(spec, hi[:, 0], lo[:, 1], kappa)
            + cp.copula_cdf(spec, lo[:, 0], lo[:, 1], kappa)
        )
        assert mass.min() > -1e-9


class TestScore:
    def test_gaussian_zero_at_median_independence(self):
        spec = ALL_SPECS["gaussian"]
        s = cp.copula_score(spec, 0.5, 0.5, 0.0)
        h = 1e-5
        fd = (
            cp.copula_logpdf(spec, 0.5, 0.5, h) - cp.copula_logpdf(spec, 0.5, 0.5, -h)
        ) / (2 * h)
        assert s == pytest.approx(0.0, abs=1e-12)
        assert fd == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("family", cp.FAMILIES)
    def test_matches_finite_difference(self, family):
        spec = ALL_SPECS[family]
        rng = np.random.default_rng(17)
        n = 1000
        k = random_kappa(family, rng, n)
        u = rng.uniform(0.005, 0.995, n)
        v = rng.uniform(0.005, 0.995, n)
        s = cp.copula_score(spec, u, v, k)
        h = np.full_like(k, 1e-4)
        f = lambda kk: cp.copula_logpdf(spec, u, v, kk)
        fd = (-f(k + 2 * h) + 8 * f(k + h) - 8 * f(k - h) + f(k - 2 * h)) / (12 * h)
        rel = np.abs(s - fd) / (1.0 + np.abs(s))
        assert rel.max() < 1e-5

    @pytest.mark.parametrize("family", cp.FAMILIES)
    def test_zero_mean_under_model(self, family):
        spec = ALL_SPECS[family]
        kappa = MID_KAPPA[family]
        u, v = cp.copula_sample(spec, kappa, 100_000, np.random.default_rng(23))
        s = cp.copula_score(spec, u, v, kappa)
        se = s.std() / math.sqrt(len(s))
        assert abs(s.mean()) < 3 * se + 1e-4


class TestFisherInfo:
    def test_gaussian_independence_closed_form(self):
        spec = ALL_SPECS["gaussian"]
        assert cp.fisher_info(spec, 0.0) == pytest.approx(1.0, abs=1e-14)
        u, v = cp.copula_sample(spec, 0.0, 1_000_000, np.random.default_rng(31))
        s2 = cp.copula_score(spec, u, v, 0.0) ** 2
        se = s2.std() / math.sqrt(len(s2))
        assert abs(s2.mean() - 1.0) < 3 * se

    def test_studentt_closed_form_vs_mc(self):
        spec = ALL_SPECS["studentt"]
        u, v = cp.copula_sample(spec, 0.5, 1_000_000, np.random.default_rng(37))
        s2 = cp.copula_score(spec, u, v, 0.5) ** 2
        se = s2.std() / math.sqrt(len(s2))
        assert abs(s2.mean() - cp.fisher_info(spec, 0.5)) < 3 * se

    @pytest.mark.parametrize("family", ("clayton", "gumbel", "frank", "plackett"))
    def test_grid_vs_direct_mc(self, family):
        kappa = MID_KAPPA[family]
        interp = fim.interpolate(family, kappa)
        direct = fim.mc_fisher(family, kappa, 1_000_000, np.random.default_rng(99))
        assert abs(interp - direct) / direct < 0.02

    @pytest.mark.parametrize("family", ("clayton", "gumbel", "frank", "plackett"))
    def test_grid_neighbor_smoothness(self, family):
        kappas, infos = fim.load_table(family)
        rel = np.abs(np.diff(infos)) / infos[:-1]
        assert rel.max() < 0.05

    @pytest.mark.parametrize("family", cp.FAMILIES)
    def test_variance_of_score_matches_info(self, family):
        spec = ALL_SPECS[family]
        kappa = MID_KAPPA[family]
        u, v = cp.copula_sample(spec, kappa, 100_000, np.random.default_rng(41))
        s = cp.copula_score(spec, u, v, kappa)
        s2 = s * s
        se = s2.std() / math.sqrt(len(s2))
        assert abs(s2.mean() - cp.fisher_info(spec, kappa)) < 3 * se

    def test_positive_everywhere(self):
        rng = np.random.default_rng(5)
        for family in cp.FAMILIES:
            spec = ALL_SPECS[family]
            for k in random_kappa(family, rng, 25):
                assert cp.fisher_info(spec, float(k)) > 0


class TestTailDependence:
    def test_studentt_germany_state2_row(self):
        # rho/nu values whose printed precision is self-consistent
        spec = cp.make_spec("studentt", nu=20.62929)
        lam = cp.tail_dependence(spec, 0.789)[0]
        assert lam == pytest.approx(0.125, abs=0.005)

    def test_studentt_germany_state1_formula_value(self):
        # the formula value at (0.998, 150); see ledger for the 0.692 print
        spec = cp.make_spec("studentt", nu=150.0)
        lam = cp.tail_dependence(spec, 0.998)[0]
        expected = 2 * stats.t.cdf(-math.sqrt(151 * 0.002 / 1.998), 151)
        assert lam == pytest.approx(expected, abs=1e-12)
        assert lam == pytest.approx(0.698, abs=5e-4)

    def test_studentt_belgium_state1(self):
        spec = cp.make_spec("studentt", nu=40.19022)
        lam = cp.tail_dependence(spec, 0.454)[0]
        assert lam == pytest.approx(0.0, abs=1e-3)

    def test_gaussian_zero(self):
        spec = ALL_SPECS["gaussian"]
        for rho in (-0.9, 0.0, 0.5, 0.99):
            assert cp.tail_dependence(spec, rho) == (0.0, 0.0)

    def test_archimedean_forms(self):
        assert cp.tail_dependence(ALL_SPECS["clayton"], 2.0)[0] == pytest.approx(2 ** -0.5)
        assert cp.tail_dependence(ALL_SPECS["clayton"], 2.0)[1] == 0.0
        assert cp.tail_dependence(ALL_SPECS["gumbel"], 2.0)[1] == pytest.approx(2 - 2 ** 0.5)
        assert cp.tail_dependence(ALL_SPECS["frank"], 5.0) == (0.0, 0.0)
        assert cp.tail_dependence(ALL_SPECS["plackett"], 5.0) == (0.0, 0.0)

    def test_studentt_monotonicity(self):
        spec = ALL_SPECS["studentt"]
        rhos = np.linspace(-0.5, 0.95, 20)
        lams = [cp.tail_dependence(spec, r)[0] for r in rhos]
        assert np.all(np.diff(lams) > 0)
        nus = np.linspace(3, 40, 15)
        lams = [cp.tail_dependence(cp.make_spec("studentt", nu=n), 0.5)[0] for n in nus]
        assert np.all(np.diff(lams) < 0)


class TestKendallTau:
    def test_closed_forms(self):
        assert cp.kendall_tau_analytic(ALL_SPECS["gaussian"], 0.5) == pytest.approx(1 / 3)
        assert cp.kendall_tau_analytic(ALL_SPECS["clayton"], 2.0) == pytest.approx(0.5)
        assert cp.kendall_tau_analytic(ALL_SPECS["gumbel"], 1.0) == pytest.approx(0.0)

    def test_not_available(self):
        with pytest.raises(NotAvailable):
            cp.kendall_tau_analytic(ALL_SPECS["frank"], 5.0)
        with pytest.raises(NotAvailable):
            cp.kendall_tau_analytic(ALL_SPECS["plackett"], 5.0)

    @pytest.mark.parametrize("family", ("gaussian", "studentt", "clayton", "gumbel"))
    def test_simulated_tau_matches(self, family):
        spec = ALL_SPECS[family]
        kappa = MID_KAPPA[family]
        u, v = cp.copula_sample(spec, kappa, 100_000, np.random.default_rng(53))
        tau = stats.kendalltau(u, v).statistic
        assert abs(tau - cp.kendall_tau_analytic(spec, kappa)) < 0.01


class TestSamplingAndHfunc:
    @pytest.mark.parametrize("family", cp.FAMILIES)
    def test_hfunc_is_conditional_cdf(self, family):
        # h(v|u) must match the u-derivative of the CDF
        spec = ALL_SPECS[family]
        kappa = MID_KAPPA[family]
        rng = np.random.default_rng(61)
        u = rng.uniform(0.05, 0.95, 30)
        v = rng.uniform(0.05, 0.95, 30)
        h = 1e-4
        fd = (
            cp.copula_cdf(spec, u + h, v, kappa) - cp.copula_cdf(spec, u - h, v, kappa)
        ) / (2 * h)
        hf = cp.copula_hfunc(spec, u, v, kappa)
        np.testing.assert_allclose(hf, fd, atol=1e-4)

    @pytest.mark.parametrize("family", cp.FAMILIES)
    def test_hinv_roundtrip(self, family):
        spec = ALL_SPECS[family]
        kappa = MID_KAPPA[family]
        rng = np.random.default_rng(67)
        u = rng.uniform(0.05, 0.95, 200)
        q = rng.uniform(0.01, 0.99, 200)
        v = cp.copula_hinv(spec, u, q, kappa)
        np.testing.assert_allclose(cp.copula_hfunc(spec, u, v, kappa), q, atol=1e-8)

    @pytest.mark.parametrize("family", cp.FAMILIES)
    def test_sample_margins_uniform(self, family):
        spec = ALL_SPECS[family]
        kappa = MID_KAPPA[family]
        u, v = cp.copula_sample(spec, kappa, 50_000, np.random.default_rng(71))
        assert stats.kstest(u, "uniform").pvalue > 0.001
        assert stats.kstest(v, "uniform").pvalue > 0.001

    def test_sample_cdf_consistency(self):
        # empirical joint CDF of draws matches copula_cdf
        for family in cp.FAMILIES:
            spec = ALL_SPECS[family]
            kappa = MID_KAPPA[family]
            u, v = cp.copula_sample(spec, kappa, 200_000, np.random.default_rng(73))
            for (a, b) in [(0.3, 0.4), (0.7, 0.2)]:
                emp = np.mean((u <= a) & (v <= b))
                th = cp.copula_cdf(spec, a, b, kappa)
                se = math.sqrt(th * (1 - th) / len(u))
                assert abs(emp - th) < 4 * se, family


class TestSpecValidation:
    def test_studentt_nu_domain(self):
        with pytest.raises(DomainError):
            cp.make_spec("studentt", nu=2.0)
        with pytest.raises(DomainError):
            cp.make_spec("studentt", nu=151.0)

    def test_kappa_domains(self):
        with pytest.raises(DomainError):
            cp.copula_logpdf(ALL_SPECS["gaussian"], 0.5, 0.5, 1.0)
        with pytest.raises(DomainError):
            cp.copula_logpdf(ALL_SPECS["clayton"], 0.5, 0.5, -0.5)
        with pytest.raises(DomainError):
            cp.copula_logpdf(ALL_SPECS["gumbel"], 0.5, 0.5, 0.9)
        with pytest.raises(DomainError):
            cp.copula_logpdf(ALL_SPECS["frank"], 0.5, 0.5, 0.0)

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            cp.CopulaSpec("vine", (), None)
