import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from mixcens.distributions import (
    InverseWeibullParams,
    LindleyParams,
    WeibullParams,
    invweibull_cdf,
    invweibull_pdf,
    invweibull_quantile,
    lindley_cdf,
    lindley_pdf,
    log_binom,
    order_stat_cdf,
    order_stat_pdf,
    sample_weibull,
    weibull_cdf,
    weibull_hazard,
    weibull_logpdf,
    weibull_pdf,
    weibull_quantile,
    weibull_sf,
)

QUAD_TOL = 1e-8
ROUNDTRIP_TOL = 1e-12
RATIO_TOL = 1e-10
FD_TOL = 1e-6

shapes = st.floats(0.3, 5.0)
rates = st.floats(0.1, 5.0)


def _integral(f, upper=np.inf):
    val, _ = integrate.quad(f, 0, upper, epsabs=1e-12, epsrel=1e-12, limit=500)
    return val


class TestParams:
    @pytest.mark.parametrize("gamma,delta", [(0, 1), (1, 0), (-1, 1), (1, np.inf), (np.nan, 1)])
    def test_weibull_rejects_invalid(self, gamma, delta):
        with pytest.raises(ValueError):
            WeibullParams(gamma, delta)

    @pytest.mark.parametrize("theta", [0, -0.5])
    def test_lindley_rejects_invalid(self, theta):
        with pytest.raises(ValueError):
            LindleyParams(theta)

    def test_inverse_weibull_rejects_invalid(self):
        with pytest.raises(ValueError):
            InverseWeibullParams(1.0, -2.0)

    def test_scale_and_rescale(self):
        p = WeibullParams(2.0, 0.25)
        assert p.scale == pytest.approx(2.0)
        # alpha * X is Weibull with scale alpha * 2
        assert p.rescaled(3.0).scale == pytest.approx(6.0)


class TestWeibullPdf:
    @pytest.mark.parametrize(
        "x,gamma,delta,expected",
        [(1.0, 1.0, 1.0, math.exp(-1)), (1.0, 2.0, 1.0, 2 * math.exp(-1))],
    )
    def test_values(self, x, gamma, delta, expected):
        assert weibull_pdf(x, WeibullParams(gamma, delta)) == pytest.approx(expected, rel=1e-14)

    def test_integrates_to_one(self):
        p = WeibullParams(1.5, 2.0)
        assert abs(_integral(lambda x: weibull_pdf(x, p)) - 1.0) < QUAD_TOL

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain_error(self, x):
        with pytest.raises(ValueError):
            weibull_pdf(x, WeibullParams(1, 1))

    def test_logpdf_far_tail_is_finite(self):
        # the density underflows long before its log does
        assert np.isfinite(weibull_logpdf(1e3, WeibullParams(2.0, 1.0)))
        assert weibull_pdf(1e3, WeibullParams(2.0, 1.0)) == 0.0

    def test_matches_scipy(self):
        p = WeibullParams(1.7, 0.6)
        x = np.linspace(0.05, 5, 40)
        ref = stats.weibull_min(p.gamma, scale=p.scale).pdf(x)
        np.testing.assert_allclose(weibull_pdf(x, p), ref, rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(shapes, rates)
    def test_integrates_to_one_property(self, g, d):
        p = WeibullParams(g, d)
        total = _integral(lambda x: weibull_pdf(x, p), upper=p.scale) + _integral(
            lambda y: weibull_pdf(y + p.scale, p)
        )
        assert abs(total - 1.0) < QUAD_TOL


class TestWeibullCdf:
    def test_values(self):
        assert weibull_cdf(1.0, WeibullParams(1, 1)) == pytest.approx(1 - math.exp(-1), rel=1e-14)
        assert weibull_cdf(2.0, WeibullParams(1.5, 2.0)) == pytest.approx(1 - math.exp(-2 * 2**1.5), rel=1e-14)
        # 30-digit evaluation of 1 - exp(-2 * 2**1.5)
        assert weibull_cdf(2.0, WeibullParams(1.5, 2.0)) == pytest.approx(0.9965065107233538, abs=1e-15)

    def test_limits(self):
        p = WeibullParams(1.5, 2.0)
        assert weibull_cdf(1e-300, p) == pytest.approx(0.0, abs=1e-300)
        assert weibull_cdf(0.0, p) == 0.0
        assert weibull_cdf(-3.0, p) == 0.0
        assert weibull_cdf(1e6, p) == 1.0
        assert weibull_sf(-1.0, p) == 1.0

    @settings(max_examples=40, deadline=None)
    @given(shapes, rates)
    def test_nondecreasing(self, g, d):
        x = np.linspace(0, 10, 200)
        assert np.all(np.diff(weibull_cdf(x, WeibullParams(g, d))) >= 0)


class TestWeibullQuantile:
    def test_values(self):
        assert weibull_quantile(1 - math.exp(-1), WeibullParams(1, 1)) == pytest.approx(1.0, rel=1e-14)
        assert weibull_quantile(0.5, WeibullParams(2, 1)) == pytest.approx(math.sqrt(math.log(2)), rel=1e-14)
        assert weibull_quantile(0.5, WeibullParams(2, 1)) == pytest.approx(0.832555, abs=1e-6)

    def test_roundtrip_grid(self):
        p = WeibullParams(1.5, 2.0)
        u = np.arange(1, 100) / 100.0
        np.testing.assert_allclose(weibull_cdf(weibull_quantile(u, p), p), u, atol=ROUNDTRIP_TOL, rtol=0)

    @pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, u):
        with pytest.raises(ValueError):
            weibull_quantile(u, WeibullParams(1, 1))

    @settings(max_examples=50, deadline=None)
    @given(shapes, rates, st.floats(1e-6, 1 - 1e-6))
    def test_roundtrip_property(self, g, d, u):
        p = WeibullParams(g, d)
        assert abs(weibull_cdf(weibull_quantile(u, p), p) - u) < 1e-10


class TestHazard:
    def test_constant_for_exponential(self):
        t = np.array([0.1, 1.0, 7.0])
        np.testing.assert_allclose(weibull_hazard(t, WeibullParams(1, 3)), 3.0)

    def test_value(self):
        assert weibull_hazard(2.0, WeibullParams(2, 1)) == pytest.approx(4.0)

    @settings(max_examples=40, deadline=None)
    @given(shapes, rates)
    def test_ratio_identity(self, g, d):
        p = WeibullParams(g, d)
        t = np.linspace(0.05, 2.0 * p.scale, 30)
        lhs = weibull_hazard(t, p) * weibull_sf(t, p)
        np.testing.assert_allclose(lhs, weibull_pdf(t, p), rtol=RATIO_TOL, atol=1e-300)


class TestOrderStatistics:
    def test_single_observation_is_parent(self):
        p = WeibullParams(1.4, 0.7)
        t = np.linspace(0.1, 3, 10)
        np.testing.assert_allclose(order_stat_pdf(t, 1, 1, p), weibull_pdf(t, p), rtol=1e-13)

    def test_third_of_five_integrates_to_one(self):
        p = WeibullParams(1, 1)
        assert abs(_integral(lambda t: order_stat_pdf(t, 3, 5, p)) - 1.0) < QUAD_TOL

    @pytest.mark.parametrize("n", [1, 2, 7, 15, 30])
    def test_all_indices_integrate_to_one(self, n):
        p = WeibullParams(1.5, 2.0)
        for i in range(1, n + 1):
            lo = weibull_quantile(i / (n + 1.0), p)
            total = _integral(lambda t: order_stat_pdf(t, i, n, p), upper=lo) + _integral(
                lambda y: order_stat_pdf(y + lo, i, n, p)
            )
            assert abs(total - 1.0) < QUAD_TOL, (i, n)

    @pytest.mark.parametrize("n", [1, 4, 12, 30])
    def test_completeness(self, n):
        p = WeibullParams(0.8, 1.3)
        t = np.linspace(0.01, 4, 50)
        total = sum(order_stat_pdf(t, i, n, p) for i in range(1, n + 1))
        np.testing.assert_allclose(total, n * weibull_pdf(t, p), rtol=1e-8)

    def test_cdf_extremes(self):
        p = WeibullParams(1.2, 0.9)
        x = np.linspace(0.05, 4, 25)
        F = weibull_cdf(x, p)
        np.testing.assert_allclose(order_stat_cdf(x, 6, 6, p), F**6, rtol=1e-12)
        np.testing.assert_allclose(order_stat_cdf(x, 1, 6, p), 1 - (1 - F) ** 6, rtol=1e-12)

    def test_cdf_matches_binomial_tail(self):
        p = WeibullParams(1.2, 0.9)
        n, i = 9, 4
        for x in (0.3, 1.0, 2.2):
            F = weibull_cdf(x, p)
            tail = sum(math.comb(n, j) * F**j * (1 - F) ** (n - j) for j in range(i, n + 1))
            assert order_stat_cdf(x, i, n, p) == pytest.approx(tail, rel=1e-12)

    @pytest.mark.parametrize("i,n", [(1, 5), (3, 5), (5, 5), (10, 20)])
    def test_cdf_derivative_is_pdf(self, i, n):
        p = WeibullParams(1.5, 2.0)
        h = 1e-6
        for x in (0.2, 0.5, 0.9):
            fd = (order_stat_cdf(x + h, i, n, p) - order_stat_cdf(x - h, i, n, p)) / (2 * h)
            assert fd == pytest.approx(order_stat_pdf(x, i, n, p), abs=FD_TOL)

    @pytest.mark.parametrize("i,n", [(0, 5), (6, 5), (1, 0), (2.5, 5)])
    def test_index_errors(self, i, n):
        with pytest.raises(IndexError):
            order_stat_pdf(1.0, i, n, WeibullParams(1, 1))
        with pytest.raises(IndexError):
            order_stat_cdf(1.0, i, n, WeibullParams(1, 1))

    def test_log_binom_large_n(self):
        assert log_binom(2000, 700) == pytest.approx(math.log(math.comb(2000, 700)), rel=1e-12)

    def test_monte_carlo_third_of_five(self):
        p = WeibullParams(1, 1)
        rng = np.random.default_rng(7)
        draws = np.sort(rng.exponential(size=(1_000_000, 5)), axis=1)[:, 2]
        edges = np.linspace(0, 2.5, 26)
        counts, _ = np.histogram(draws, bins=edges)
        expected = np.diff(order_stat_cdf(edges, 3, 5, p)) * draws.size
        # Pearson chi-square over bins that hold almost all the mass
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        assert stats.chi2.sf(chi2, df=len(counts)) > 1e-3


class TestComparators:
    def test_lindley_cdf_limits(self):
        p = LindleyParams(0.9096)
        assert lindley_cdf(np.inf, p) == 1.0
        assert lindley_cdf(0.0, p) == 0.0

    def test_lindley_integrates_to_one(self):
        p = LindleyParams(0.9096)
        assert abs(_integral(lambda x: lindley_pdf(x, p)) - 1.0) < QUAD_TOL

    def test_lindley_cdf_derivative(self):
        p = LindleyParams(1.7)
        h = 1e-6
        for x in (0.3, 1.0, 4.0):
            fd = (lindley_cdf(x + h, p) - lindley_cdf(x - h, p)) / (2 * h)
            assert fd == pytest.approx(lindley_pdf(x, p), abs=FD_TOL)

    def test_invweibull_value(self):
        assert invweibull_cdf(1.0, InverseWeibullParams(1, 1)) == pytest.approx(math.exp(-1))

    def test_invweibull_integrates_to_one(self):
        p = InverseWeibullParams(1.5496, 1.02525)
        total = _integral(lambda x: invweibull_pdf(x, p), upper=1.0) + _integral(lambda y: invweibull_pdf(y + 1.0, p))
        assert abs(total - 1.0) < QUAD_TOL

    def test_invweibull_quantile_roundtrip(self):
        p = InverseWeibullParams(2.0, 0.5)
        u = np.linspace(0.01, 0.99, 50)
        np.testing.assert_allclose(invweibull_cdf(invweibull_quantile(u, p), p), u, atol=1e-12)

    def test_invweibull_matches_scipy(self):
        p = InverseWeibullParams(1.5, 2.0)
        x = np.linspace(0.1, 6, 30)
        ref = stats.invweibull(p.gamma, scale=p.delta ** (1 / p.gamma)).cdf(x)
        np.testing.assert_allclose(invweibull_cdf(x, p), ref, rtol=1e-12)


class TestSampling:
    def test_same_seed_same_draws(self):
        p = WeibullParams(1.5, 2.0)
        np.testing.assert_array_equal(sample_weibull(100, p, 42), sample_weibull(100, p, 42))
        assert not np.array_equal(sample_weibull(100, p, 42), sample_weibull(100, p, 43))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            sample_weibull(0, WeibullParams(1, 1), 0)

    def test_exponential_mean(self):
        x = sample_weibull(1_000_000, WeibullParams(1, 1), 2024)
        assert abs(x.mean() - 1.0) < 0.005
        assert np.all(x > 0)

    def test_ks_distance(self):
        p = WeibullParams(1.5, 2.0)
        x = np.sort(sample_weibull(1_000_000, p, 99))
        F = weibull_cdf(x, p)
        i = np.arange(1, x.size + 1)
        D = max(np.max(i / x.size - F), np.max(F - (i - 1) / x.size))
        assert D < 0.005

    def test_gamma_function_mean(self):
        p = WeibullParams(2.0, 0.5)
        x = sample_weibull(400_000, p, 5)
        expected = p.scale * special.gamma(1 + 1 / p.gamma)
        assert x.mean() == pytest.approx(expected, abs=4 * x.std() / math.sqrt(x.size))
