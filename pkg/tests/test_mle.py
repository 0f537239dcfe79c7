import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from mixcens.censoring import Case, CensoredSample, CensoringScheme, apply_scheme, log_likelihood
from mixcens.distributions import WeibullParams, order_stat_pdf, sample_weibull
from mixcens.exceptions import DegenerateDataError
from mixcens.mle import (
    MleConfig,
    finite_difference_hessian,
    fisher_information,
    fit_mle,
    observed_information,
    profile_delta,
    profile_update,
    score,
)

from conftest import random_case_ii_sample

TABLE_TOL = 1e-3
GRAD_TOL = 1e-6
HESS_RTOL = 1e-4
QUAD_TOL = 1e-8
EULER = 0.5772156649015329

# (m, S) -> gamma, delta, ACI gamma, ACI delta, as printed for the precipitation data
TABLE_MLE = {
    (20, 1.0): (1.8461, 0.3099, (1.2618, 2.4304), (0.1307, 0.4891)),
    (20, 2.0): (1.8534, 0.3105, (1.3243, 2.3826), (0.1327, 0.4882)),
    (15, 1.0): (1.9386, 0.3042, (1.2786, 2.5985), (0.1259, 0.4825)),
    (15, 2.0): (1.9174, 0.3031, (1.3644, 2.4704), (0.1272, 0.4791)),
}


def _fd_score(sample, p, rel=1e-5):
    out = []
    for k in range(2):
        v = np.array([p.gamma, p.delta])
        h = rel * v[k]
        up, dn = v.copy(), v.copy()
        up[k] += h
        dn[k] -= h
        out.append((log_likelihood(sample, WeibullParams(*up)) - log_likelihood(sample, WeibullParams(*dn))) / (2 * h))
    return out


class TestScore:
    def test_stationary_at_mle(self, precip_20_1):
        fit = fit_mle(precip_20_1)
        dg, dd = score(precip_20_1, fit.params)
        assert abs(dg) < 1e-8 and abs(dd) < 1e-8

    def test_ones_delta_component(self):
        s = apply_scheme([1.0, 1.0, 1.0], CensoringScheme(3, 3, 0.0))
        assert score(s, WeibullParams(2.0, 1.0))[1] == 0.0

    def test_matches_finite_difference(self, rng):
        for _ in range(30):
            s = random_case_ii_sample(rng)
            p = WeibullParams(rng.uniform(0.5, 3), rng.uniform(0.2, 3))
            analytic = score(s, p)
            numeric = _fd_score(s, p)
            for a, b in zip(analytic, numeric):
                assert abs(a - b) < GRAD_TOL * max(1.0, abs(a))


class TestFitMle:
    def test_complete_precipitation(self, precip):
        fit = fit_mle(apply_scheme(precip, CensoringScheme(30, 30, 0.0)))
        assert fit.converged
        assert fit.params.gamma == pytest.approx(1.8089, abs=TABLE_TOL)
        assert fit.params.delta == pytest.approx(0.3155, abs=TABLE_TOL)

    @pytest.mark.parametrize("m,S", list(TABLE_MLE))
    def test_censored_precipitation(self, precip, m, S):
        g, d, aci_g, aci_d = TABLE_MLE[(m, S)]
        fit = fit_mle(apply_scheme(precip, CensoringScheme(30, m, S)))
        assert fit.converged
        assert fit.params.gamma == pytest.approx(g, abs=TABLE_TOL)
        assert fit.params.delta == pytest.approx(d, abs=TABLE_TOL)
        np.testing.assert_allclose(fit.aci_gamma, aci_g, atol=TABLE_TOL)
        np.testing.assert_allclose(fit.aci_delta, aci_d, atol=TABLE_TOL)

    def test_invariants(self, precip_20_1):
        cfg = MleConfig()
        fit = fit_mle(precip_20_1, cfg)
        g = fit.params.gamma
        assert abs(profile_update(precip_20_1, g) - g) < cfg.tol
        assert fit.params.delta == profile_delta(precip_20_1, g)
        assert fit.aci_gamma[0] < g < fit.aci_gamma[1]
        assert fit.aci_delta[0] < fit.params.delta < fit.aci_delta[1]
        assert fit.loglik == log_likelihood(precip_20_1, fit.params)

    def test_delta_at_unit_shape(self, precip):
        s = apply_scheme(precip, CensoringScheme(30, 30, 0.0))
        assert profile_delta(s, 1.0) == pytest.approx(30 / precip.sum(), rel=1e-14)

    def test_interval_width_matches_level(self, precip_20_1):
        f90 = fit_mle(precip_20_1, MleConfig(alpha_level=0.10))
        f95 = fit_mle(precip_20_1)
        w = lambda iv: iv[1] - iv[0]  # noqa: E731
        assert w(f95.aci_gamma) / w(f90.aci_gamma) == pytest.approx(1.959963985 / 1.644853627, rel=1e-8)

    def test_clip_lower(self):
        x = sample_weibull(8, WeibullParams(1.0, 1.0), 3)
        s = apply_scheme(x, CensoringScheme(8, 3, 0.0))
        raw = fit_mle(s)
        clipped = fit_mle(s, MleConfig(clip_lower=True))
        assert raw.aci_delta[0] < 0
        assert clipped.aci_delta[0] == 0.0
        assert clipped.aci_delta[1] == raw.aci_delta[1]

    def test_non_convergence_flag(self, precip_20_1):
        fit = fit_mle(precip_20_1, MleConfig(max_iter=2))
        assert not fit.converged and fit.iterations == 2

    def test_damping_engages_on_oscillation(self, precip_20_1):
        # the undamped map overshoots on these data
        assert fit_mle(precip_20_1).damped

    @pytest.mark.parametrize("data,scheme", [
        ([1.0, 2.0, 3.0, 9.0], CensoringScheme(4, 1, 0.0)),
        ([2.0, 2.0, 2.0], CensoringScheme(3, 3, 0.0)),
    ])
    def test_degenerate(self, data, scheme):
        with pytest.raises(DegenerateDataError):
            fit_mle(apply_scheme(data, scheme))

    def test_scale_equivariance(self, precip):
        scheme = CensoringScheme(30, 20, 1.0)
        base = fit_mle(apply_scheme(precip, scheme)).params
        for alpha in (0.5, 3.0):
            fit = fit_mle(apply_scheme(alpha * precip, scheme.scaled(alpha))).params
            assert fit.gamma == pytest.approx(base.gamma, abs=1e-7)
            assert fit.delta == pytest.approx(base.delta / alpha**base.gamma, rel=1e-6)

    def test_converges_from_any_start_on_exponential_data(self):
        rng = np.random.default_rng(11)
        for trial in range(25):
            n = int(rng.integers(20, 80))
            s = apply_scheme(rng.exponential(size=n), CensoringScheme(n, n, 0.0))
            ref = None
            for g0 in (0.2, 0.5, 1.0, 2.5, 5.0):
                fit = fit_mle(s, MleConfig(gamma_init=g0))
                assert fit.converged, (trial, g0)
                if ref is None:
                    ref = fit.params.gamma
                assert fit.params.gamma == pytest.approx(ref, abs=1e-7)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(10, 60), st.floats(0.1, 1.0), st.floats(0.0, 1.0))
    def test_score_vanishes_at_convergence(self, seed, n, frac, S):
        x = sample_weibull(n, WeibullParams(1.5, 2.0), seed)
        m = max(2, int(frac * n))
        s = apply_scheme(x, CensoringScheme(n, m, S))
        fit = fit_mle(s)
        if fit.converged:
            dg, dd = score(s, fit.params)
            scale_g = s.w / fit.params.gamma
            assert abs(dg) < 1e-5 * scale_g
            assert abs(dd) < 1e-9 * s.w / fit.params.delta


class TestObservedInformation:
    def test_delta_entry(self, precip_20_1):
        p = WeibullParams(1.8, 0.3)
        assert observed_information(precip_20_1, p)[1, 1] == pytest.approx(26 / 0.09, rel=1e-14)

    def test_matches_finite_difference(self, rng):
        for _ in range(100):
            n = int(rng.integers(10, 40))
            s = random_case_ii_sample(rng, n=n, m=n // 2)
            p = WeibullParams(rng.uniform(0.5, 3), rng.uniform(0.2, 3))
            info = observed_information(s, p)
            fd = -finite_difference_hessian(s, p)
            np.testing.assert_allclose(info, fd, rtol=HESS_RTOL, atol=HESS_RTOL * np.abs(info).max())

    def test_positive_definite_at_mle(self, precip_20_1):
        fit = fit_mle(precip_20_1)
        assert np.all(np.linalg.eigvalsh(fit.observed_info) > 0)
        np.testing.assert_array_equal(fit.observed_info, fit.observed_info.T)


class TestFisherInformation:
    def test_exponential_single_unit(self):
        info = fisher_information(1, 1, WeibullParams(1, 1))
        closed = (1 - EULER) ** 2 + math.pi**2 / 6
        assert info.I11 == pytest.approx(closed, abs=QUAD_TOL)
        assert info.I11 == pytest.approx(1.8236806608529348, abs=QUAD_TOL)
        assert info.I12 == pytest.approx(1 - EULER, abs=QUAD_TOL)
        assert info.I22 == pytest.approx(1.0, abs=QUAD_TOL)

    @pytest.mark.parametrize("n,r,g,d", [(5, 3, 1.5, 2.0), (10, 10, 0.8, 1.0), (20, 7, 2.0, 0.5)])
    def test_i22_counts_densities(self, n, r, g, d):
        info = fisher_information(n, r, WeibullParams(g, d))
        assert info.I22 == pytest.approx(r / d**2, rel=QUAD_TOL)

    def test_i21_by_independent_integral(self):
        n, r, p = 8, 5, WeibullParams(1.5, 2.0)
        info = fisher_information(n, r, p)
        # integrate the other way round: per order statistic, on the raw half line
        i21 = sum(
            integrate.quad(lambda t: (1 / p.gamma + math.log(t)) * order_stat_pdf(t, i, n, p), 0, np.inf,
                           epsabs=1e-12, epsrel=1e-12, limit=400)[0]
            for i in range(1, r + 1)
        ) / p.delta
        assert info.I12 == pytest.approx(i21, abs=QUAD_TOL)

    def test_positive_definite(self):
        for n, r in [(5, 2), (15, 15), (30, 20)]:
            assert np.all(np.linalg.eigvalsh(fisher_information(n, r, WeibullParams(1.5, 2.0)).matrix) > 0)

    @pytest.mark.parametrize("r", [0, 6])
    def test_index_error(self, r):
        with pytest.raises(IndexError):
            fisher_information(5, r, WeibullParams(1, 1))

    def test_complete_sample_equals_n_times_unit_information(self):
        p = WeibullParams(1.5, 2.0)
        one = fisher_information(1, 1, p)
        ten = fisher_information(10, 10, p)
        np.testing.assert_allclose(ten.matrix, 10 * one.matrix, rtol=1e-8)

    def test_observed_information_is_consistent(self):
        # average observed information of complete samples approaches n * I(1)
        p = WeibullParams(1.5, 2.0)
        n = 20_000
        unit = fisher_information(1, 1, p).matrix
        obs = observed_information(apply_scheme(sample_weibull(n, p, 8), CensoringScheme(n, n, 0.0)), p)
        np.testing.assert_allclose(obs / n, unit, atol=0.05 * np.abs(unit).max())


class TestCaseTwoFit:
    def test_type_ii_matches_direct_optimisation(self):
        from scipy import optimize

        x = sample_weibull(40, WeibullParams(1.5, 2.0), 21)
        s = apply_scheme(x, CensoringScheme(40, 25, 0.1))
        assert s.case is Case.II
        fit = fit_mle(s)
        res = optimize.minimize(lambda v: -log_likelihood(s, WeibullParams(*np.exp(v))), x0=[0.0, 0.0],
                                method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 5000})
        np.testing.assert_allclose(np.exp(res.x), [fit.params.gamma, fit.params.delta], rtol=1e-5)

    def test_record_roundtrip_gives_same_fit(self, precip_20_1):
        again = CensoredSample.from_record(precip_20_1.to_record())
        a, b = fit_mle(again), fit_mle(precip_20_1)
        assert a.params == b.params
        assert (a.aci_gamma, a.aci_delta) == (b.aci_gamma, b.aci_delta)
