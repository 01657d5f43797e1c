import math

import pytest
from hypothesis import given, settings, strategies as st

from dichotomy.coalition import PosteriorRate
from dichotomy.errors import DomainError
from dichotomy.posterior import (
    beta_mean,
    beta_median,
    beta_mode,
    beta_raw_moment,
    beta_variance,
    mad_about_mean,
    semivariances,
    summarize,
    verify_asymptotic_variance,
    verify_degenerate_limit,
    verify_mad_ratio,
    verify_posterior_mean_expansion,
    verify_semivariance_sandwich,
)

from _oracles import quad_lower_semivariance, quad_mad, quad_raw_moment

shapes = st.floats(min_value=0.2, max_value=500.0)


class TestBasicStatistics:
    def test_symmetric_summary(self):
        s = summarize(PosteriorRate(6.0, 6.0, 0.5))
        assert s.mean == 0.5
        assert s.median == pytest.approx(0.5, abs=1e-12)
        assert s.mode == pytest.approx(0.5, abs=1e-12)
        assert s.lower_semivariance == pytest.approx(s.upper_semivariance, rel=1e-10)

    def test_variance_closed_form(self):
        assert beta_variance(6.0, 6.0) == pytest.approx(1.0 / 52.0, rel=1e-12)

    def test_mode_undefined_at_boundary_shapes(self):
        assert beta_mode(1.0, 5.0) is None
        assert beta_mode(5.0, 0.7) is None
        assert summarize(PosteriorRate(1.0, 5.0, 0.2)).mode is None

    def test_moments_against_quadrature(self):
        a, b = 6.5, 3.2
        for k in range(1, 7):
            assert beta_raw_moment(a, b, k) == pytest.approx(
                quad_raw_moment(a, b, k), abs=1e-10
            )

    @given(shapes, shapes)
    @settings(max_examples=40)
    def test_median_between_mean_and_mode(self, a, b):
        mode = beta_mode(a, b)
        if mode is None:
            return
        med = beta_median(a, b)
        lo, hi = sorted((beta_mean(a, b), mode))
        assert lo - 1e-12 <= med <= hi + 1e-12

    def test_median_matches_scipy(self):
        from scipy import stats

        for (a, b) in [(2.0, 5.0), (6.0, 6.0), (0.4, 0.9), (300.0, 70.0)]:
            assert beta_median(a, b) == pytest.approx(
                float(stats.beta.ppf(0.5, a, b)), abs=1e-12
            )


class TestMad:
    def test_uniform_case_matches_quadrature(self):
        # Direct integration of the uniform density gives exactly 1/4.
        assert quad_mad(1.0, 1.0) == pytest.approx(0.25, abs=1e-12)
        assert mad_about_mean(1.0, 1.0) == pytest.approx(0.25, rel=1e-12)

    def test_against_quadrature(self):
        assert mad_about_mean(50.0, 70.0) == pytest.approx(
            quad_mad(50.0, 70.0), rel=1e-9
        )

    @pytest.mark.parametrize("a,b", [(30.0, 30.0), (45.0, 200.0), (1000.0, 333.0)])
    def test_quadrature_match_at_moderate_shapes(self, a, b):
        assert mad_about_mean(a, b) == pytest.approx(quad_mad(a, b), rel=1e-9)

    def test_squared_ratio_to_variance_limit(self):
        ratio = mad_about_mean(1e4, 1e4) ** 2 / beta_variance(1e4, 1e4)
        assert ratio == pytest.approx(2.0 / math.pi, abs=1e-3)


class TestSemivariances:
    def test_symmetric_split(self):
        lo, up = semivariances(6.0, 6.0)
        assert lo == pytest.approx(beta_variance(6.0, 6.0) / 2.0, rel=1e-12)
        assert up == pytest.approx(lo, rel=1e-12)

    def test_against_quadrature(self):
        lo, _ = semivariances(6.0, 4.0)
        assert lo == pytest.approx(quad_lower_semivariance(6.0, 4.0), rel=1e-10)

    @given(shapes, shapes)
    @settings(max_examples=40)
    def test_decomposition(self, a, b):
        lo, up = semivariances(a, b)
        assert lo + up == pytest.approx(beta_variance(a, b), rel=1e-10)
        assert lo >= 0.0 and up >= 0.0

    def test_extreme_shapes_use_quadrature_fallback(self):
        lo, up = semivariances(2e7, 3e7)
        var = beta_variance(2e7, 3e7)
        assert 0.3 * var < lo < 0.7 * var
        assert lo + up == pytest.approx(var, rel=1e-10)

    def test_incomplete_beta_route_at_large_solved_shapes(self):
        lo, _ = semivariances(9e6, 1e6)
        assert lo == pytest.approx(quad_lower_semivariance(9e6, 1e6), rel=1e-6)


class TestVerifyReports:
    ns = [1_000, 10_000, 100_000]

    def test_degenerate_limit(self):
        report = verify_degenerate_limit(0.9, 0.1, 0.5, self.ns)
        assert report.passed
        errs = [r.abs_error for r in report.rows]
        assert errs[0] > errs[1] > errs[2]

    def test_degenerate_limit_rejects_boundary_rate(self):
        rule = 1 - 0.9 + 0.1 * 0.9
        with pytest.raises(DomainError):
            verify_degenerate_limit(0.9, 0.1, rule, self.ns)
        with pytest.raises(DomainError):
            verify_degenerate_limit(0.9, 0.1, 1.0, self.ns)

    def test_scaled_variance(self):
        report = verify_asymptotic_variance(0.9, 0.1, 0.5, self.ns)
        assert report.passed
        assert report.details["limit"] == pytest.approx(0.0279, abs=1e-12)
        assert -1.3 <= report.details["slope"] <= -0.7

    def test_mean_response(self):
        report = verify_posterior_mean_expansion(0.9, 0.1, 0.5, self.ns)
        assert report.passed
        assert report.details["coefficient"] == pytest.approx(-0.329, abs=1e-12)
        assert report.details["mean_derivative_in_tau"] < 0.0

    def test_mean_response_needs_majority_employment(self):
        with pytest.raises(DomainError):
            verify_posterior_mean_expansion(0.4, 0.1, 0.7, self.ns)

    def test_mean_response_coefficient_at_half(self):
        # At omega = 1/2 the tax-dependent part of the coefficient vanishes.
        a = verify_posterior_mean_expansion(0.5 + 1e-9, 0.1, 0.7, [10_000])
        assert a.details["coefficient"] == pytest.approx(0.25 * (0.1 - 1.0), abs=1e-6)

    def test_sandwich(self):
        report = verify_semivariance_sandwich(0.9, 0.1, 0.5, self.ns)
        assert report.passed
        lo = report.details["lower_bound"]
        up = report.details["upper_bound"]
        assert lo == pytest.approx((0.5 - 1 / math.sqrt(2 * math.pi)) * 0.0279, rel=1e-12)
        assert up == pytest.approx(0.0279, rel=1e-12)

    def test_mad_ratio(self):
        report = verify_mad_ratio(0.9, 0.1, 0.5, self.ns + [1_000_000])
        assert report.passed
        assert report.details["final_ratio"] == pytest.approx(2 / math.pi, abs=1e-2)

    def test_csv_shape(self):
        report = verify_asymptotic_variance(0.9, 0.1, 0.5, self.ns)
        lines = report.to_csv().strip().split("\n")
        assert lines[0] == (
            "n,theta,rho,mean,variance,n_var,lower_semi,upper_semi,mad,target,abs_error"
        )
        assert len(lines) == 1 + len(self.ns)
        # Values round-trip through float().
        for token in lines[1].split(","):
            float(token)

    def test_moment_convergence_detail(self):
        report = verify_degenerate_limit(0.9, 0.1, 0.5, [1_000, 1_000_000])
        for k, err in report.details["moment_errors"].items():
            assert err < 1e-3, k
