"""Kernel constant, renewal series routes, identity checks, law fits."""

import math

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from farey import asymptotic, exact, transfer


class TestKernelConstant:
    def test_pieces_frozen(self):
        # independent quadrature oracles for the two halves of the constant
        p1, p2 = asymptotic.log_kernel_constant_pieces()
        assert math.isclose(p1, -0.7965995992970532, abs_tol=1e-11)
        assert math.isclose(p2, 0.2193839343955202, abs_tol=1e-11)

    def test_constant_is_minus_gamma(self):
        C = asymptotic.log_kernel_constant()
        assert abs(C + asymptotic.EULER_GAMMA) < 1e-10

    def test_pieces_sum_to_constant(self):
        p1, p2 = asymptotic.log_kernel_constant_pieces()
        assert math.isclose(p1 + p2, asymptotic.log_kernel_constant(), abs_tol=1e-14)


class TestKernelWeights:
    def test_values(self):
        k = asymptotic.KernelWeights(2)
        assert k.ell(0) == math.log(2)
        assert math.isclose(k.ell(3), math.log1p(1.0 / 4.0), rel_tol=1e-15)

    @given(st.integers(min_value=0, max_value=300), st.integers(min_value=2, max_value=9))
    def test_prefix_telescopes(self, m, N):
        # sum_{n<=m} ell(n) collapses to log(m + N)
        k = asymptotic.KernelWeights(N)
        assert math.isclose(k.prefix_sum(m), math.log(m + N), rel_tol=1e-13)


class TestRenewalRoutes:
    @pytest.mark.parametrize("sigma", [0.5, 3.0, 30.0])
    @pytest.mark.parametrize("N", [2, 3])
    def test_lambda_series_equals_integral_form(self, sigma, N):
        K = int(30 * sigma) + 1000
        a = asymptotic.renewal_lambda_series(sigma, N, K=K)
        b = asymptotic.renewal_lambda_integral(sigma, N, K=K)
        assert math.isclose(a, b, rel_tol=0, abs_tol=1e-9)

    @pytest.mark.parametrize("sigma", [0.5, 3.0, 30.0])
    @pytest.mark.parametrize("N", [2, 3])
    def test_mu_series_equals_integral_form(self, sigma, N):
        K = int(30 * sigma) + 1000
        a = asymptotic.renewal_mu_series(sigma, N, K=K)
        b = asymptotic.renewal_mu_integral(sigma, N, K=K)
        assert math.isclose(a, b, rel_tol=0, abs_tol=1e-9)

    def test_lambda_series_saturates_toward_one(self):
        # the raw deviation dies like log(sigma)/sigma; scaled by
        # sigma/log(sigma) it saturates toward 1 from below
        scaled = [
            abs(asymptotic.renewal_lambda_deviation(s, 2)) * s / math.log(s)
            for s in (1e2, 1e3, 1e4)
        ]
        assert all(0 < d < 1 for d in scaled)
        assert asymptotic.growth_verdict(scaled) == "bounded"

    def test_mu_deviation_scaled_bounded(self):
        scaled = [
            abs(asymptotic.renewal_mu_deviation(s, 3)) * s / math.log(s)
            for s in (1e2, 1e3, 1e4)
        ]
        assert all(abs(d) < 3 for d in scaled)
        assert asymptotic.growth_verdict(scaled) == "bounded"


class TestTelescopeIdentity:
    def test_measured_sequence(self, default_ctx):
        ser = transfer.LevelMeasureSeries.build(mpq(1, 2), 60, context=default_ctx)
        seq = [float(v) for v in ser.lam[:51]]
        assert asymptotic.convolution_telescope_gap(2, 50, seq) <= 1e-12

    def test_random_sequences(self):
        rng = np.random.default_rng(20260815)
        for _ in range(5):
            seq = rng.random(51).tolist()
            assert asymptotic.convolution_telescope_gap(2, 50, seq) <= 1e-12

    def test_trivial_n_zero(self):
        assert asymptotic.convolution_telescope_gap(2, 0, [0.7]) <= 1e-15


class TestGrowthVerdict:
    def test_rule_cases(self):
        gv = asymptotic.growth_verdict
        assert gv([1.0, 2.0, 3.0]) == "growing"
        assert gv([1.0, 2.0, 4.0]) == "growing"
        assert gv([1.45, 1.44, 1.43]) == "bounded"
        # saturating: increments collapse, so not growth
        assert gv([0.64, 0.93, 1.00]) == "bounded"
        # ratio below 1.5 is never growth
        assert gv([1.0, 1.2, 1.4]) == "bounded"
        # two-point grids have no increment trend to consult
        assert gv([1.0, 2.0]) == "growing"
        assert gv([2.0, 1.0]) == "bounded"

    def test_rule_string_recorded(self):
        assert "decelerate" in asymptotic.VERDICT_RULE


class TestRenewalIdentity:
    def test_phi0_weight(self, default_ctx):
        rep = asymptotic.renewal_identity_check(2, 0.5, 50, context=default_ctx)
        assert rep.gap <= rep.tolerance
        assert rep.N == 2 and rep.sigma == 0.5 and rep.K == 50
        assert rep.weight == "phi0"

    def test_weight_one_closed_form(self, default_ctx):
        rep = asymptotic.renewal_identity_check(
            3, 2.0, 60, weight="one", context=default_ctx
        )
        assert rep.gap <= rep.tolerance
        assert rep.gap < 1e-9

    def test_gap_helper(self, default_ctx):
        gap = asymptotic.renewal_identity_gap(2, 0.5, 50, context=default_ctx)
        rep = asymptotic.renewal_identity_check(2, 0.5, 50, context=default_ctx)
        assert gap == rep.gap

    def test_components_reported(self, default_ctx):
        rep = asymptotic.renewal_identity_check(2, 0.5, 50, context=default_ctx)
        assert "lhs" in rep.components or rep.lhs is not None


class TestLawFits:
    # short two-decade grids on the default mesh: enough to exercise the
    # report plumbing without the laws-mesh sweep
    def test_partial_sum_report(self, default_ctx):
        rep = asymptotic.partial_sum_law_fit(
            mpq(1, 2), (100, 1000), context=default_ctx
        )
        assert rep.law == "partial"
        assert rep.verdict == "bounded"
        assert rep.K == max(p["scaled_error"] for p in rep.points)
        doc = rep.as_json()
        assert set(doc) == {"law", "params", "points", "K", "verdict", "verdict_rule"}

    def test_laplace_report(self, default_ctx):
        rep = asymptotic.laplace_law_fit(2, (50.0, 500.0), context=default_ctx)
        assert rep.law == "s"
        assert rep.verdict == "bounded"
        assert rep.params["N"] == 2
        assert rep.params["mesh"]["node_count"] == len(default_ctx.mesh)

    def test_interval_report(self, default_ctx):
        rep = asymptotic.interval_law_fit(
            mpq(1, 2), mpq(1), (100, 1000), context=default_ctx
        )
        assert rep.law == "pointwise"
        assert rep.verdict == "bounded"

    def test_interval_difference_route(self, default_ctx):
        # beta < 1 subtracts two level sequences
        rep = asymptotic.interval_law_fit(
            mpq(1, 3), mpq(2, 3), (50, 200), context=default_ctx
        )
        assert all(p["value"] > 0 for p in rep.points)

    def test_remainder_scaled(self, default_ctx):
        val = asymptotic.remainder_scaled(2, 500, context=default_ctx)
        assert 0 < val < 2

    def test_domain_errors(self, default_ctx):
        with pytest.raises(exact.DomainError):
            asymptotic.laplace_law_fit(1, (100.0,), context=default_ctx)
        with pytest.raises(exact.DomainError):
            asymptotic.laplace_law_fit(2, (0.5,), context=default_ctx)
        with pytest.raises(exact.DomainError):
            asymptotic.partial_sum_law_fit(mpq(3, 2), (100,), context=default_ctx)
        with pytest.raises(exact.DomainError):
            asymptotic.interval_law_fit(
                mpq(2, 3), mpq(1, 3), (100,), context=default_ctx
            )
