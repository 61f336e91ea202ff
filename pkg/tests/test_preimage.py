"""Streaming preimage enumeration: totals, modes, worker determinism."""

import math

import pytest
from gmpy2 import mpq

from farey import exact, preimage, sternbrocot

BASE = exact.Interval(mpq(1, 2), mpq(1))


class TestMeasureTotals:
    def test_exact_totals_match_levels(self):
        levels = preimage.exact_level_measures(BASE, 8)
        for depth in range(0, 9):
            rep = preimage.preimage_measure(BASE, depth)
            assert rep.mode == "exact"
            assert rep.lambda_total == levels[depth]

    def test_interval_count(self):
        for depth in range(0, 10):
            rep = preimage.preimage_measure(BASE, depth)
            assert rep.interval_count == 2**depth

    def test_mu_invariance(self):
        # pulling back preserves mu, so every depth integrates to log 2
        for depth in (0, 3, 7):
            rep = preimage.preimage_measure(BASE, depth)
            assert math.isclose(rep.mu_total, math.log(2), rel_tol=1e-12)

    def test_general_base_interval(self):
        base = exact.Interval(mpq(1, 3), mpq(2, 3))
        rep = preimage.preimage_measure(base, 5)
        levels = preimage.exact_level_measures(base, 5)
        assert rep.lambda_total == levels[5]

    def test_depth_zero_is_base(self):
        rep = preimage.preimage_measure(BASE, 0)
        assert rep.lambda_total == mpq(1, 2)
        assert rep.interval_count == 1


class TestFloatMode:
    def test_float_close_to_exact_with_bound(self):
        for depth in (6, 10):
            ex = preimage.preimage_measure(BASE, depth)
            fl = preimage.preimage_measure(BASE, depth, mode="float64")
            assert fl.mode == "float64"
            err = abs(fl.lambda_total - float(ex.lambda_total))
            assert err <= fl.float_error_bound
            assert err <= 1e-12 * float(ex.lambda_total)

    def test_exact_mode_has_no_bound(self):
        rep = preimage.preimage_measure(BASE, 5)
        assert rep.float_error_bound is None

    def test_unknown_mode(self):
        with pytest.raises(exact.DomainError):
            preimage.preimage_measure(BASE, 5, mode="float32")


class TestWorkerDeterminism:
    def test_workers_bit_identical(self):
        # the parallel split must not change the reduction order
        base = preimage.preimage_measure(BASE, 12, mode="float64", workers=1)
        for workers in (2, 3):
            rep = preimage.preimage_measure(BASE, 12, mode="float64", workers=workers)
            assert rep.lambda_total == base.lambda_total
            assert rep.mu_total == base.mu_total

    def test_prefix_depth_invariance(self):
        a = preimage.preimage_measure(BASE, 11, mode="float64", prefix_depth=4)
        b = preimage.preimage_measure(BASE, 11, mode="float64", prefix_depth=8)
        assert a.lambda_total == b.lambda_total


class TestIntervalSets:
    def test_set_matches_sb_route(self):
        for n in range(2, 10):
            got = preimage.preimage_set(BASE, n - 1)
            want = sternbrocot.sumlevel_intervals_sb(n)
            assert got == want

    def test_cf_route_matches(self):
        for n in range(2, 10):
            assert preimage.sumlevel_intervals_cf(n) == sternbrocot.sumlevel_intervals_sb(n)

    def test_set_depth_cap(self):
        with pytest.raises(exact.CapacityError):
            preimage.preimage_set(BASE, preimage.MAX_SET_DEPTH + 1)


class TestQuadrature:
    def test_constant_recovers_lambda(self):
        val = preimage.integrate_over_preimage(BASE, 7, lambda x: x * 0 + 1.0)
        want = float(preimage.exact_level_measures(BASE, 7)[7])
        assert math.isclose(val, want, rel_tol=1e-14)

    def test_inverse_x_recovers_mu(self):
        val = preimage.integrate_over_preimage(BASE, 7, lambda x: 1.0 / x)
        assert math.isclose(val, math.log(2), rel_tol=1e-10)

    def test_linearity(self):
        f = preimage.integrate_over_preimage(BASE, 5, lambda x: x)
        g = preimage.integrate_over_preimage(BASE, 5, lambda x: 3.0 * x)
        assert math.isclose(3.0 * f, g, rel_tol=1e-14)
