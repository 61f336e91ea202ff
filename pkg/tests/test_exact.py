"""Rational scaffolding: parsing, interval measures, set normalization."""

import math

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from farey import exact

rationals_01 = st.fractions(min_value=0, max_value=1)


def q(fr):
    return mpq(fr.numerator, fr.denominator)


class TestRationalParsing:
    def test_parse_fraction(self):
        assert exact.parse_rational("1/2") == mpq(1, 2)
        assert exact.parse_rational("39/140") == mpq(39, 140)

    def test_parse_integer(self):
        assert exact.parse_rational("3") == mpq(3)

    def test_parse_rejects_garbage(self):
        for bad in ("", "a/b", "1/0", "0.25", "1//2"):
            with pytest.raises(exact.DomainError):
                exact.parse_rational(bad)

    @given(rationals_01)
    def test_format_parse_roundtrip(self, fr):
        x = q(fr)
        assert exact.parse_rational(exact.format_rational(x)) == x

    def test_rational_coercions(self):
        assert exact.rational(1, 2) == mpq(1, 2)
        assert exact.rational("7/10") == mpq(7, 10)
        assert exact.rational(mpq(3, 4)) == mpq(3, 4)


class TestInterval:
    def test_orientation_enforced(self):
        with pytest.raises(exact.DomainError):
            exact.Interval(mpq(1, 2), mpq(1, 3))

    def test_lambda_is_length(self):
        iv = exact.Interval(mpq(1, 3), mpq(1, 2))
        assert exact.interval_lambda(iv) == mpq(1, 6)

    def test_mu_is_log_ratio(self):
        # mu([a,b]) = log(b/a): the invariant measure with density 1/x
        iv = exact.Interval(mpq(1, 3), mpq(1, 2))
        with mpmath.workprec(130):
            want = mpmath.log(mpmath.mpf(3) / 2)
            gap = abs(exact.interval_mu(iv, bits=120) - want)
        assert gap < mpmath.mpf(2) ** -110

    def test_mu_diverges_at_zero(self):
        with pytest.raises(exact.InfiniteMeasureError):
            exact.interval_mu(exact.Interval(mpq(0), mpq(1, 2)))

    @given(rationals_01, rationals_01)
    def test_mu_additive(self, a, b):
        lo, hi = sorted((q(a), q(b)))
        if lo == hi or lo == 0:
            return
        mid = (lo + hi) / 2
        with mpmath.workprec(110):
            total = exact.interval_mu(exact.Interval(lo, hi))
            parts = exact.interval_mu(exact.Interval(lo, mid)) + exact.interval_mu(
                exact.Interval(mid, hi)
            )
            gap = abs(total - parts)
        assert gap < mpmath.mpf(2) ** -90


class TestSetNormalize:
    def test_merges_adjacent(self):
        s = exact.set_normalize(
            [
                exact.Interval(mpq(1, 2), mpq(3, 4)),
                exact.Interval(mpq(1, 4), mpq(1, 2)),
            ]
        )
        assert list(s) == [exact.Interval(mpq(1, 4), mpq(3, 4))]
        assert s.total_lambda == mpq(1, 2)

    def test_keeps_gaps(self):
        s = exact.set_normalize(
            [
                exact.Interval(mpq(3, 5), mpq(4, 5)),
                exact.Interval(mpq(1, 5), mpq(2, 5)),
            ]
        )
        assert len(list(s)) == 2
        assert s.total_lambda == mpq(2, 5)

    def test_rejects_overlap(self):
        with pytest.raises(exact.DomainError):
            exact.set_normalize(
                [
                    exact.Interval(mpq(1, 4), mpq(1, 2)),
                    exact.Interval(mpq(1, 3), mpq(2, 3)),
                ]
            )

    def test_canonical_equality(self):
        a = exact.set_normalize(
            [
                exact.Interval(mpq(1, 4), mpq(1, 2)),
                exact.Interval(mpq(1, 2), mpq(3, 4)),
            ]
        )
        b = exact.set_normalize([exact.Interval(mpq(1, 4), mpq(3, 4))])
        assert a == b

    def test_total_mu_matches_piecewise(self):
        ivs = [
            exact.Interval(mpq(1, 5), mpq(2, 5)),
            exact.Interval(mpq(3, 5), mpq(4, 5)),
        ]
        s = exact.set_normalize(ivs)
        want = sum(float(exact.interval_mu(iv)) for iv in ivs)
        assert math.isclose(float(s.total_mu()), want, rel_tol=1e-15)


class TestExactFolds:
    def test_exact_sum(self):
        vals = [mpq(1, n * (n + 1)) for n in range(1, 50)]
        assert exact.exact_sum(vals) == mpq(49, 50) - mpq(1, 2) + mpq(1, 2)

    def test_exact_sum_order_insensitive(self):
        vals = [mpq(1, n) for n in range(1, 30)]
        assert exact.exact_sum(vals) == exact.exact_sum(reversed(vals))

    def test_bucket_fraction_sum(self):
        nums = [1, 1, 1]
        dens = [2, 3, 6]
        assert exact.bucket_fraction_sum(nums, dens) == mpq(1)
