"""Mediant refinement levels and the alternating-gap level measures."""

import pytest
from gmpy2 import mpq

from farey import exact, sternbrocot

# first five level measures, frozen; also derived independently in
# test_acceptance via the other two constructions
FIRST_FIVE = [mpq(1, 2), mpq(1, 3), mpq(3, 10), mpq(39, 140), mpq(1129, 4290)]


class TestGeneration:
    def test_level_sizes(self):
        for n in range(0, 8):
            lvl = sternbrocot.sb_generate(n)
            assert len(lvl.nums) == 2**n + 1

    def test_level_zero(self):
        lvl = sternbrocot.sb_generate(0)
        assert list(lvl.fractions()) == [mpq(0), mpq(1)]

    def test_mediant_construction(self):
        # each refinement inserts (p+r)/(q+s) between neighbors p/q, r/s
        prev = sternbrocot.sb_generate(4)
        cur = sternbrocot.sb_generate(5)
        pf, cf = list(prev.fractions()), list(cur.fractions())
        assert cf[::2] == pf
        for i in range(len(pf) - 1):
            med = mpq(
                pf[i].numerator + pf[i + 1].numerator,
                pf[i].denominator + pf[i + 1].denominator,
            )
            assert cf[2 * i + 1] == med

    def test_sorted_strictly(self):
        fr = list(sternbrocot.sb_generate(6).fractions())
        assert all(a < b for a, b in zip(fr, fr[1:]))

    def test_unimodular(self):
        for n in range(1, 12):
            assert sternbrocot.unimodular_check(sternbrocot.sb_generate(n))

    def test_fraction_accessor(self):
        # 1-based: entry 1 is the left endpoint 0/1
        lvl = sternbrocot.sb_generate(3)
        assert lvl.fraction(1) == mpq(0)
        assert lvl.fraction(2) == mpq(1, 4)
        with pytest.raises(exact.DomainError):
            lvl.fraction(0)

    def test_capacity(self):
        with pytest.raises(exact.CapacityError):
            sternbrocot.sb_generate(sternbrocot.MAX_LEVEL + 1)


class TestLevelMeasures:
    def test_first_five(self):
        for n, want in enumerate(FIRST_FIVE, start=1):
            assert sternbrocot.sumlevel_lambda_sb(n) == want

    def test_measure_equals_interval_sum(self):
        for n in range(1, 10):
            ivs = sternbrocot.sumlevel_intervals_sb(n)
            assert ivs.total_lambda == sternbrocot.sumlevel_lambda_sb(n)

    def test_intervals_inside_unit(self):
        ivs = sternbrocot.sumlevel_intervals_sb(7)
        for iv in ivs:
            assert 0 < iv.lo < iv.hi <= 1

    def test_interval_count_doubles(self):
        # levels 1 and 2 are single intervals; each later level doubles
        for n in range(1, 9):
            want = 1 if n <= 2 else 2 ** (n - 2)
            assert len(list(sternbrocot.sumlevel_intervals_sb(n))) == want

    def test_decreasing(self):
        vals = [sternbrocot.sumlevel_lambda_sb(n) for n in range(1, 16)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_set_capacity(self):
        with pytest.raises(exact.CapacityError):
            sternbrocot.sumlevel_intervals_sb(sternbrocot.MAX_SET_LEVEL + 2)
