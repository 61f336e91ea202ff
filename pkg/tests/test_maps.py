"""Forward map, inverse branches, digit codec, and first-return structure."""

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from farey import exact, maps

# proper fractions with bounded denominators (orbit lengths are digit sums,
# so unbounded denominators would make the orbit cases arbitrarily long)
fractions = st.fractions(min_value=0, max_value=1, max_denominator=200)


def q(fr):
    return mpq(fr.numerator, fr.denominator)


class TestForwardMap:
    def test_left_branch(self):
        # x <= 1/2: x / (1 - x)
        assert maps.farey_forward(mpq(2, 5)) == mpq(2, 3)
        assert maps.farey_forward(mpq(1, 2)) == mpq(1)

    def test_right_branch(self):
        # x > 1/2: (1 - x) / x
        assert maps.farey_forward(mpq(3, 5)) == mpq(2, 3)
        assert maps.farey_forward(mpq(1)) == mpq(0)

    def test_fixed_point(self):
        assert maps.farey_forward(mpq(0)) == mpq(0)

    def test_domain(self):
        with pytest.raises(exact.DomainError):
            maps.farey_forward(mpq(3, 2))

    @given(fractions)
    def test_branch_formulas(self, fr):
        x = q(fr)
        want = x / (1 - x) if x <= mpq(1, 2) else (1 - x) / x
        assert maps.farey_forward(x) == want

    @given(fractions)
    def test_orbit_hits_zero(self, fr):
        # rationals are eventually fixed: the orbit reaches 0 in
        # sum-of-CF-digits steps
        x = q(fr)
        steps = sum(maps.cf_encode(x).digits) if 0 < x < 1 else 1
        orbit = list(maps.farey_orbit(x, steps))
        assert orbit[0] == x
        assert orbit[-1] == 0


class TestInverseBranches:
    @given(fractions)
    def test_psi_are_sections(self, fr):
        x = q(fr)
        if x == 0:
            return
        assert maps.farey_forward(maps.psi_left(x)) == x
        assert maps.farey_forward(maps.psi_right(x)) == x

    @given(fractions)
    def test_psi_ranges(self, fr):
        x = q(fr)
        if x == 0:
            return
        assert maps.psi_left(x) <= mpq(1, 2) <= maps.psi_right(x)

    def test_interval_pullback(self):
        iv = exact.Interval(mpq(1, 2), mpq(1))
        left, right = maps.inverse_branch_images(iv)
        assert left == exact.Interval(mpq(1, 3), mpq(1, 2))
        assert right == exact.Interval(mpq(1, 2), mpq(2, 3))


class TestDigitCodec:
    def test_known_word(self):
        assert maps.cf_encode(mpq(7, 19)).digits == (2, 1, 2, 2)
        assert maps.cf_decode(maps.CFWord((2, 1, 2, 2))) == mpq(7, 19)
        assert maps.CFWord.parse("[2,1,2,2]") == maps.CFWord((2, 1, 2, 2))

    @given(fractions)
    def test_roundtrip(self, fr):
        x = q(fr)
        if not (0 < x < 1):
            return
        assert maps.cf_decode(maps.cf_encode(x)) == x

    def test_alternate_word_same_value(self):
        # [2,1,2,2] and [2,1,2,1,1] denote the same rational; only the
        # canonical form (last digit >= 2) comes out of encode
        alt = maps.CFWord((2, 1, 2, 2)).alternate()
        assert alt.digits == (2, 1, 2, 1, 1)
        assert maps.cf_decode(alt) == mpq(7, 19)
        assert not alt.is_canonical
        assert maps.CFWord((1,)).alternate() is None

    @given(fractions)
    def test_partial_sums_are_membership_levels(self, fr):
        x = q(fr)
        if not (0 < x < 1):
            return
        sums = maps.cf_partial_sums(x)
        for n in range(1, max(sums) + 2):
            assert maps.sum_level_membership(x, n) == (n in sums)

    def test_one_step_shifts_digits(self):
        # applying the map once decrements the leading digit (or drops it)
        w = maps.cf_encode(mpq(7, 19))
        stepped = maps.farey_cf_step(w)
        assert maps.cf_decode(stepped) == maps.farey_forward(mpq(7, 19))


class TestGaussMap:
    @given(fractions)
    def test_gauss_is_induced_map(self, fr):
        # G(x) equals the first entry of the Farey orbit back in (1/2, 1]
        # after one full digit block, conjugated by x -> 1/(1+x); concretely
        # G(p/q) = {q/p}
        x = q(fr)
        if x == 0:
            return
        want = (1 / x) - (1 / x).numerator // (1 / x).denominator
        assert maps.gauss_forward(x) == want

    def test_zero_is_fixed(self):
        assert maps.gauss_forward(mpq(0)) == 0

    def test_terminal_word_step(self):
        with pytest.raises(exact.TerminalPointError):
            maps.farey_cf_step(maps.CFWord((1,)))


class TestReturnStructure:
    def test_return_cells_partition(self):
        # cells [B_1 .. B_m] tile [1/N, 1) from the left endpoint up
        N = 3
        cells = maps.return_cells(N, 6)
        assert cells[0].lo == mpq(1, N)
        for a, b in zip(cells, cells[1:]):
            assert a.hi == b.lo

    def test_return_cell_matches_return_time(self):
        for N in (2, 3, 5):
            for m in range(1, 8):
                cell = maps.return_cell(N, m)
                mid = (cell.lo + cell.hi) / 2
                assert maps.return_time(mid, N) == m

    def test_return_time_examples(self):
        assert maps.return_time(mpq(3, 5), 2) == 1
        assert maps.return_time(mpq(4, 5), 2) == 3

    def test_no_return_cap(self):
        # points near 1 excurse toward 0 for ~1/(1-x) steps first
        with pytest.raises(exact.NoReturnWithinCapError):
            maps.return_time(mpq(999, 1000), 2, cap=10)

    def test_domain_check(self):
        with pytest.raises(exact.DomainError):
            maps.return_time(mpq(1, 10), 2)
