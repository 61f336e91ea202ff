"""Exact rational scalars, intervals, and canonical interval sets.

Everything geometric in this package is built on `gmpy2.mpq`: normalized
arbitrary-precision fractions with exact total arithmetic. Floating point
enters only through the mu-measure (log of a ratio) and the grid numerics
in `farey.transfer`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union

import mpmath
from gmpy2 import mpq, mpz

__all__ = [
    "DEFAULT_MU_BITS",
    "CapacityError",
    "DomainError",
    "FareyError",
    "InfiniteMeasureError",
    "Interval",
    "IntervalSet",
    "NoReturnWithinCapError",
    "Rational",
    "RationalLike",
    "TerminalPointError",
    "bucket_fraction_sum",
    "exact_sum",
    "format_rational",
    "interval_lambda",
    "interval_mu",
    "parse_rational",
    "rational",
    "set_normalize",
]

Rational = mpq
RationalLike = Union[mpq, int, str, Fraction]

# Significand bits used for mu-values (logs). Well above double precision so
# high-precision identity checks (mu-additivity, invariance) have headroom.
DEFAULT_MU_BITS = 96


class FareyError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FareyError, ValueError):
    """Input outside the documented domain of an operation."""


class InfiniteMeasureError(FareyError, ValueError):
    """mu-measure requested for a set touching 0, where mu diverges."""


class CapacityError(FareyError, ValueError):
    """Request exceeds a configured materialization/depth/truncation bound."""


class TerminalPointError(FareyError, ValueError):
    """Continued-fraction step applied to a word whose image leaves (0,1]."""


class NoReturnWithinCapError(FareyError, RuntimeError):
    """Orbit did not re-enter the target set within the iteration cap."""


def rational(value: RationalLike, den: RationalLike | None = None) -> mpq:
    """Coerce to an exact rational. Accepts mpq, int, Fraction, "p/q" strings."""
    if den is not None:
        return mpq(value, den)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        # refuse silent binary-float noise; callers must be explicit
        raise DomainError(
            f"refusing float {value!r}; pass a string 'p/q', int, or Fraction"
        )
    return mpq(value)


def parse_rational(text: str) -> mpq:
    """Parse a "p/q" or "p" decimal string into an exact rational."""
    s = text.strip()
    try:
        if "/" in s:
            p, q = s.split("/", 1)
            return mpq(mpz(p.strip()), mpz(q.strip()))
        return mpq(mpz(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"invalid rational literal {text!r}") from exc


def format_rational(x: RationalLike) -> str:
    """Serialize a rational as "p/q" (or "p" when the denominator is 1)."""
    q = rational(x)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def bucket_fraction_sum(nums, dens) -> mpq:
    """Exact sum of p_i/q_i for int64 arrays (or sequences) of bounded size.

    Buckets numerators per denominator with np.bincount. All weights and
    partial sums must stay below 2^53 so float64 accumulation is exact;
    the caller-facing guard checks the conservative bound len * max_den.
    The final fold is one exact rational sum over distinct denominators.
    """
    import numpy as np

    nums = np.asarray(nums, dtype=np.int64)
    dens = np.asarray(dens, dtype=np.int64)
    if len(nums) == 0:
        return mpq(0)
    max_den = int(dens.max())
    if float(len(nums)) * max_den >= 2**53:
        raise CapacityError("bucketed fraction sum would overflow exact float64 range")
    acc = np.bincount(dens, weights=nums.astype(np.float64))
    return exact_sum(mpq(int(acc[q]), int(q)) for q in np.nonzero(acc)[0].tolist())


def exact_sum(values: Iterable[mpq]) -> mpq:
    """Sum rationals by balanced pairwise folding.

    Keeps intermediate denominators near the size of subproblem lcms rather
    than the running lcm of everything seen so far, which matters when adding
    2^20 terms with unrelated denominators.
    """
    vals = list(values)
    if not vals:
        return mpq(0)
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


@dataclass(frozen=True)
class Interval:
    """Closed rational subinterval [lo, hi] of [0, 1].

    Degenerate intervals (lo == hi) are allowed; they arise as inverse-branch
    images of degenerate inputs and carry measure 0.
    """

    lo: mpq
    hi: mpq

    def __post_init__(self):
        lo = rational(self.lo)
        hi = rational(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not (0 <= lo <= hi <= 1):
            raise DomainError(f"invalid interval [{lo}, {hi}]: need 0 <= lo <= hi <= 1")

    @property
    def length(self) -> mpq:
        return self.hi - self.lo

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: RationalLike) -> bool:
        x = rational(x)
        return self.lo <= x <= self.hi

    def __str__(self) -> str:
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"


def interval_lambda(iv: Interval) -> mpq:
    """Lebesgue length hi - lo, exact."""
    return iv.hi - iv.lo


def interval_mu(iv: Interval, bits: int = DEFAULT_MU_BITS) -> mpmath.mpf:
    """mu-measure log(hi/lo) at the given precision.

    mu is the density-1/x measure; it diverges at 0, so lo must be positive.
    """
    if iv.lo == 0:
        raise InfiniteMeasureError(f"mu({iv}) is undefined: interval touches 0")
    if bits < 64:
        raise DomainError("mu precision below 64 significand bits is not supported")
    with mpmath.workprec(bits):
        ratio = mpmath.mpf(iv.hi.numerator) * mpmath.mpf(iv.lo.denominator)
        ratio /= mpmath.mpf(iv.hi.denominator) * mpmath.mpf(iv.lo.numerator)
        return mpmath.log(ratio)


class IntervalSet:
    """Canonical finite disjoint union of closed intervals.

    Canonical form: sorted by lo, pairwise-disjoint interiors, and no two
    intervals sharing an endpoint (touching intervals are merged). Equality
    of two canonical sets is decidable exactly, which is what makes the
    cross-oracle set comparisons in this package meaningful.
    """

    __slots__ = ("_intervals",)

    def __init__(self, intervals: Iterable[Interval], _canonical: bool = False):
        ivs = tuple(intervals)
        if not _canonical:
            ivs = tuple(set_normalize(ivs))
        self._intervals = ivs

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return self._intervals

    def __len__(self) -> int:
        return len(self._intervals)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self._intervals)

    def __getitem__(self, i):
        return self._intervals[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self._intervals == other._intervals

    def __hash__(self) -> int:
        return hash(self._intervals)

    def __repr__(self) -> str:
        inner = ", ".join(str(iv) for iv in self._intervals)
        return f"IntervalSet({inner})"

    @property
    def total_lambda(self) -> mpq:
        return exact_sum(iv.length for iv in self._intervals)

    def total_mu(self, bits: int = DEFAULT_MU_BITS) -> mpmath.mpf:
        with mpmath.workprec(bits):
            return mpmath.fsum(interval_mu(iv, bits) for iv in self._intervals)

    def contains(self, x: RationalLike) -> bool:
        x = rational(x)
        lo, hi = 0, len(self._intervals) - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            iv = self._intervals[mid]
            if x < iv.lo:
                hi = mid - 1
            elif x > iv.hi:
                lo = mid + 1
            else:
                return True
        return False


def set_normalize(raw: Iterable[Interval]) -> IntervalSet:
    """Sort, absorb degenerates, and merge touching intervals.

    Positive-length interior overlap is rejected: merging overlapping inputs
    would silently change the total length, and every construction in this
    package is supposed to produce interior-disjoint pieces.
    """
    ivs = sorted(raw, key=lambda iv: (iv.lo, iv.hi))
    merged: list[Interval] = []
    for iv in ivs:
        if not merged:
            merged.append(iv)
            continue
        last = merged[-1]
        if iv.lo > last.hi:
            merged.append(iv)
        elif iv.lo == last.hi or (iv.lo >= last.lo and iv.hi <= last.hi and iv.is_degenerate):
            if iv.hi > last.hi:
                merged[-1] = Interval(last.lo, iv.hi)
        elif last.is_degenerate and last.lo == iv.lo:
            merged[-1] = iv
        else:
            raise DomainError(
                f"intervals {last} and {iv} overlap with positive length; "
                "refusing to merge"
            )
    return IntervalSet(merged, _canonical=True)
