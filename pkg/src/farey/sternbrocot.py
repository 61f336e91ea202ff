"""Stern-Brocot levels and the closed-form construction of sum-level sets.

Levels are stored densely as int64 numerator/denominator arrays, not as tree
nodes: generation is level-by-level mediant insertion and memory is the
binding constraint (level n holds 2^n + 1 fractions). Denominators at the
default cap (level 26) stay below 400000, far inside int64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from gmpy2 import mpq

from .exact import (
    CapacityError,
    DomainError,
    Interval,
    IntervalSet,
    Rational,
    bucket_fraction_sum,
)

__all__ = [
    "MAX_LEVEL",
    "MAX_SET_LEVEL",
    "SternBrocotLevel",
    "sb_generate",
    "sumlevel_intervals_sb",
    "sumlevel_lambda_sb",
    "unimodular_check",
]

# Full materialization bound: 2^26 + 1 fractions is ~1 GB of endpoint arrays
# in flight during construction; beyond that use the streaming preimage engine.
MAX_LEVEL = 26

# Bound for building IntervalSet objects (Python-object cost per interval).
MAX_SET_LEVEL = 20


@dataclass(frozen=True)
class SternBrocotLevel:
    """Level n of the mediant refinement of {0/1, 1/1}.

    Fractions are exposed positionally (1-based k, matching the usual
    indexing s_{n,k}/t_{n,k}) and as exact rationals on demand; the arrays
    themselves are the storage.
    """

    n: int
    nums: np.ndarray
    dens: np.ndarray

    def __len__(self) -> int:
        return len(self.nums)

    def fraction(self, k: int) -> Rational:
        """1-based entry s_{n,k}/t_{n,k}."""
        if not (1 <= k <= len(self.nums)):
            raise DomainError(f"index {k} outside 1..{len(self.nums)}")
        return mpq(int(self.nums[k - 1]), int(self.dens[k - 1]))

    def fractions(self) -> Iterator[Rational]:
        for p, q in zip(self.nums.tolist(), self.dens.tolist()):
            yield mpq(p, q)


def sb_generate(n: int, max_level: int = MAX_LEVEL) -> SternBrocotLevel:
    """Build level n by repeated mediant insertion from level 0 = (0/1, 1/1)."""
    if n < 0:
        raise DomainError(f"level must be >= 0, got {n}")
    if n > max_level:
        raise CapacityError(
            f"level {n} exceeds materialization bound {max_level}; "
            "use the streaming preimage engine for measures at this depth"
        )
    s = np.array([0, 1], dtype=np.int64)
    t = np.array([1, 1], dtype=np.int64)
    for _ in range(n):
        ns = np.empty(2 * len(s) - 1, dtype=np.int64)
        nt = np.empty_like(ns)
        ns[::2] = s
        nt[::2] = t
        ns[1::2] = s[:-1] + s[1:]
        nt[1::2] = t[:-1] + t[1:]
        s, t = ns, nt
    s.setflags(write=False)
    t.setflags(write=False)
    return SternBrocotLevel(n, s, t)


def unimodular_check(level: SternBrocotLevel) -> bool:
    """Exact neighbor test: r*q - p*s == 1 for all consecutive p/q < r/s."""
    p, q = level.nums[:-1], level.dens[:-1]
    r, s = level.nums[1:], level.dens[1:]
    # products stay < 2^63 for all levels within MAX_LEVEL
    return bool(np.all(r * q - p * s == 1))


def _interval_slices(level: SternBrocotLevel) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Endpoint arrays (lo_num, lo_den, hi_num, hi_den) of the level-n sum set.

    At level n >= 2 the set is the union over k = 1..2^(n-2) of the closed
    intervals with endpoints at positions 4k-2 and 4k (1-based).
    """
    n = level.n
    k = np.arange(1, 2 ** (n - 2) + 1)
    lo = 4 * k - 3  # 0-based position of entry 4k-2
    hi = 4 * k - 1
    return level.nums[lo], level.dens[lo], level.nums[hi], level.dens[hi]


def sumlevel_intervals_sb(n: int, max_level: int = MAX_SET_LEVEL) -> IntervalSet:
    """Closed-form level-n sum set as a canonical IntervalSet.

    n = 1 is the base interval [1/2, 1]; n >= 2 reads interval endpoints
    off the level-n Stern-Brocot sequence.
    """
    if n < 1:
        raise DomainError(f"level must be >= 1, got {n}")
    if n > max_level:
        raise CapacityError(
            f"materializing 2^{n-2} intervals exceeds set bound (level {max_level})"
        )
    if n == 1:
        return IntervalSet([Interval(mpq(1, 2), mpq(1))], _canonical=True)
    level = sb_generate(n)
    ln, ld, hn, hd = _interval_slices(level)
    ivs = [
        Interval(mpq(int(a), int(b)), mpq(int(c), int(d)))
        for a, b, c, d in zip(ln.tolist(), ld.tolist(), hn.tolist(), hd.tolist())
    ]
    # the construction is already sorted and disjoint; normalization is a
    # cheap paranoia pass that also asserts it
    return IntervalSet(ivs)


def sumlevel_lambda_sb(n: int, max_level: int = MAX_LEVEL) -> Rational:
    """Exact total length of the level-n sum set, without materializing intervals.

    Sums hi - lo over the 2^(n-2) closed intervals by bucketing numerators
    per denominator: all cross products fit float64 integers exactly at
    these levels, so np.bincount accumulation is exact, and the final fold
    is one exact rational sum over distinct denominators.
    """
    if n < 1:
        raise DomainError(f"level must be >= 1, got {n}")
    if n == 1:
        return mpq(1, 2)
    if n > max_level:
        raise CapacityError(f"level {n} exceeds bound {max_level}")
    level = sb_generate(n)
    ln, ld, hn, hd = _interval_slices(level)
    return bucket_fraction_sum(hn, hd) - bucket_fraction_sum(ln, ld)
