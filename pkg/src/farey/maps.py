"""The Farey map, its inverse branches, continued-fraction coding, and
first-return times.

Branch convention: the boundary point 1/2 belongs to the left branch, so
F(x) = x/(1-x) on [0, 1/2] and F(x) = (1-x)/x on (1/2, 1]. This only moves
measure-zero points but it is applied consistently across the package (the
membership oracle, return times, and the set constructions all agree on it).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator

from gmpy2 import mpq

from .exact import (
    DomainError,
    Interval,
    NoReturnWithinCapError,
    Rational,
    RationalLike,
    TerminalPointError,
    rational,
)

__all__ = [
    "Branch",
    "CFWord",
    "DEFAULT_RETURN_CAP",
    "cf_decode",
    "cf_encode",
    "cf_partial_sums",
    "farey_cf_step",
    "farey_forward",
    "farey_orbit",
    "gauss_forward",
    "inverse_branch_images",
    "psi_left",
    "psi_right",
    "return_cell",
    "return_cells",
    "return_time",
    "sum_level_membership",
]

DEFAULT_RETURN_CAP = 10**6

HALF = mpq(1, 2)
ONE = mpq(1)


def farey_forward(x: RationalLike) -> Rational:
    """Apply the map: x/(1-x) for x <= 1/2, (1-x)/x for x > 1/2. Exact."""
    x = rational(x)
    if not (0 <= x <= 1):
        raise DomainError(f"farey_forward: {x} outside [0, 1]")
    if x <= HALF:
        return x / (1 - x)
    return (1 - x) / x


def psi_left(x: RationalLike) -> Rational:
    """Left inverse branch x -> x/(1+x); image is [0, 1/2]."""
    x = rational(x)
    return x / (1 + x)


def psi_right(x: RationalLike) -> Rational:
    """Right inverse branch x -> 1/(1+x); image is [1/2, 1]. Orientation-reversing."""
    x = rational(x)
    return 1 / (1 + x)


class Branch(enum.Enum):
    """Label for the two inverse branches."""

    LEFT = "left"
    RIGHT = "right"

    def inverse(self, x: RationalLike) -> Rational:
        return psi_left(x) if self is Branch.LEFT else psi_right(x)

    def inverse_image(self, iv: Interval) -> Interval:
        if self is Branch.LEFT:
            return Interval(psi_left(iv.lo), psi_left(iv.hi))
        # psi_right reverses orientation: re-normalize so lo <= hi
        return Interval(psi_right(iv.hi), psi_right(iv.lo))


def inverse_branch_images(iv: Interval) -> tuple[Interval, Interval]:
    """Both inverse-branch images; their union is the full preimage F^-1(iv)."""
    return Branch.LEFT.inverse_image(iv), Branch.RIGHT.inverse_image(iv)


def gauss_forward(x: RationalLike) -> Rational:
    """Gauss map {1/x}, the induced map of the Farey map on [1/2,1].

    Cross-check utility only. x = 0 returns 0 by convention.
    """
    x = rational(x)
    if x < 0 or x > 1:
        raise DomainError(f"gauss_forward: {x} outside [0, 1]")
    if x == 0:
        return mpq(0)
    inv = 1 / x
    return inv - (inv.numerator // inv.denominator)


@dataclass(frozen=True)
class CFWord:
    """Finite continued-fraction digit word (a_1, ..., a_k), all digits >= 1.

    Encodes the rational [a_1, ..., a_k] = 1/(a_1 + 1/(a_2 + ...)) in (0, 1].
    Every rational in (0, 1) has exactly two words: (..., a_k) with a_k >= 2
    and (..., a_k - 1, 1); x = 1 has the single word (1,).
    """

    digits: tuple[int, ...]

    def __post_init__(self):
        digits = tuple(int(a) for a in self.digits)
        object.__setattr__(self, "digits", digits)
        if not digits:
            raise DomainError("CFWord needs at least one digit")
        if any(a < 1 for a in digits):
            raise DomainError(f"CF digits must be >= 1, got {digits}")

    def __len__(self) -> int:
        return len(self.digits)

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.digits) + "]"

    @classmethod
    def parse(cls, text: str) -> "CFWord":
        s = text.strip()
        if s.startswith("[") and s.endswith("]"):
            s = s[1:-1]
        try:
            return cls(tuple(int(t) for t in s.split(",") if t.strip()))
        except ValueError as exc:
            raise DomainError(f"invalid CF word {text!r}") from exc

    @property
    def is_canonical(self) -> bool:
        return self.digits == (1,) or self.digits[-1] >= 2

    def alternate(self) -> "CFWord | None":
        """The other word for the same value, or None for x = 1."""
        d = self.digits
        if d == (1,):
            return None
        if d[-1] >= 2:
            return CFWord(d[:-1] + (d[-1] - 1, 1))
        # ends in 1 and has length >= 2: fold the 1 into the previous digit
        return CFWord(d[:-2] + (d[-2] + 1,))


def cf_encode(x: RationalLike) -> CFWord:
    """Canonical CF word of a rational in (0, 1]: last digit >= 2, except x=1 -> [1].

    Plain Euclidean algorithm; it terminates with final quotient >= 2 for
    every p/q in (0, 1), and gives (1,) for 1.
    """
    x = rational(x)
    if not (0 < x <= 1):
        raise DomainError(f"cf_encode: {x} outside (0, 1]")
    p, q = int(x.numerator), int(x.denominator)
    digits = []
    while p:
        a, r = divmod(q, p)
        digits.append(a)
        q, p = p, r
    return CFWord(tuple(digits))


def cf_decode(word: CFWord) -> Rational:
    """Exact value of a CF word, folding from the right."""
    t = mpq(0)
    for a in reversed(word.digits):
        t = 1 / (a + t)
    return t


def farey_cf_step(word: CFWord) -> CFWord:
    """Action of the map on CF words: decrement the head if a_1 >= 2, else drop it.

    Conjugate to farey_forward under cf_decode. The word (1,) codes x = 1,
    which maps to 0, outside the coded domain.
    """
    d = word.digits
    if d[0] >= 2:
        return CFWord((d[0] - 1,) + d[1:])
    if len(d) == 1:
        raise TerminalPointError("word [1] codes x=1, whose image 0 has no CF word")
    return CFWord(d[1:])


def cf_partial_sums(x: RationalLike) -> frozenset[int]:
    """All partial digit sums attainable from either CF word of x.

    For canonical word (a_1,...,a_k) the sums are a_1, a_1+a_2, ...; the
    alternate word (..., a_k - 1, 1) contributes exactly one extra value,
    total - 1 (when the last canonical digit is >= 2).
    """
    word = cf_encode(x)
    sums = set()
    acc = 0
    for a in word.digits:
        acc += a
        sums.add(acc)
    if word.digits[-1] >= 2:
        sums.add(acc - 1)
    return frozenset(sums)


def sum_level_membership(x: RationalLike, n: int) -> bool:
    """Whether x lies in the level-n sum set (closed intervals convention).

    True iff some partial digit sum of either CF representation of x equals
    n. Agrees with the dynamical characterization F^(n-1)(x) in [1/2, 1],
    which is a closed condition. Boundary rationals sit in two consecutive
    cylinders, hence the two-representation rule.
    """
    if n < 1:
        raise DomainError(f"level index must be >= 1, got {n}")
    return n in cf_partial_sums(x)


def farey_orbit(x: RationalLike, steps: int) -> Iterator[Rational]:
    """Yield x, F(x), ..., F^steps(x), exactly."""
    x = rational(x)
    yield x
    for _ in range(steps):
        x = farey_forward(x)
        yield x


def return_time(x: RationalLike, N: int, cap: int = DEFAULT_RETURN_CAP) -> int:
    """First-return time of x to A = [1/N, 1]: min{n >= 1 : F^n(x) in A}.

    Computed by exact iteration. Orbits can leave A for a long excursion
    toward 0 (and x = 1 never returns at all, it hits the fixed point 0),
    so a cap is mandatory.
    """
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    x = rational(x)
    lo = mpq(1, N)
    if not (lo <= x <= 1):
        raise DomainError(f"return_time: {x} outside [{lo}, 1]")
    y = x
    for n in range(1, cap + 1):
        y = farey_forward(y)
        if lo <= y <= 1:
            return n
    raise NoReturnWithinCapError(f"orbit of {x} did not return to [1/{N}, 1] in {cap} steps")


def return_cell(N: int, m: int) -> Interval:
    """Closed interval of points of A = [1/N, 1] with first-return time m.

    m = 1: [1/N, N/(N+1)]. m >= 2: [(N+m-2)/(N+m-1), (N+m-1)/(N+m)]; the
    orbit leaves A, climbs the left branch, and re-enters after m-1 more
    steps. Cells share endpoints (the return time is right-continuous on
    the half-open versions); for quadrature the shared endpoints are
    measure-zero and harmless.
    """
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if m < 1:
        raise DomainError(f"return time must be >= 1, got {m}")
    if m == 1:
        return Interval(mpq(1, N), mpq(N, N + 1))
    return Interval(mpq(N + m - 2, N + m - 1), mpq(N + m - 1, N + m))


def return_cells(N: int, m_max: int) -> list[Interval]:
    """Return cells for m = 1..m_max; their union exhausts [1/N, 1) as m grows."""
    return [return_cell(N, m) for m in range(1, m_max + 1)]
