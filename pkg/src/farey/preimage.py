"""Streaming enumeration of inverse-branch preimages F^-n[alpha, beta].

The 2^n leaves of the depth-n branch tree are never materialized in measure
mode: a depth-first walk over integer endpoint 4-tuples accumulates lengths
with O(n) memory. Endpoint arithmetic needs no gcd reduction because the
inverse branches map p/q to p/(p+q) and q/(p+q), which preserves lowest
terms along every branch.

Parallel runs split the tree at a fixed prefix depth and reduce per-prefix
partial results in a fixed order. Exact rational addition is associative, and
float partials are combined with math.fsum (correctly rounded), so results
are bit-identical for every worker count.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from gmpy2 import mpq

from .exact import (
    CapacityError,
    DomainError,
    Interval,
    IntervalSet,
    Rational,
    bucket_fraction_sum,
    exact_sum,
    rational,
)

__all__ = [
    "MAX_EXACT_DEPTH",
    "MAX_SET_DEPTH",
    "MeasureReport",
    "PreimageQuery",
    "exact_level_measures",
    "integrate_over_preimage",
    "preimage_measure",
    "preimage_set",
    "sumlevel_intervals_cf",
]

MAX_SET_DEPTH = 18       # 2^18 interval objects; beyond this stream measures only
MAX_EXACT_DEPTH = 32     # hard sanity cap on streaming enumeration (2^32 leaves)
MAX_LEVEL_ARRAY_DEPTH = 23   # int64 level arrays: ~400 MB peak at depth 23
DEFAULT_PREFIX_DEPTH = 8     # parallel work-split granularity (256 tasks)

Mode = str  # "exact" | "float64"


@dataclass(frozen=True)
class PreimageQuery:
    """A preimage request: base interval, tree depth, arithmetic mode, output kind."""

    base: Interval
    depth: int
    mode: Mode = "exact"
    emit: str = "measure"

    def __post_init__(self):
        if self.depth < 0:
            raise DomainError(f"depth must be >= 0, got {self.depth}")
        if self.mode not in ("exact", "float64"):
            raise DomainError(f"mode must be 'exact' or 'float64', got {self.mode!r}")
        if self.emit not in ("measure", "set"):
            raise DomainError(f"emit must be 'measure' or 'set', got {self.emit!r}")


@dataclass(frozen=True)
class MeasureReport:
    """Measures of one preimage set.

    lambda_total is an exact rational in exact mode, a float in float64 mode.
    float_error_bound is the documented a-posteriori bound
    (leaf_count + 4) * 2^-52 * lambda_total: each leaf length costs one
    correctly rounded division of exact integers, and fsum of positive terms
    is correctly rounded, so the bound is generous.
    """

    lambda_total: Union[Rational, float]
    mu_total: float | None
    interval_count: int
    depth: int
    mode: Mode
    float_error_bound: float | None = None


def _base_tuple(base: Interval) -> tuple[int, int, int, int]:
    lo, hi = rational(base.lo), rational(base.hi)
    return (int(lo.numerator), int(lo.denominator), int(hi.numerator), int(hi.denominator))


def _prefix_tasks(base: Interval, depth: int, prefix_depth: int):
    """Expand the branch tree to the prefix depth; returns (tuples, remaining)."""
    pd = min(prefix_depth, depth)
    tuples = [_base_tuple(base)]
    for _ in range(pd):
        nxt = []
        for a, b, c, e in tuples:
            nxt.append((a, a + b, c, c + e))       # left branch
            nxt.append((e, c + e, b, a + b))       # right branch (orientation flipped)
        tuples = nxt
    return tuples, depth - pd


def _walk_exact(task):
    """DFS one subtree; returns (exact partial length, mu partial, leaf count).

    Binary-carry accumulation keeps rational partial sums balanced (the
    running denominators stay near subproblem size instead of the global
    lcm), which is what makes depth-23 enumeration run in seconds.
    """
    a0, b0, c0, e0, depth, want_mu = task
    partials: list[mpq] = []
    counts: list[int] = []
    mu_vals: list[float] = [] if want_mu else None
    leaves = 0
    stack = [(depth, a0, b0, c0, e0)]
    while stack:
        d, a, b, c, e = stack.pop()
        if d:
            d -= 1
            stack.append((d, e, c + e, b, a + b))
            stack.append((d, a, a + b, c, c + e))
        else:
            leaves += 1
            v = mpq(c * b - a * e, b * e)
            k = 1
            while counts and counts[-1] == k:
                counts.pop()
                v = v + partials.pop()
                k += 1
            partials.append(v)
            counts.append(k)
            if want_mu:
                mu_vals.append(math.log((c * b) / (a * e)))
    total = mpq(0)
    for v in reversed(partials):
        total += v
    mu = math.fsum(mu_vals) if want_mu else None
    return total, mu, leaves


def _walk_float(task):
    """Same walk in float64; leaf length is one rounded division of exact ints."""
    a0, b0, c0, e0, depth, want_mu = task
    vals: list[float] = []
    mu_vals: list[float] = [] if want_mu else None
    leaves = 0
    stack = [(depth, a0, b0, c0, e0)]
    while stack:
        d, a, b, c, e = stack.pop()
        if d:
            d -= 1
            stack.append((d, e, c + e, b, a + b))
            stack.append((d, a, a + b, c, c + e))
        else:
            leaves += 1
            vals.append((c * b - a * e) / (b * e))
            if want_mu:
                mu_vals.append(math.log((c * b) / (a * e)))
    mu = math.fsum(mu_vals) if want_mu else None
    return math.fsum(vals), mu, leaves


def preimage_measure(
    base: Interval,
    depth: int,
    mode: Mode | None = None,
    workers: int | None = None,
    compute_mu: bool = True,
    prefix_depth: int = DEFAULT_PREFIX_DEPTH,
) -> MeasureReport:
    """Measures of F^-depth(base) by streaming depth-first enumeration.

    mode None selects exact arithmetic up to depth 24 and float64 beyond.
    workers > 1 distributes prefix subtrees over processes; results are
    bit-identical to the serial run (see module docstring).
    """
    if mode is None:
        mode = "exact" if depth <= 24 else "float64"
    q = PreimageQuery(base, depth, mode, "measure")
    if depth > MAX_EXACT_DEPTH:
        raise CapacityError(f"depth {depth} exceeds enumeration cap {MAX_EXACT_DEPTH}")
    want_mu = compute_mu and base.lo > 0
    tasks_tuples, remaining = _prefix_tasks(base, depth, prefix_depth)
    tasks = [(a, b, c, e, remaining, want_mu) for (a, b, c, e) in tasks_tuples]
    walker = _walk_exact if mode == "exact" else _walk_float

    if workers is not None and workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(walker, tasks, chunksize=max(1, len(tasks) // (4 * workers)))
    else:
        results = [walker(t) for t in tasks]

    count = sum(r[2] for r in results)
    assert count == 2**depth
    mu_total = math.fsum(r[1] for r in results) if want_mu else None
    if mode == "exact":
        lam = exact_sum(r[0] for r in results)
        return MeasureReport(lam, mu_total, count, depth, mode)
    lam = math.fsum(r[0] for r in results)
    bound = (count + 4) * 2.0**-52 * abs(lam)
    return MeasureReport(lam, mu_total, count, depth, mode, float_error_bound=bound)


def _sorted_leaf_tuples(base: Interval, depth: int) -> list[tuple[int, int, int, int]]:
    """All depth-n leaves in ascending order.

    Sorted emission uses the outer-composition structure: the depth-n leaves
    are the increasing left-branch images of the depth-(n-1) leaves followed
    by the orientation-reversed right-branch images of the same list.
    """
    cur = [_base_tuple(base)]
    for _ in range(depth):
        left = [(a, a + b, c, c + e) for (a, b, c, e) in cur]
        right = [(e, c + e, b, a + b) for (a, b, c, e) in reversed(cur)]
        cur = left + right
    return cur


def preimage_set(base: Interval, depth: int, max_depth: int = MAX_SET_DEPTH) -> IntervalSet:
    """F^-depth(base) as a canonical IntervalSet (touching leaves merged)."""
    if depth > max_depth:
        raise CapacityError(
            f"materializing 2^{depth} intervals exceeds set bound (depth {max_depth}); "
            "use preimage_measure for measures at this depth"
        )
    leaves = _sorted_leaf_tuples(base, depth)
    ivs = [Interval(mpq(a, b), mpq(c, e)) for (a, b, c, e) in leaves]
    return IntervalSet(ivs)


def exact_level_measures(
    base: Interval, max_depth: int, cap: int = MAX_LEVEL_ARRAY_DEPTH
) -> list[Rational]:
    """Exact lambda(F^-d(base)) for every d = 0..max_depth in one pass.

    Vectorized level pullback on int64 endpoint arrays with exact per-level
    bucket summation. Much faster than 2^d streaming walks when the whole
    measure sequence is wanted (the monotonicity checks need d up to 22).
    """
    if max_depth > cap:
        raise CapacityError(f"level arrays at depth {max_depth} exceed cap {cap}")
    a, b, c, e = (np.array([v], dtype=np.int64) for v in _base_tuple(base))
    out = [bucket_fraction_sum(c, e) - bucket_fraction_sum(a, b)]
    for _ in range(max_depth):
        max_den = max(int(b.max()), int(e.max()))
        if 2 * max_den > 2**24 or float(2 * len(a)) * 2 * max_den >= 2**53:
            raise CapacityError("endpoint denominators exceed the exact bucket range")
        a, b, c, e = (
            np.concatenate([a, e]),
            np.concatenate([a + b, c + e]),
            np.concatenate([c, b]),
            np.concatenate([c + e, a + b]),
        )
        out.append(bucket_fraction_sum(c, e) - bucket_fraction_sum(a, b))
    return out


def integrate_over_preimage(
    base: Interval,
    depth: int,
    f: Union[Sequence, Callable[[np.ndarray], np.ndarray]],
    order: int = 8,
    max_depth: int = 24,
) -> float:
    """Sum of integrals of f over the leaves of F^-depth(base), in dlambda.

    f given as a coefficient sequence (c0, c1, ...) is a polynomial,
    integrated exactly per leaf via its antiderivative and summed as
    rationals; a callable f is integrated per leaf with fixed-order
    Gauss-Legendre quadrature (deterministic node set and order).
    """
    if depth > max_depth:
        raise CapacityError(f"depth {depth} exceeds integration cap {max_depth}")
    leaves = _sorted_leaf_tuples(base, depth)

    if not callable(f):
        coeffs = [rational(ci) for ci in f]
        terms = []
        for a, b, c, e in leaves:
            lo = mpq(a, b)
            hi = mpq(c, e)
            acc = mpq(0)
            lo_pow = mpq(1)
            hi_pow = mpq(1)
            for k, ck in enumerate(coeffs):
                lo_pow *= lo
                hi_pow *= hi
                acc += ck * (hi_pow - lo_pow) / (k + 1)
            terms.append(acc)
        return float(exact_sum(terms))

    nodes, weights = np.polynomial.legendre.leggauss(order)
    vals = []
    for a, b, c, e in leaves:
        lo = a / b
        hi = c / e
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        if half == 0.0:
            continue
        y = mid + half * nodes
        vals.append(half * float(np.dot(weights, np.asarray(f(y), dtype=np.float64))))
    return math.fsum(vals)


def sumlevel_intervals_cf(n: int, max_n: int = MAX_SET_DEPTH + 2) -> IntervalSet:
    """Level-n sum set as a union of continued-fraction cylinder intervals.

    Third independent construction: for every composition (a_1, ..., a_k) of
    n, the cylinder of words starting with those digits is the interval
    between the convergent p_k/q_k and the mediant
    (p_k + p_{k-1})/(q_k + q_{k-1}), orientation depending on parity.
    """
    if n < 1:
        raise DomainError(f"level must be >= 1, got {n}")
    if n > max_n:
        raise CapacityError(f"2^{n-1} compositions exceed bound (n <= {max_n})")
    ivs: list[Interval] = []

    def emit(p_prev: int, q_prev: int, p: int, q: int):
        pm, qm = p + p_prev, q + q_prev
        # cross-compare p/q vs pm/qm exactly in ints
        if p * qm <= pm * q:
            ivs.append(Interval(mpq(p, q), mpq(pm, qm)))
        else:
            ivs.append(Interval(mpq(pm, qm), mpq(p, q)))

    def rec(remaining: int, p_prev: int, q_prev: int, p: int, q: int):
        for digit in range(1, remaining + 1):
            pn = digit * p + p_prev
            qn = digit * q + q_prev
            if digit == remaining:
                emit(p, q, pn, qn)
            else:
                rec(remaining - digit, p, q, pn, qn)

    # convergent seeds p_0 = 0, p_-1 = 1, q_0 = 1, q_-1 = 0
    rec(n, 1, 0, 0, 1)
    return IntervalSet(ivs)
