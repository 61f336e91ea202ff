"""Renewal-theoretic series, the log-kernel constant, identity checks, and
effective-law fit reports built on the level-measure sequences.

Everything here reduces to a handful of one-dimensional series and
quadratures; evaluations at different grid points are independent of each
other and share the underlying level-measure sequences read-only (one
GridContext computes each sequence once).

Sums use math.fsum throughout: correctly rounded independent of order, so
results are bit-reproducible and the algebraic-identity checks hold to a
few ulp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .exact import CapacityError, DomainError, FareyError, RationalLike, rational
from .maps import return_cell, return_time
from .transfer import (
    DEFAULT_SPLICE,
    GridContext,
    LevelMeasureSeries,
    get_default_context,
    get_laws_context,
    laplace_operator_sum,
)

__all__ = [
    "EULER_GAMMA",
    "FitReport",
    "IdentityReport",
    "KernelWeights",
    "VERDICT_RULE",
    "convolution_telescope_gap",
    "growth_verdict",
    "interval_law_fit",
    "laplace_law_fit",
    "log_kernel_constant",
    "log_kernel_constant_pieces",
    "partial_sum_law_fit",
    "remainder_scaled",
    "renewal_identity_check",
    "renewal_identity_gap",
    "renewal_lambda_deviation",
    "renewal_lambda_integral",
    "renewal_lambda_series",
    "renewal_mu_deviation",
    "renewal_mu_integral",
    "renewal_mu_series",
]

EULER_GAMMA = 0.5772156649015329

VERDICT_RULE = (
    "growing iff the scaled errors strictly increase across the whole grid, "
    "last/first > 1.5, and the increments do not decelerate "
    "(last increment >= half the first); else bounded"
)


def growth_verdict(scaled: Sequence[float]) -> str:
    """Trend call for a short sequence of scaled errors across decades.

    A saturating-but-increasing profile (the expected shape when the true
    error is O(1) with a slowly dying transient) must read as bounded, so
    plain monotonicity is not enough: genuine growth also keeps its
    increments up, while a transient's increments collapse between decades.
    See VERDICT_RULE.
    """
    s = [float(v) for v in scaled]
    if len(s) < 2 or s[0] <= 0:
        return "bounded"
    if not all(b > a for a, b in zip(s, s[1:])) or s[-1] <= 1.5 * s[0]:
        return "bounded"
    if len(s) >= 3:
        d = [b - a for a, b in zip(s, s[1:])]
        if d[-1] < 0.5 * d[0]:
            return "bounded"
    return "growing"


# -- kernel ------------------------------------------------------------------


@dataclass(frozen=True)
class KernelWeights:
    """The log kernel for base parameter N: weight log N at lag 0, then
    log((n+N)/(n+N-1)); partial sums telescope to log(m+N)."""

    N: int

    def __post_init__(self):
        if self.N < 2:
            raise DomainError(f"kernel base must be >= 2, got {self.N}")

    def ell(self, n: int) -> float:
        if n < 0:
            raise DomainError(f"kernel lag must be >= 0, got {n}")
        if n == 0:
            return math.log(self.N)
        return math.log1p(1.0 / (n + self.N - 1))

    def prefix_sum(self, m: int) -> float:
        """Closed form of sum(ell(0..m)) by telescoping."""
        return math.log(m + self.N)


def log_kernel_constant_pieces() -> tuple[float, float]:
    """The two integral pieces of the kernel constant, by adaptive
    quadrature to abs tol 1e-12: integral of (e^-t - 1)/t over (0,1) and
    of e^-t / t over (1, inf)."""
    from scipy.integrate import quad

    p1, _ = quad(lambda t: math.expm1(-t) / t if t > 0 else -1.0, 0.0, 1.0,
                 epsabs=1e-12, epsrel=1e-12)
    p2, _ = quad(lambda t: math.exp(-t) / t, 1.0, np.inf, epsabs=1e-12, epsrel=1e-12)
    return p1, p2


def log_kernel_constant() -> float:
    """The additive constant in the mu-side renewal asymptotics
    (equals minus the Euler-Mascheroni constant; cross-checked in tests)."""
    p1, p2 = log_kernel_constant_pieces()
    return p1 + p2


# -- renewal series and their integral representations ------------------------


def _default_truncation(sigma: float) -> int:
    return max(int(math.ceil(20.0 * sigma)), 1000)


def _check_sigma(sigma: float):
    if not (sigma > 0) or not math.isfinite(sigma):
        raise DomainError(f"sigma must be finite and > 0, got {sigma}")


def _check_N(N: int):
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")


def renewal_lambda_series(sigma: float, N: int, K: int | None = None) -> float:
    """(N-1)/N + sum_{n>=1} e^(-n/sigma) / ((n+N)(n+N-1)), truncated with a
    geometric tail below e^-20. Tends to 1 as sigma grows, to (N-1)/N as
    sigma -> 0."""
    _check_sigma(sigma)
    _check_N(N)
    K = _default_truncation(sigma) if K is None else K
    terms = [(N - 1) / N]
    terms += [math.exp(-n / sigma) / ((n + N) * (n + N - 1)) for n in range(1, K + 1)]
    return math.fsum(terms)


def renewal_lambda_integral(sigma: float, N: int, K: int | None = None) -> float:
    """Independent route to the same quantity: 1 minus the integral of
    e^-x / (floor(sigma*x) + N), evaluated exactly over the floor steps
    (the integrand is constant on [n/sigma, (n+1)/sigma))."""
    _check_sigma(sigma)
    _check_N(N)
    K = _default_truncation(sigma) if K is None else K
    terms = [
        (math.exp(-n / sigma) - math.exp(-(n + 1) / sigma)) / (n + N) for n in range(K + 1)
    ]
    return 1.0 - math.fsum(terms)


def renewal_lambda_deviation(sigma: float, N: int, K: int | None = None) -> float:
    """Distance of the lambda-side renewal series from its limit 1."""
    return renewal_lambda_series(sigma, N, K) - 1.0


def renewal_mu_series(sigma: float, N: int, K: int | None = None) -> float:
    """log N + sum_{n>=1} e^(-n/sigma) * ell_N(n); grows like
    log(sigma+N) + constant."""
    _check_sigma(sigma)
    _check_N(N)
    K = _default_truncation(sigma) if K is None else K
    kern = KernelWeights(N)
    terms = [kern.ell(0)]
    terms += [math.exp(-n / sigma) * kern.ell(n) for n in range(1, K + 1)]
    return math.fsum(terms)


def renewal_mu_integral(sigma: float, N: int, K: int | None = None) -> float:
    """Independent route: integral of e^-x * log(floor(sigma*x) + N),
    evaluated exactly over the floor steps."""
    _check_sigma(sigma)
    _check_N(N)
    K = _default_truncation(sigma) if K is None else K
    terms = [
        (math.exp(-n / sigma) - math.exp(-(n + 1) / sigma)) * math.log(n + N)
        for n in range(K + 1)
    ]
    return math.fsum(terms)


def renewal_mu_deviation(sigma: float, N: int, K: int | None = None) -> float:
    """Distance of the mu-side renewal series from log(sigma+N) + C."""
    return renewal_mu_series(sigma, N, K) - math.log(sigma + N) - log_kernel_constant()


# -- renewal identity ---------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of the truncated renewal identity and an honest error
    budget: geometric truncation tails on each side, the saturation
    half-width for unenumerated return cells, and a grid-fidelity
    allowance for the quadrature (zero on the weight='one' path, which is
    closed-form)."""

    N: int
    sigma: float
    K: int
    weight: str
    lhs: float
    rhs: float
    gap: float
    tolerance: float
    components: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def renewal_identity_check(
    N: int,
    sigma: float,
    K: int,
    weight: str = "phi0",
    context: GridContext | None = None,
) -> IdentityReport:
    """Evaluate both sides of the renewal identity over A = [1/N, 1].

    LHS: integral over A of (truncated Laplace-weighted operator sum,
    applied to the identity weight or to 1) times (1 - e^(-phi/sigma))
    against dx/x, decomposed over return-time cells. Cell membership is
    cross-validated against pointwise orbit return times; cells beyond
    M = ceil(20*sigma)+2 are handled by the saturation bracket
    1 - e^(-phi/sigma) in (1 - e^(-M/sigma), 1].

    RHS: the matching first-entry series, (N-1)/N + sum e^(-n/sigma) /
    ((n+N)(n+N-1)) for the identity weight, or log N + sum e^(-n/sigma)
    * ell_N(n) for weight 1.
    """
    _check_sigma(sigma)
    _check_N(N)
    if weight not in ("phi0", "one"):
        raise DomainError(f"weight must be 'phi0' or 'one', got {weight!r}")
    if K < 20 * sigma:
        raise CapacityError(f"truncation K={K} too small for sigma={sigma} (need >= {20 * sigma:.0f})")
    context = context or get_default_context()
    M = int(math.ceil(20.0 * sigma)) + 2

    # pointwise cross-validation of the cell layout (orbit return times at
    # cell midpoints), cheap for small m
    for m in list(range(1, min(M, 12) + 1)) + [M]:
        cell = return_cell(N, m)
        mid = (cell.lo + cell.hi) / 2
        rt = return_time(mid, N)
        if rt != m:
            raise FareyError(
                f"return-cell layout disagrees with orbit return time at cell {m}"
            )

    kern = KernelWeights(N)
    if weight == "one":
        s_K = math.fsum(math.exp(-n / sigma) for n in range(K + 1))
        cell_ints = []
        for m in range(1, M + 1):
            cell = return_cell(N, m)
            cell_ints.append(s_K * math.log(float(cell.hi / cell.lo)))
        rest_int = s_K * kern.ell(M)  # mu of the remaining stretch, closed form
        quad_allowance = 1e-10 * max(1.0, abs(s_K))
        rhs = math.fsum([kern.ell(0)] + [math.exp(-n / sigma) * kern.ell(n) for n in range(1, K + 1)])
        tail_lhs = math.exp(-(K + 1) / sigma) / (-math.expm1(-1.0 / sigma)) * math.log(N)
        tail_rhs = math.exp(-(K + 1) / sigma) / (-math.expm1(-1.0 / sigma)) * kern.ell(K + 1)
    else:
        w_vals = laplace_operator_sum(sigma, K, context)
        cell_ints = []
        for m in range(1, M + 1):
            cell = return_cell(N, m)
            cell_ints.append(context.grid.quad_mu(w_vals, float(cell.lo), float(cell.hi)))
        rest = return_cell(N, M + 1)
        rest_int = context.grid.quad_mu(w_vals, float(rest.lo), 1.0)
        # measured seeded-sweep fidelity is ~2e-7 per iterate; the weighted
        # sum stacks ~sigma of them coherently, so allow 1e-5 * sigma
        quad_allowance = 1e-5 * max(1.0, sigma)
        rhs = math.fsum(
            [(N - 1) / N]
            + [math.exp(-n / sigma) / ((n + N) * (n + N - 1)) for n in range(1, K + 1)]
        )
        tail_lhs = math.exp(-(K + 1) / sigma) / (-math.expm1(-1.0 / sigma))
        tail_rhs = (
            math.exp(-(K + 1) / sigma)
            / (-math.expm1(-1.0 / sigma))
            / ((K + 1 + N) * (K + N))
        )

    body = math.fsum(
        (1.0 - math.exp(-m / sigma)) * cell_ints[m - 1] for m in range(1, M + 1)
    )
    sat_low = (1.0 - math.exp(-(M + 1) / sigma)) * rest_int
    sat_high = rest_int
    lhs = body + 0.5 * (sat_low + sat_high)
    saturation = 0.5 * (sat_high - sat_low)

    gap = abs(lhs - rhs)
    tolerance = saturation + tail_lhs + tail_rhs + quad_allowance
    return IdentityReport(
        N=N,
        sigma=sigma,
        K=K,
        weight=weight,
        lhs=lhs,
        rhs=rhs,
        gap=gap,
        tolerance=tolerance,
        components=dict(
            saturation=saturation,
            tail_lhs=tail_lhs,
            tail_rhs=tail_rhs,
            quadrature=quad_allowance,
            cells=M,
        ),
        meta=dict(context.meta),
    )


def renewal_identity_gap(
    N: int, sigma: float, K: int, weight: str = "phi0", context: GridContext | None = None
) -> float:
    return renewal_identity_check(N, sigma, K, weight, context).gap


# -- algebraic identity -------------------------------------------------------


def convolution_telescope_gap(N: int, n: int, seq: Sequence[float]) -> float:
    """|sum_{k<=n} (seq * ell_N)(k) - sum_{k<=n} seq[k] * log(n-k+N)|.

    An exact rearrangement identity for ANY sequence, so the result is
    pure floating-point noise; both sides use fsum.
    """
    _check_N(N)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if len(seq) < n + 1:
        raise DomainError(f"need {n + 1} sequence terms, got {len(seq)}")
    kern = KernelWeights(N)
    ell = [kern.ell(i) for i in range(n + 1)]
    b = [float(v) for v in seq[: n + 1]]
    lhs = math.fsum(
        math.fsum(b[j] * ell[k - j] for j in range(k + 1)) for k in range(n + 1)
    )
    rhs = math.fsum(b[k] * math.log(n - k + N) for k in range(n + 1))
    return abs(lhs - rhs)


def remainder_scaled(N: int, n: int, context: GridContext | None = None) -> float:
    """|sum_{k=1..n} lam_k * log(1 - k/(n+N))| * log(n)/n, the scaled
    leftover that the effective partial-sum law discards. Bounded across
    decades when the law holds."""
    _check_N(N)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    context = context or get_laws_context()
    series = LevelMeasureSeries.build(mpq(1, N), n, context=context)
    total = math.fsum(
        float(series.lam[k]) * math.log1p(-k / (n + N)) for k in range(1, n + 1)
    )
    return abs(total) * math.log(n) / n


# -- effective-law fit reports ------------------------------------------------
# These (and remainder_scaled above) default to get_laws_context() rather
# than the default mesh: their far decades read the sequence out to
# n ~ 2e5 where the coarser mesh's accumulated drift contaminates the
# scaled errors (see LAWS_MESH_SIZE).


@dataclass(frozen=True)
class FitReport:
    """Archive of an effective-law check over a grid of n or sigma values.

    K is the fitted supremum of the scaled errors; verdict applies
    VERDICT_RULE to the scaled-error sequence. params records everything
    needed to reproduce the run (base interval, splice point, mesh echo).
    """

    law: str
    params: dict
    points: list
    K: float
    verdict: str
    verdict_rule: str = VERDICT_RULE

    def as_json(self) -> dict:
        return {
            "law": self.law,
            "params": self.params,
            "points": self.points,
            "K": self.K,
            "verdict": self.verdict,
            "verdict_rule": self.verdict_rule,
        }


def _finish_report(law: str, params: dict, points: list) -> FitReport:
    scaled = [p["scaled_error"] for p in points]
    return FitReport(
        law=law,
        params=params,
        points=points,
        K=max(scaled),
        verdict=growth_verdict(scaled),
    )


def laplace_law_fit(
    N: int,
    sigma_grid: Sequence[float],
    context: GridContext | None = None,
    splice: int = DEFAULT_SPLICE,
) -> FitReport:
    """Check S(sigma) against sigma/(log sigma + C): the error is expected
    to stay O(1) across decades, so the scaled error IS the error."""
    _check_N(N)
    sigmas = sorted(float(s) for s in sigma_grid)
    if not sigmas or sigmas[0] <= 1.0:
        raise DomainError("sigma grid must be nonempty with values > 1")
    context = context or get_laws_context()
    K_max = _default_truncation(sigmas[-1])
    series = LevelMeasureSeries.build(mpq(1, N), K_max, splice=splice, context=context)
    C = log_kernel_constant()
    points = []
    for s in sigmas:
        val, _tail = series.laplace_sum(s)
        target = s / (math.log(s) + C)
        err = abs(val - target)
        points.append(
            {"n_or_sigma": s, "value": val, "error": err, "scaled_error": err}
        )
    params = dict(N=N, u=str(series.u), C=C, splice=series.splice_k, K_max=K_max,
                  mesh=dict(context.meta))
    return _finish_report("s", params, points)


def partial_sum_law_fit(
    u: RationalLike,
    n_grid: Sequence[int],
    context: GridContext | None = None,
    splice: int = DEFAULT_SPLICE,
) -> FitReport:
    """Check the partial sums of the level measures against
    n*log(1/u)/log(n); scaled error = relative error * log n."""
    u = rational(u)
    if not (0 < u < 1):
        raise DomainError(f"u must be in (0,1), got {u}")
    ns = sorted(int(n) for n in n_grid)
    if not ns or ns[0] < 2:
        raise DomainError("n grid must be nonempty with values >= 2")
    context = context or get_laws_context()
    series = LevelMeasureSeries.build(u, ns[-1], splice=splice, context=context)
    prefix = np.cumsum(series.lam)
    log_inv_u = -math.log(float(u))
    points = []
    for n in ns:
        val = float(prefix[n])
        err = abs(val * math.log(n) / (n * log_inv_u) - 1.0)
        points.append(
            {"n_or_sigma": n, "value": val, "error": err, "scaled_error": err * math.log(n)}
        )
    params = dict(u=str(u), N=series.N, splice=series.splice_k, K_max=ns[-1],
                  mesh=dict(context.meta))
    return _finish_report("partial", params, points)


def interval_law_fit(
    alpha: RationalLike,
    beta: RationalLike,
    n_grid: Sequence[int],
    context: GridContext | None = None,
    splice: int = DEFAULT_SPLICE,
) -> FitReport:
    """Check the depth-(n-1) pullback measure of [alpha, beta] against
    log(beta/alpha)/log(n). For beta < 1 the measure is the difference of
    the two sum-level sequences; beta = 1 uses the alpha sequence alone."""
    alpha = rational(alpha)
    beta = rational(beta)
    if not (0 < alpha < beta <= 1):
        raise DomainError(f"need 0 < alpha < beta <= 1, got [{alpha}, {beta}]")
    ns = sorted(int(n) for n in n_grid)
    if not ns or ns[0] < 2:
        raise DomainError("n grid must be nonempty with values >= 2")
    context = context or get_laws_context()
    series_a = LevelMeasureSeries.build(alpha, ns[-1], splice=splice, context=context)
    if beta == 1:
        meas = series_a.lam
        series_b = None
    else:
        series_b = LevelMeasureSeries.build(beta, ns[-1], splice=splice, context=context)
        meas = series_a.lam - series_b.lam
    log_ratio = math.log(float(beta / alpha))
    points = []
    for n in ns:
        val = float(meas[n - 1])
        err = abs(val * math.log(n) / log_ratio - 1.0)
        points.append(
            {"n_or_sigma": n, "value": val, "error": err, "scaled_error": err * math.log(n)}
        )
    params = dict(alpha=str(alpha), beta=str(beta), splice=series_a.splice_k,
                  K_max=ns[-1], mesh=dict(context.meta))
    return _finish_report("pointwise", params, points)
