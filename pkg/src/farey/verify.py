"""Self-check suites: oracles (exact cross-constructions agree), lemmas
(bounds and identity checks), laws (effective-asymptotics fit reports).

Each suite returns a flat list of CheckResult; a failing check never
aborts the rest of the suite (exceptions are caught and reported as
failures). All checks are deterministic; random sequences use a fixed
seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from gmpy2 import mpq

from . import asymptotic, maps, preimage, sternbrocot, transfer
from .exact import Interval, exact_sum, interval_lambda
from .transfer import GridContext, get_default_context, get_laws_context

__all__ = ["CheckResult", "SUITES", "run_suite", "suite_oracles", "suite_lemmas", "suite_laws"]

FIRST_FIVE = [mpq(1, 2), mpq(1, 3), mpq(3, 10), mpq(39, 140), mpq(1129, 4290)]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"


def _run(checks, name, fn):
    try:
        passed, detail = fn()
    except Exception as exc:  # noqa: BLE001 - a crashed check is a failed check
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    checks.append(CheckResult(name, bool(passed), detail))


def suite_oracles(max_level: int = 18) -> list[CheckResult]:
    checks: list[CheckResult] = []

    def first_five():
        got = {
            "sb": [sternbrocot.sumlevel_lambda_sb(n) for n in range(1, 6)],
            "preimage": [
                preimage.preimage_measure(Interval(mpq(1, 2), mpq(1)), n - 1).lambda_total
                for n in range(1, 6)
            ],
            "cf": [
                exact_sum(interval_lambda(iv) for iv in preimage.sumlevel_intervals_cf(n))
                for n in range(1, 6)
            ],
        }
        bad = [
            (m, i + 1, str(v))
            for m, vals in got.items()
            for i, v in enumerate(vals)
            if v != FIRST_FIVE[i]
        ]
        return not bad, f"first five level measures by 3 constructions: mismatches={bad!r}"

    _run(checks, "exact-first-five-measures", first_five)

    def triple_sets():
        for n in range(2, max_level + 1):
            s_sb = sternbrocot.sumlevel_intervals_sb(n)
            s_pre = preimage.preimage_set(Interval(mpq(1, 2), mpq(1)), n - 1)
            s_cf = preimage.sumlevel_intervals_cf(n)
            if not (s_sb == s_pre == s_cf):
                return False, f"set constructions disagree at level {n}"
        return True, f"canonical set equality, 3 constructions, levels 2..{max_level}"

    _run(checks, "triple-oracle-set-equality", triple_sets)

    def unimodular():
        for n in range(1, 13):
            if not sternbrocot.unimodular_check(sternbrocot.sb_generate(n)):
                return False, f"unimodularity fails at level {n}"
        return True, "adjacent-fraction determinant 1 at levels 1..12"

    _run(checks, "stern-brocot-unimodular", unimodular)

    def cf_roundtrip():
        for q in range(2, 81):
            for p in range(1, q):
                if math.gcd(p, q) != 1:
                    continue
                x = mpq(p, q)
                if maps.cf_decode(maps.cf_encode(x)) != x:
                    return False, f"codec roundtrip fails at {p}/{q}"
        return True, "encode/decode roundtrip for all reduced p/q, q <= 80"

    _run(checks, "cf-codec-roundtrip", cf_roundtrip)

    def membership():
        for q in range(2, 61):
            for p in range(1, q + 1):
                if math.gcd(p, q) != 1:
                    continue
                x = mpq(p, q)
                sums = maps.cf_partial_sums(x)
                for n in range(1, 16):
                    by_orbit = _orbit_membership(x, n)
                    if (n in sums) != by_orbit:
                        return False, f"membership mismatch at {p}/{q}, level {n}"
        return True, "digit-sum membership equals orbit membership, q <= 60, n <= 15"

    _run(checks, "sum-level-membership", membership)

    def float_vs_exact():
        base = Interval(mpq(1, 3), mpq(4, 5))
        for depth in (6, 10, 14):
            ex = preimage.preimage_measure(base, depth, mode="exact")
            fl = preimage.preimage_measure(base, depth, mode="float64")
            rel = abs(fl.lambda_total - float(ex.lambda_total)) / float(ex.lambda_total)
            if rel > 1e-12 or abs(fl.lambda_total - float(ex.lambda_total)) > fl.float_error_bound:
                return False, f"float64 path off at depth {depth}: rel={rel!r}"
        return True, "float64 streaming within 1e-12 and within its own error bound"

    _run(checks, "streaming-float-vs-exact", float_vs_exact)

    def level_arrays():
        base = Interval(mpq(1, 2), mpq(1))
        arr = preimage.exact_level_measures(base, 12)
        for depth in (0, 3, 7, 12):
            dfs = preimage.preimage_measure(base, depth).lambda_total
            if arr[depth] != dfs:
                return False, f"level-array vs DFS mismatch at depth {depth}"
        return True, "vectorized level arrays equal streaming DFS, depths 0..12"

    _run(checks, "level-array-vs-dfs", level_arrays)

    def mu_invariance():
        # the pullback preserves the log measure, so every level of the
        # half-interval family has mu exactly log 2
        target = math.log(2.0)
        for n in (2, 5, 9):
            s = preimage.preimage_set(Interval(mpq(1, 2), mpq(1)), n - 1)
            got = float(s.total_mu())
            if abs(got - target) > 1e-12:
                return False, f"mu invariance off at level {n}: {got!r}"
        return True, "preimage sets keep mu = log 2 (invariance of the measure)"

    _run(checks, "mu-invariance", mu_invariance)
    return checks


def _orbit_membership(x, n: int) -> bool:
    """Reference membership: does the depth-(n-1) forward orbit land in [1/2, 1]?"""
    y = x
    for _ in range(n - 1):
        if y == 0:
            return False
        y = maps.farey_forward(y)
    return mpq(1, 2) <= y <= 1


def suite_lemmas(context: GridContext | None = None) -> list[CheckResult]:
    context = context or get_default_context()
    checks: list[CheckResult] = []

    def kernel_constant():
        c = asymptotic.log_kernel_constant()
        p1, p2 = asymptotic.log_kernel_constant_pieces()
        ok = (
            abs(c + asymptotic.EULER_GAMMA) < 1e-10
            and abs(p1 - (-0.7965996)) < 1e-6
            and abs(p2 - 0.2193839) < 1e-6
        )
        return ok, f"C={c!r}, pieces=({p1!r}, {p2!r})"

    _run(checks, "log-kernel-constant", kernel_constant)

    def kernel_telescope():
        kern = asymptotic.KernelWeights(3)
        for m in (0, 1, 7, 50, 200):
            direct = math.fsum(kern.ell(k) for k in range(m + 1))
            if abs(direct - kern.prefix_sum(m)) > 1e-12:
                return False, f"prefix telescoping off at m={m}"
        return True, "kernel prefix sums telescope to log(m+N), m <= 200"

    _run(checks, "kernel-telescoping", kernel_telescope)

    def lambda_series_routes():
        # K = 30*sigma puts the differing truncation tails below 1e-12
        for N in (2, 3):
            for sigma in (1e2, 1e3):
                K = int(30 * sigma) + 1000
                a = asymptotic.renewal_lambda_series(sigma, N, K)
                b = asymptotic.renewal_lambda_integral(sigma, N, K)
                if abs(a - b) > 1e-9:
                    return False, f"series/integral split at N={N}, sigma={sigma}: {a!r} vs {b!r}"
        small = asymptotic.renewal_lambda_series(1e-9, 2)
        if small != 0.5:
            return False, f"sigma->0 limit should be (N-1)/N, got {small!r}"
        return True, "lambda-side series equals its floor-integral route; sigma->0 limit exact"

    _run(checks, "renewal-lambda-routes", lambda_series_routes)

    def mu_series_routes():
        for N, sigma in ((3, 500.0), (2, 1e3)):
            K = int(30 * sigma) + 1000
            a = asymptotic.renewal_mu_series(sigma, N, K)
            b = asymptotic.renewal_mu_integral(sigma, N, K)
            if abs(a - b) > 1e-9:
                return False, f"series/integral split at N={N}, sigma={sigma}"
        small = asymptotic.renewal_mu_series(1e-9, 3)
        if abs(small - math.log(3)) > 1e-15:
            return False, f"sigma->0 limit should be log N, got {small!r}"
        return True, "mu-side series equals its floor-integral route; sigma->0 limit exact"

    _run(checks, "renewal-mu-routes", mu_series_routes)

    def scaled_trends():
        sigmas = (1e2, 1e3, 1e4)
        details = []
        for N in (2, 3):
            lam_sc = [
                abs(asymptotic.renewal_lambda_deviation(s, N)) * s / math.log(s) for s in sigmas
            ]
            mu_sc = [
                abs(asymptotic.renewal_mu_deviation(s, N)) * s / math.log(s) for s in sigmas
            ]
            v1, v2 = asymptotic.growth_verdict(lam_sc), asymptotic.growth_verdict(mu_sc)
            details.append(f"N={N}: lambda={v1} mu={v2}")
            if v1 != "bounded" or v2 != "bounded":
                return False, "; ".join(details)
        return True, "scaled deviations bounded across decades (" + "; ".join(details) + ")"

    _run(checks, "renewal-scaled-trends", scaled_trends)

    def cesaro_bound():
        for N in (2, 3, 5):
            bound = N * (N - 1) / 2
            dev = float(np.max(transfer.cesaro_deviation_profile(N, 30, context=context)))
            if dev > bound:
                return False, f"Cesaro deviation {dev!r} exceeds {bound} at N={N}"
        return True, "Cesaro deviation within N(N-1)/2 for N in {2,3,5}, n <= 30"

    _run(checks, "cesaro-deviation-bound", cesaro_bound)

    def laplace_bound():
        for N, sigma in ((2, 10.0), (3, 10.0)):
            bound = N * (N - 1) / 2
            dev = transfer.laplace_pointwise_deviation(N, sigma, context=context)
            if dev > bound:
                return False, f"Laplace deviation {dev!r} exceeds {bound} at N={N}"
        return True, "Laplace-weighted deviation within N(N-1)/2 at sigma=10"

    _run(checks, "laplace-deviation-bound", laplace_bound)

    def identity_phi0():
        for N, sigma, K in ((2, 0.5, 50), (3, 2.0, 60)):
            rep = asymptotic.renewal_identity_check(N, sigma, K, "phi0", context)
            if rep.gap > rep.tolerance:
                return False, f"identity gap {rep.gap!r} > tol {rep.tolerance!r} (N={N}, sigma={sigma})"
        return True, "renewal identity holds within reported tolerance (weight = identity)"

    _run(checks, "renewal-identity", identity_phi0)

    def identity_one():
        rep = asymptotic.renewal_identity_check(2, 0.5, 50, "one", context)
        ok = rep.gap <= rep.tolerance
        return ok, f"gap={rep.gap!r} tol={rep.tolerance!r} (closed-form weight-1 route)"

    _run(checks, "renewal-identity-weight-one", identity_one)

    def telescope():
        series = transfer.LevelMeasureSeries.build(mpq(1, 2), 50, context=context)
        if asymptotic.convolution_telescope_gap(2, 50, series.lam) > 1e-12:
            return False, "telescope identity fails on the level-measure sequence"
        rng = np.random.default_rng(20260815)
        for i in range(5):
            seq = rng.random(51)
            if asymptotic.convolution_telescope_gap(2, 50, seq) > 1e-12:
                return False, f"telescope identity fails on random sequence {i}"
        return True, "convolution/telescope identity < 1e-12 (measured and random sequences)"

    _run(checks, "convolution-telescope", telescope)
    return checks


def suite_laws(context: GridContext | None = None) -> list[CheckResult]:
    context = context or get_laws_context()
    checks: list[CheckResult] = []
    sig_grid = (1e2, 1e3, 1e4)
    n_grid = (100, 1000, 10000)

    def s_law():
        details = []
        for N in (2, 3):
            rep = asymptotic.laplace_law_fit(N, sig_grid, context=context)
            details.append(f"N={N}: K={rep.K!r} {rep.verdict}")
            if rep.verdict != "bounded":
                return False, "; ".join(details)
        return True, "Laplace-sum law bounded (" + "; ".join(details) + ")"

    _run(checks, "law-laplace-sum", s_law)

    def partial_law():
        details = []
        for u in (mpq(1, 2), mpq(1, 3)):
            rep = asymptotic.partial_sum_law_fit(u, n_grid, context=context)
            details.append(f"u={u}: K={rep.K!r} {rep.verdict}")
            if rep.verdict != "bounded":
                return False, "; ".join(details)
        return True, "partial-sum law bounded (" + "; ".join(details) + ")"

    _run(checks, "law-partial-sum", partial_law)

    def interval_law():
        details = []
        for a, b in ((mpq(1, 2), mpq(1)), (mpq(1, 3), mpq(2, 3))):
            rep = asymptotic.interval_law_fit(a, b, n_grid, context=context)
            details.append(f"[{a},{b}]: K={rep.K!r} {rep.verdict}")
            if rep.verdict != "bounded":
                return False, "; ".join(details)
        return True, "interval pullback law bounded (" + "; ".join(details) + ")"

    _run(checks, "law-interval-measure", interval_law)

    def remainder():
        vals = [asymptotic.remainder_scaled(2, n, context=context) for n in n_grid]
        verdict = asymptotic.growth_verdict(vals)
        return verdict == "bounded", f"scaled remainder across decades: {vals!r} -> {verdict}"

    _run(checks, "law-remainder-term", remainder)

    def grid_monotone():
        for u in (mpq(1, 2), mpq(7, 10)):
            lam = context.level_measures(u, 10000)
            drops = np.nonzero(np.diff(lam) > 1e-9)[0]
            if len(drops):
                return False, f"grid sequence for u={u} increases at n={int(drops[0]) + 1}"
        return True, "grid level-measure sequences decrease (tol 1e-9) to n = 10^4"

    _run(checks, "grid-monotone-decrease", grid_monotone)
    return checks


SUITES = {
    "oracles": lambda context=None: suite_oracles(),
    "lemmas": suite_lemmas,
    "laws": suite_laws,
}


def run_suite(name: str, context: GridContext | None = None) -> list[CheckResult]:
    """Run one suite ('oracles', 'lemmas', 'laws') or 'all'."""
    if name == "all":
        out = []
        for key in ("oracles", "lemmas", "laws"):
            out.extend(SUITES[key](context=context))
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    return SUITES[name](context=context)
