"""The mu-transfer operator: exact pointwise iteration and a graded-mesh
grid operator for large iteration counts, plus Cesaro/Laplace series built
from the level measures it produces.

One application of the operator is
    (T f)(x) = [f(x/(1+x)) + x * f(1/(1+x))] / (1+x).
It fixes constants, preserves the increasing/concave class, and is dual to
composition with the map under the density-1/x measure.

Grid scheme (parameters are empirical and echoed in every report):
mesh = Stern-Brocot anchor fractions (levels <= 10) + geometric tail toward
x_min + power-law fill x = x_tail + (1-x_tail)*t^2, interpolation is
monotone piecewise-linear, and integrals against dx/x integrate the PL
interpolant in closed form per cell. The anchor lattice pins the pullback
influence tree of shallow iterates onto nodes, so early iterates are exact
at anchor points; measure sweeps additionally seed the iteration with a
directly evaluated iterate (seed_depth) before switching to grid applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpq

from .exact import (
    CapacityError,
    DomainError,
    FareyError,
    Interval,
    Rational,
    RationalLike,
    exact_sum,
    rational,
)
from .maps import inverse_branch_images
from .preimage import exact_level_measures

__all__ = [
    "DEFAULT_SEED_DEPTH",
    "DEFAULT_SPLICE",
    "GridContext",
    "GridFunction",
    "LevelMeasureSeries",
    "MESH_DEFAULTS",
    "MeshError",
    "TransferGrid",
    "build_mesh",
    "cesaro_average",
    "cesaro_deviation",
    "cesaro_deviation_profile",
    "duality_check",
    "get_default_context",
    "get_laws_context",
    "LAWS_MESH_SIZE",
    "laplace_operator_sum",
    "laplace_pointwise_deviation",
    "phi0",
    "phi0_grid",
    "sample_phi_iterate",
    "sumlevel_measure_grid",
    "transfer_apply_grid",
    "transfer_apply_pointwise",
    "transfer_iterate_exact",
    "transfer_iterate_grid",
    "transfer_phi_values_exact",
]

MESH_DEFAULTS = dict(
    size=4096,
    x_min=1e-9,
    x_tail=1e-4,
    tail_ratio=1.15,
    power=2.0,
    anchor_levels=10,
)
DEFAULT_SEED_DEPTH = 12
DEFAULT_SPLICE = 22
MAX_EXACT_ITERATE = 26

# Mesh used by the effective-law fits. Their far decades read the level
# sequence out to n ~ 2e5, where the per-step piecewise-linear bias of the
# default mesh accumulates to ~4e-2 relative drift; each mesh doubling cuts
# it ~4x (measured 4.1e-2 / 9.1e-3 / 2.3e-3 at G = 4096 / 8192 / 16384),
# and 32768 brings the worst fitted point within ~0.4 of its limit value.
LAWS_MESH_SIZE = 32768


class MeshError(FareyError):
    """Grid output violated a declared structural property (mesh too coarse)."""


def phi0(x):
    """The density weight: identity function (the one whose integrals are lengths)."""
    return x


def transfer_apply_pointwise(f: Callable, x: RationalLike):
    """One exact application at a point: rational in, rational out when f is."""
    x = rational(x)
    if not (0 <= x <= 1):
        raise DomainError(f"transfer operator domain is [0,1], got {x}")
    return (f(x / (1 + x)) + x * f(1 / (1 + x))) / (1 + x)


def transfer_iterate_exact(f: Callable, x: RationalLike, n: int, cap: int = MAX_EXACT_ITERATE):
    """n-fold exact application at a point by full 2^n branch recursion."""
    if n < 0:
        raise DomainError(f"iteration count must be >= 0, got {n}")
    if n > cap:
        raise CapacityError(f"2^{n} recursion exceeds cap {cap}")
    x = rational(x)
    if not (0 <= x <= 1):
        raise DomainError(f"transfer operator domain is [0,1], got {x}")

    def rec(y, k):
        if k == 0:
            return f(y)
        return (rec(y / (1 + y), k - 1) + y * rec(1 / (1 + y), k - 1)) / (1 + y)

    return rec(x, n)


def transfer_phi_values_exact(x: RationalLike, n_max: int, cap: int = 22) -> list[Rational]:
    """Exact iterate values of the identity weight at a rational point,
    for all orders 0..n_max at once.

    Expanding the n-fold operator over branch words gives
        (T^n id)(x) = x * sum over words of 1/(c x + d)^2
    with (c, d) the bottom row of the word's branch-matrix product. Rows
    are enumerated as int64 arrays level by level, bucketed by the integer
    m = c*p + d*q, and folded exactly; this matches the 2^n recursion
    (cross-checked in tests) at a tiny fraction of the cost.
    """
    if n_max > cap:
        raise CapacityError(f"level arrays at order {n_max} exceed cap {cap}")
    x = rational(x)
    if not (0 < x <= 1):
        raise DomainError(f"exact iterate profile needs x in (0,1], got {x}")
    p, q = int(x.numerator), int(x.denominator)
    out = [x]
    c = np.array([0], dtype=np.int64)
    d = np.array([1], dtype=np.int64)
    pq = mpq(p) * q
    for _ in range(n_max):
        # append a left branch (c,d) -> (c+d, d) and a right branch -> (d, c+d)
        c, d = np.concatenate([c + d, d]), np.concatenate([d, c + d])
        m = c * p + d * q
        counts = np.bincount(m)
        nz = np.nonzero(counts)[0]
        out.append(pq * exact_sum(mpq(int(counts[mm]), int(mm) ** 2) for mm in nz.tolist()))
    return out


def sample_phi_iterate(x: np.ndarray, k: int, cap: int = 16) -> np.ndarray:
    """Direct float64 evaluation of the order-k iterate of the identity weight
    at the points x, by the full 2^k branch recursion (vectorized).

    All terms are positive, so the float result carries only ~k ulp of
    relative error. Used to seed measure sweeps.
    """
    if k > cap:
        raise CapacityError(f"2^{k} vectorized recursion exceeds cap {cap}")
    x = np.asarray(x, dtype=np.float64)
    if k == 0:
        return x.copy()
    left = sample_phi_iterate(x / (1.0 + x), k - 1, cap)
    right = sample_phi_iterate(1.0 / (1.0 + x), k - 1, cap)
    return (left + x * right) / (1.0 + x)


def build_mesh(
    size: int = MESH_DEFAULTS["size"],
    x_min: float = MESH_DEFAULTS["x_min"],
    x_tail: float = MESH_DEFAULTS["x_tail"],
    tail_ratio: float = MESH_DEFAULTS["tail_ratio"],
    power: float = MESH_DEFAULTS["power"],
    anchor_levels: int = MESH_DEFAULTS["anchor_levels"],
    anchors: Sequence[RationalLike] = (),
) -> tuple[np.ndarray, dict]:
    """Graded mesh on (0,1] and its parameter echo.

    size is the total node budget. Nodes = Stern-Brocot fractions up to
    anchor_levels (exactness anchors for shallow pullback trees), a
    geometric tail covering [x_min, x_tail] (iterates are essentially
    linear there), explicit extra anchors, and a power-law fill of the
    remaining budget (spacing ~ sqrt(x), which equidistributes the PL
    error of the iterates).
    """
    if size < 512:
        raise DomainError(f"mesh size must be >= 512, got {size}")
    if not (0 < x_min < x_tail < 0.5):
        raise DomainError("need 0 < x_min < x_tail < 1/2")
    if tail_ratio <= 1 or power < 1:
        raise DomainError("need tail_ratio > 1 and power >= 1")
    from .sternbrocot import sb_generate

    while anchor_levels > 0 and 2**anchor_levels > size // 2:
        anchor_levels -= 1
    parts = [np.array([x_min, 1.0])]
    n_tail = int(np.ceil(np.log(x_tail / x_min) / np.log(tail_ratio)))
    tail = x_min * tail_ratio ** np.arange(n_tail)
    parts.append(tail[tail < x_tail * 0.999])
    if anchor_levels > 0:
        lev = sb_generate(anchor_levels)
        parts.append(lev.nums[1:-1] / lev.dens[1:-1])
    if anchors:
        parts.append(np.array(sorted(float(rational(a)) for a in anchors)))
    base = np.unique(np.concatenate(parts))
    n_fill = max(size - len(base), 2)
    t = np.linspace(0.0, 1.0, n_fill)
    fill = x_tail + (1.0 - x_tail) * t**power
    mesh = np.unique(np.concatenate([base, fill]))
    # drop the earlier node of any nearly coincident pair (degenerate cells
    # would blow up slopes); never drops the endpoint 1.0
    keep = np.ones(len(mesh), dtype=bool)
    keep[:-1] = np.diff(mesh) > 1e-12 * mesh[1:]
    mesh = mesh[keep]
    mesh.setflags(write=False)
    meta = dict(
        size=size,
        x_min=x_min,
        x_tail=x_tail,
        tail_ratio=tail_ratio,
        power=power,
        anchor_levels=anchor_levels,
        node_count=int(len(mesh)),
    )
    return mesh, meta


@dataclass(frozen=True)
class GridFunction:
    """A sampled function on a fixed mesh with monotone piecewise-linear
    interpolation between nodes.

    zero_at_origin declares f(0) = 0: evaluation below the first node then
    follows the chord through the origin instead of clamping to the first
    value. monotone is a validated (not assumed) claim that the samples
    are nondecreasing.
    """

    mesh: np.ndarray
    values: np.ndarray
    zero_at_origin: bool = False
    monotone: bool = False

    def __post_init__(self):
        if len(self.mesh) != len(self.values):
            raise DomainError("mesh/value length mismatch")
        if self.monotone and np.any(np.diff(self.values) < -_mono_slack(self.values)):
            raise MeshError("values flagged monotone are decreasing somewhere")

    def __call__(self, y):
        return _pl_eval(self.mesh, self.values, y, self.zero_at_origin)


def _mono_slack(values: np.ndarray) -> float:
    return 16 * np.finfo(np.float64).eps * float(np.max(np.abs(values), initial=1.0))


def _pl_eval(mesh, values, y, zero_at_origin):
    y_arr = np.asarray(y, dtype=np.float64)
    idx = np.clip(np.searchsorted(mesh, y_arr, side="right") - 1, 0, len(mesh) - 2)
    t = (y_arr - mesh[idx]) / (mesh[idx + 1] - mesh[idx])
    out = values[idx] + t * (values[idx + 1] - values[idx])
    below = y_arr < mesh[0]
    if np.any(below):
        out = np.where(below, values[0] * (y_arr / mesh[0]) if zero_at_origin else values[0], out)
    return float(out) if np.isscalar(y) or y_arr.ndim == 0 else out


class TransferGrid:
    """Precomputed one-step grid transfer operator for a fixed mesh.

    The application gathers interpolated values at the two pullback points
    of every node. The gather uses the anchored form v_j + t*(v_{j+1}-v_j),
    so constant functions are reproduced bit-exactly, and with them the
    fixed-function identity T 1 = 1.
    """

    def __init__(self, mesh: np.ndarray):
        mesh = np.asarray(mesh, dtype=np.float64)
        if len(mesh) < 8 or np.any(np.diff(mesh) <= 0) or mesh[0] <= 0 or mesh[-1] != 1.0:
            raise DomainError("mesh must be strictly increasing inside (0,1] and end at 1")
        self.mesh = mesh
        n = len(mesh)
        yl = mesh / (1.0 + mesh)
        yr = 1.0 / (1.0 + mesh)
        self._il = np.clip(np.searchsorted(mesh, yl, side="right") - 1, 0, n - 2)
        self._tl = (yl - mesh[self._il]) / (mesh[self._il + 1] - mesh[self._il])
        self._below = yl < mesh[0]
        self._chord = yl / mesh[0]
        self._ir = np.clip(np.searchsorted(mesh, yr, side="right") - 1, 0, n - 2)
        self._tr = (yr - mesh[self._ir]) / (mesh[self._ir + 1] - mesh[self._ir])
        # right images live in [1/2, 1], always inside the mesh
        assert yr.min() >= mesh[0]
        self._one_plus = 1.0 + mesh
        self._wcache: dict[tuple[float, float], np.ndarray] = {}

    def apply_values(self, v: np.ndarray, zero_at_origin: bool = True) -> np.ndarray:
        il, tl, ir, tr = self._il, self._tl, self._ir, self._tr
        gl = v[il] + tl * (v[il + 1] - v[il])
        if zero_at_origin:
            gl = np.where(self._below, v[0] * self._chord, gl)
        else:
            gl = np.where(self._below, v[0], gl)
        gr = v[ir] + tr * (v[ir + 1] - v[ir])
        return (gl + self.mesh * gr) / self._one_plus

    def eval_values(self, v: np.ndarray, y, zero_at_origin: bool = True):
        return _pl_eval(self.mesh, v, y, zero_at_origin)

    def mu_weights(self, a: float, b: float) -> np.ndarray:
        """Weight vector w with sum(w*v) = integral_a^b PL(v)(x) dx/x.

        Exact for the PL interpolant (per-cell closed form with logs),
        including partial boundary cells. Cached per (a, b).
        """
        key = (float(a), float(b))
        w = self._wcache.get(key)
        if w is not None:
            return w
        mesh = self.mesh
        a, b = key
        if a < mesh[0] * (1 - 1e-12):
            raise DomainError(f"integration bound {a} below first mesh node {mesh[0]}")
        if b > 1.0 + 1e-12:
            raise DomainError(f"integration bound {b} above 1")
        a = max(a, float(mesh[0]))
        b = min(b, 1.0)
        w = np.zeros(len(mesh))
        if b > a:
            ia = int(np.searchsorted(mesh, a, side="right")) - 1
            ib = int(np.searchsorted(mesh, b, side="left"))  # b in cell ib-1
            segs = []
            if ia == ib - 1:
                segs.append((ia, a, b))
            else:
                segs.append((ia, a, float(mesh[ia + 1])))
                segs.append((ib - 1, float(mesh[ib - 1]), b))
                lo_full, hi_full = ia + 1, ib - 1
                if hi_full > lo_full:
                    x0 = mesh[lo_full:hi_full]
                    x1 = mesh[lo_full + 1 : hi_full + 1]
                    h = x1 - x0
                    L = np.log(x1 / x0)
                    w[lo_full:hi_full] += (x1 * L - h) / h
                    w[lo_full + 1 : hi_full + 1] += (h - x0 * L) / h
            for i, s, t in segs:
                if t <= s:
                    continue
                h = mesh[i + 1] - mesh[i]
                L = math.log(t / s)
                w[i] += (mesh[i + 1] * L - (t - s)) / h
                w[i + 1] += ((t - s) - mesh[i] * L) / h
        w.setflags(write=False)
        self._wcache[key] = w
        return w

    def quad_mu(self, v: np.ndarray, a: float, b: float) -> float:
        return float((self.mu_weights(a, b) * v).sum())


def phi0_grid(mesh: np.ndarray) -> GridFunction:
    """The identity weight sampled exactly on the mesh."""
    return GridFunction(mesh, np.array(mesh, dtype=np.float64), zero_at_origin=True, monotone=True)


def transfer_apply_grid(g: GridFunction, grid: TransferGrid | None = None) -> GridFunction:
    """One grid application. The monotone flag is validated on the output,
    never assumed: a violation means the mesh cannot carry the function."""
    grid = grid if grid is not None else TransferGrid(g.mesh)
    out = grid.apply_values(g.values, g.zero_at_origin)
    if g.monotone and np.any(np.diff(out) < -_mono_slack(out)):
        raise MeshError("grid application broke monotonicity; mesh too coarse")
    return GridFunction(g.mesh, out, g.zero_at_origin, g.monotone)


def transfer_iterate_grid(g: GridFunction, n: int, grid: TransferGrid | None = None) -> GridFunction:
    """n pure grid applications (no seeding; this op's contract is the
    per-step interpolation scheme itself)."""
    if n < 0:
        raise DomainError(f"iteration count must be >= 0, got {n}")
    grid = grid if grid is not None else TransferGrid(g.mesh)
    for _ in range(n):
        g = transfer_apply_grid(g, grid)
    return g


class GridContext:
    """A mesh, its transfer grid, and resumable per-u measure sweeps.

    level_measures(u, count) returns the grid values of the level measures
    lambda_1..lambda_count for the set family over [u, 1]: the n-th entry
    integrates the order-(n-1) iterate of the identity weight over [u, 1]
    against dx/x. Orders up to seed_depth come from direct evaluation of
    the operator sum (error ~1e-15); beyond that the grid operator is
    applied step by step. Sweeps resume from cached state, so extending a
    sequence costs only the new steps and stays bit-reproducible (the op
    sequence is identical to an uninterrupted run).
    """

    def __init__(self, seed_depth: int = DEFAULT_SEED_DEPTH, anchors: Sequence = (), **mesh_params):
        params = dict(MESH_DEFAULTS)
        params.update(mesh_params)
        self.mesh, self.meta = build_mesh(anchors=anchors, **params)
        self.grid = TransferGrid(self.mesh)
        self.seed_depth = int(seed_depth)
        self.meta["seed_depth"] = self.seed_depth
        self._sweeps: dict[str, dict] = {}
        self._exact_cache: dict[tuple[str, int], list] = {}

    def _sweep(self, u: Rational) -> dict:
        key = str(u)
        st = self._sweeps.get(key)
        if st is None:
            st = {"lam": [], "v": None, "w": self.grid.mu_weights(float(u), 1.0)}
            self._sweeps[key] = st
        return st

    def level_measures(self, u: RationalLike, count: int) -> np.ndarray:
        u = rational(u)
        if not (0 < u < 1):
            raise DomainError(f"u must be in (0,1), got {u}")
        st = self._sweep(u)
        lam, w = st["lam"], st["w"]
        while len(lam) < count:
            j = len(lam)  # iterate order needed for the next entry
            if j <= self.seed_depth:
                st["v"] = sample_phi_iterate(self.mesh, j)
            else:
                st["v"] = self.grid.apply_values(st["v"])
            lam.append(float((w * st["v"]).sum()))
        return np.array(lam[:count])

    def measure(self, u: RationalLike, n: int) -> float:
        if n < 1:
            raise DomainError(f"level index must be >= 1, got {n}")
        return float(self.level_measures(u, n)[n - 1])

    def phi_iterate_values(self, n: int) -> np.ndarray:
        """Node values of the order-n iterate of the identity weight via the
        seeded scheme (direct evaluation through seed_depth, grid applies
        beyond)."""
        if n < 0:
            raise DomainError(f"iterate order must be >= 0, got {n}")
        v = None
        for j in range(n + 1):
            if j <= self.seed_depth:
                v = sample_phi_iterate(self.mesh, j)
            else:
                v = self.grid.apply_values(v)
        return v

    def exact_level_prefix(self, u: Rational, depth: int) -> list[Rational]:
        key = (str(u), depth)
        vals = self._exact_cache.get(key)
        if vals is None:
            vals = exact_level_measures(Interval(u, mpq(1)), depth)
            self._exact_cache[key] = vals
        return vals


_DEFAULT_CONTEXT: GridContext | None = None
_LAWS_CONTEXT: GridContext | None = None


def get_default_context() -> GridContext:
    global _DEFAULT_CONTEXT
    if _DEFAULT_CONTEXT is None:
        _DEFAULT_CONTEXT = GridContext()
    return _DEFAULT_CONTEXT


def get_laws_context() -> GridContext:
    """Shared finer-mesh context (size LAWS_MESH_SIZE) for the law fits,
    whose far decades are resolution-limited on the default mesh."""
    global _LAWS_CONTEXT
    if _LAWS_CONTEXT is None:
        _LAWS_CONTEXT = GridContext(size=LAWS_MESH_SIZE)
    return _LAWS_CONTEXT


def sumlevel_measure_grid(u: RationalLike, n: int, context: GridContext | None = None) -> float:
    """Grid value of the n-th level measure over [u, 1] (quadrature of the
    order-(n-1) iterate against dx/x)."""
    context = context or get_default_context()
    return context.measure(u, n)


def _ceil_recip(u: Rational) -> int:
    inv = 1 / u
    return int((inv.numerator + inv.denominator - 1) // inv.denominator)


@dataclass(frozen=True)
class LevelMeasureSeries:
    """Level-measure sequence for [u, 1] with its Cesaro and Laplace sums.

    lam[k] holds the measure of level k+1 as a float: exact rational values
    for k <= splice_k (converted once), grid values beyond. The splice
    point and grid parameters ride along in meta for reproducibility.
    """

    u: Rational
    N: int
    lam: np.ndarray
    splice_k: int
    K_max: int
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        u: RationalLike,
        K_max: int,
        splice: int = DEFAULT_SPLICE,
        context: GridContext | None = None,
    ) -> "LevelMeasureSeries":
        context = context or get_default_context()
        u = rational(u)
        if not (0 < u < 1):
            raise DomainError(f"u must be in (0,1), got {u}")
        N = _ceil_recip(u)
        splice_eff = max(0, min(splice, K_max))
        lam = np.empty(K_max + 1, dtype=np.float64)
        exact_vals = context.exact_level_prefix(u, splice_eff)
        lam[: splice_eff + 1] = [float(v) for v in exact_vals]
        if K_max > splice_eff:
            grid_vals = context.level_measures(u, K_max + 1)
            lam[splice_eff + 1 :] = grid_vals[splice_eff + 1 :]
        lam.setflags(write=False)
        meta = dict(context.meta)
        meta.update(splice_k=splice_eff, K_max=K_max, u=str(u), N=N)
        return cls(u, N, lam, splice_eff, K_max, meta)

    @property
    def log_N(self) -> float:
        return math.log(self.N)

    def a(self, sigma: float) -> float:
        """Cesaro average: (1/log N) * sum of lam[0..floor(sigma)]."""
        m = int(math.floor(sigma))
        if m < 0:
            raise DomainError(f"sigma must be >= 0, got {sigma}")
        if m > self.K_max:
            raise CapacityError(f"a({sigma}) needs {m + 1} terms, have {self.K_max + 1}")
        return math.fsum(self.lam[: m + 1]) / self.log_N

    def laplace_sum(self, sigma: float, require_factor: float = 20.0) -> tuple[float, float]:
        """Exponentially weighted sum and its geometric tail bound.

        The truncation must reach require_factor * sigma (tail < e^-20 with
        the trivial bound lam <= 1); returns (value, tail_bound).
        """
        if sigma <= 0:
            raise DomainError(f"sigma must be > 0, got {sigma}")
        if self.K_max < require_factor * sigma:
            raise CapacityError(
                f"truncation {self.K_max} insufficient for sigma={sigma} "
                f"(need >= {require_factor * sigma:.0f})"
            )
        n = np.arange(self.K_max + 1, dtype=np.float64)
        s = float((np.exp(-n / sigma) * self.lam).sum()) / self.log_N
        tail = math.exp(-(self.K_max + 1) / sigma) / (-math.expm1(-1.0 / sigma)) / self.log_N
        return s, tail


def _default_sample_points(N: int) -> list[Rational]:
    # a handful of rationals spread over [1/N, 1]; exact iterate profiles
    # are evaluated here, so keep the list short
    pts = [mpq(1, N), mpq(3, 4), mpq(1)]
    return sorted(set(p for p in pts if mpq(1, N) <= p <= 1))


def _phi_track(context: GridContext, n_max: int, xs: np.ndarray) -> np.ndarray:
    """Values of the order-j iterates at the points xs for j = 0..n_max,
    via the seeded sweep (direct evaluation up to seed_depth, then grid)."""
    out = np.empty((n_max + 1, len(xs)))
    v = None
    for j in range(n_max + 1):
        if j <= context.seed_depth:
            v = sample_phi_iterate(context.mesh, j)
        else:
            v = context.grid.apply_values(v)
        out[j] = context.grid.eval_values(v, xs)
    return out


def cesaro_average(N: int, n: int, context: GridContext | None = None,
                   splice: int = DEFAULT_SPLICE) -> float:
    """a(n) for the base set [1/N, 1]."""
    series = LevelMeasureSeries.build(mpq(1, N), n, splice=splice, context=context)
    return series.a(n)


def cesaro_deviation_profile(
    N: int,
    n_max: int,
    xs: Sequence[RationalLike] | None = None,
    exact_upto: int = 20,
    context: GridContext | None = None,
) -> np.ndarray:
    """max over sample points of |(operator partial sum at x) - a(n)|,
    for every n = 0..n_max.

    Iterate values at the sample points come from the exact profile up to
    exact_upto and from the grid beyond; a(n) splices exact level measures
    the same way.
    """
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    context = context or get_default_context()
    pts = [rational(p) for p in (xs if xs is not None else _default_sample_points(N))]
    lo = mpq(1, N)
    if any(not (lo <= p <= 1) for p in pts):
        raise DomainError(f"sample points must lie in [1/{N}, 1]")
    k_exact = min(exact_upto, n_max)
    vals = np.empty((n_max + 1, len(pts)))
    for j, p in enumerate(pts):
        vals[: k_exact + 1, j] = [float(v) for v in transfer_phi_values_exact(p, k_exact)]
    if n_max > k_exact:
        track = _phi_track(context, n_max, np.array([float(p) for p in pts]))
        vals[k_exact + 1 :] = track[k_exact + 1 :]
    partial = np.cumsum(vals, axis=0)
    series = LevelMeasureSeries.build(mpq(1, N), n_max, splice=min(DEFAULT_SPLICE, n_max),
                                      context=context)
    a_vals = np.cumsum(series.lam) / series.log_N
    return np.max(np.abs(partial - a_vals[:, None]), axis=1)


def cesaro_deviation(N: int, n: int, **kwargs) -> float:
    """Deviation bound check quantity at a single n (see profile)."""
    return float(cesaro_deviation_profile(N, n, **kwargs)[n])


def laplace_pointwise_deviation(
    N: int,
    sigma: float,
    xs: Sequence[RationalLike] | None = None,
    exact_upto: int = 20,
    context: GridContext | None = None,
) -> float:
    """max over sample points of |pointwise Laplace-weighted operator sum - S|.

    Both the pointwise sum and S are truncated at the same K = max(20*sigma,
    1000); the difference of the two geometric tails is far below the
    deviation scale this feeds into.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    context = context or get_default_context()
    K = max(int(math.ceil(20 * sigma)), 1000)
    series = LevelMeasureSeries.build(mpq(1, N), K, context=context)
    s_val, _ = series.laplace_sum(sigma)
    pts = [rational(p) for p in (xs if xs is not None else _default_sample_points(N))]
    k_exact = min(exact_upto, K)
    coeffs = np.exp(-np.arange(K + 1) / sigma)
    vals = np.empty((K + 1, len(pts)))
    for j, p in enumerate(pts):
        vals[: k_exact + 1, j] = [float(v) for v in transfer_phi_values_exact(p, k_exact)]
    if K > k_exact:
        track = _phi_track(context, K, np.array([float(p) for p in pts]))
        vals[k_exact + 1 :] = track[k_exact + 1 :]
    sums = (coeffs[:, None] * vals).sum(axis=0)
    return float(np.max(np.abs(sums - s_val)))


def laplace_operator_sum(
    sigma: float, K: int, context: GridContext | None = None, weight: str = "phi0"
) -> np.ndarray:
    """Grid values of the truncated Laplace-weighted operator sum
    sum_{n<=K} e^(-n/sigma) T^n w, for w the identity weight or w = 1."""
    context = context or get_default_context()
    if weight == "one":
        total = float(np.sum(np.exp(-np.arange(K + 1) / sigma)))
        return np.full(len(context.mesh), total)
    if weight != "phi0":
        raise DomainError(f"weight must be 'phi0' or 'one', got {weight!r}")
    acc = np.zeros(len(context.mesh))
    v = None
    for n in range(K + 1):
        if n <= context.seed_depth:
            v = sample_phi_iterate(context.mesh, n)
        else:
            v = context.grid.apply_values(v)
        acc += math.exp(-n / sigma) * v
    return acc


def duality_check(g: GridFunction, B: Interval, grid: TransferGrid | None = None) -> float:
    """|integral over B of (T g) d(mu) - integral over the preimage of B of g d(mu)|.

    The defining duality of the operator, evaluated by grid quadrature.
    """
    if B.lo <= 0:
        raise DomainError("duality quadrature needs B inside (0,1]")
    grid = grid if grid is not None else TransferGrid(g.mesh)
    tv = grid.apply_values(g.values, g.zero_at_origin)
    lhs = grid.quad_mu(tv, float(B.lo), float(B.hi))
    left, right = inverse_branch_images(B)
    rhs = grid.quad_mu(g.values, float(left.lo), float(left.hi)) + grid.quad_mu(
        g.values, float(right.lo), float(right.hi)
    )
    return abs(lhs - rhs)
