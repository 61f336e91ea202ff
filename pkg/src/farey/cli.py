"""Command-line front end.

Subcommands: sumlevel, preimage, stern-brocot, transfer, asympt, verify.
Every output begins with a config echo (a `# config:` line in CSV, a
leading "config" object in JSON) so a run can be reproduced from its own
output. Outputs are deterministic: no timestamps, floats serialized by
repr (shortest round-trip).

Exit codes: 0 success, 2 verification failure, 3 capacity or config error.
Thread count resolution: --threads flag, else config file, else the
FAREY_THREADS environment variable, else 1. Config file is simple
key=value lines (keys match long flag names), overridden by flags.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field

from gmpy2 import mpq

from . import asymptotic, preimage, sternbrocot, transfer, verify
from .exact import (
    CapacityError,
    DomainError,
    FareyError,
    Interval,
    format_rational,
    parse_rational,
)

__all__ = ["main"]

ENV_THREADS = "FAREY_THREADS"
EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_CONFIG = 3

GLOBAL_DEFAULTS = {
    "format": None,  # per-command default: json for asympt/verify, csv otherwise
    "output": None,
    "threads": None,
    "mesh_size": None,  # None = per-task default (laws mesh for asympt/verify laws)
    "precision": 96,
    "splice": transfer.DEFAULT_SPLICE,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


@dataclass
class RunConfig:
    command: str
    format: str
    output: str | None
    threads: int
    mesh_size: int | None
    precision: int
    splice: int
    args: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "command": self.command,
            "format": self.format,
            "output": self.output or "-",
            "threads": self.threads,
            "mesh_size": "auto" if self.mesh_size is None else self.mesh_size,
            "precision": self.precision,
            "splice": self.splice,
        }
        for k, v in self.args.items():
            if k in ("n_list", "methods", "grid") or v is None:
                continue
            d[k] = format_rational(v) if isinstance(v, mpq) else v
        return d

    def echo_line(self) -> str:
        items = sorted(self.as_dict().items())
        return "# config: " + " ".join(f"{k}={v}" for k, v in items)


def _read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise DomainError(f"config file line is not key=value: {line!r}")
                key, val = line.split("=", 1)
                out[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from exc
    return out


def _parse_n_range(text: str) -> list[int]:
    m = re.fullmatch(r"(\d+)(?:\.\.(\d+))?", text.strip())
    if not m:
        raise DomainError(f"bad n range {text!r} (use '5' or '1..20')")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    if lo < 1 or hi < lo:
        raise DomainError(f"bad n range {text!r}")
    return list(range(lo, hi + 1))


def _parse_grid(text: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise DomainError(f"bad grid {text!r}") from exc
    if not vals:
        raise DomainError("empty grid")
    return vals


def _context_for(mesh_size: int | None) -> transfer.GridContext | None:
    """None means per-task defaults (library functions pick their own)."""
    if mesh_size is None:
        return None
    if mesh_size == transfer.MESH_DEFAULTS["size"]:
        return transfer.get_default_context()
    if mesh_size == transfer.LAWS_MESH_SIZE:
        return transfer.get_laws_context()
    return transfer.GridContext(size=mesh_size)


def _emit(cfg: RunConfig, payload, csv_lines: list[str]) -> str:
    """Render payload per format. csv_lines excludes the config echo."""
    if cfg.format == "json":
        doc = {"config": cfg.as_dict()}
        doc.update(payload)
        return json.dumps(doc, indent=2) + "\n"
    return "\n".join([cfg.echo_line()] + csv_lines) + "\n"


# -- subcommand implementations ------------------------------------------------


def _cmd_stern_brocot(cfg: RunConfig) -> tuple[str, int]:
    level = cfg.args["level"]
    if level > 20:
        raise CapacityError(
            f"level {level} emission exceeds the listing cap 20; use the library "
            "API (sb_generate) for bulk arrays"
        )
    lev = sternbrocot.sb_generate(level)
    fracs = [f"{int(p)}/{int(q)}" for p, q in zip(lev.nums.tolist(), lev.dens.tolist())]
    if cfg.format == "json":
        return _emit(cfg, {"level": level, "fractions": fracs}, []), EXIT_OK
    return _emit(cfg, None, ["fraction"] + fracs), EXIT_OK


def _sumlevel_value(method: str, n: int, u, mode: str, cfg: RunConfig, context):
    if method == "sb":
        if u != mpq(1, 2):
            raise DomainError("method 'sb' computes the u=1/2 family only")
        return sternbrocot.sumlevel_lambda_sb(n)
    if method == "cf":
        if u != mpq(1, 2):
            raise DomainError("method 'cf' computes the u=1/2 family only")
        ivs = preimage.sumlevel_intervals_cf(n)
        from .exact import exact_sum, interval_lambda

        return exact_sum(interval_lambda(iv) for iv in ivs)
    if method == "preimage":
        report = preimage.preimage_measure(
            Interval(u, mpq(1)),
            n - 1,
            mode="exact" if mode == "exact" else "float64",
            workers=cfg.threads,
        )
        return report.lambda_total
    if method == "transfer":
        return transfer.sumlevel_measure_grid(u, n, context=context)
    raise DomainError(f"unknown method {method!r}")


def _cmd_sumlevel(cfg: RunConfig) -> tuple[str, int]:
    ns = cfg.args["n_list"]
    methods = cfg.args["methods"]
    u = cfg.args["u"]
    mode = cfg.args["mode"]
    emit = cfg.args["emit"]
    context = _context_for(cfg.mesh_size)

    if emit == "set":
        if len(methods) != 1 or len(ns) != 1:
            raise DomainError("--emit set takes exactly one method and one n")
        n, method = ns[0], methods[0]
        if n - 1 > preimage.MAX_SET_DEPTH:
            raise CapacityError(
                f"set materialization at level {n} exceeds the cap "
                f"(depth {preimage.MAX_SET_DEPTH}); use --emit measure (streaming "
                "enumeration) or --method transfer for the measure alone"
            )
        if method == "sb":
            ivset = sternbrocot.sumlevel_intervals_sb(n)
        elif method == "cf":
            ivset = preimage.sumlevel_intervals_cf(n)
        elif method == "preimage":
            ivset = preimage.preimage_set(Interval(u, mpq(1)), n - 1)
        else:
            raise DomainError("--emit set needs an exact method (sb, cf, preimage)")
        mu = ivset.total_mu(bits=cfg.precision)
        rows = [
            {"lo": format_rational(iv.lo), "hi": format_rational(iv.hi)} for iv in ivset
        ]
        csv_lines = [
            f"# total: lambda={format_rational(ivset.total_lambda)} mu={float(mu)!r}",
            "lo,hi",
        ] + [f"{r['lo']},{r['hi']}" for r in rows]
        payload = {
            "n": n,
            "method": method,
            "total_lambda": format_rational(ivset.total_lambda),
            "total_mu": float(mu),
            "intervals": rows,
        }
        return _emit(cfg, payload, csv_lines), EXIT_OK

    rows = []
    for n in ns:
        vals = []
        for method in methods:
            val = _sumlevel_value(method, n, u, mode, cfg, context)
            vals.append((method, val))
        ref = vals[0][1]
        for method, val in vals:
            if len(methods) > 1:
                if isinstance(val, float) or isinstance(ref, float):
                    agree = "yes" if abs(float(val) - float(ref)) <= 1e-6 * abs(float(ref)) else "no"
                else:
                    agree = "yes" if val == ref else "no"
            else:
                agree = None
            rows.append(
                {
                    "n": n,
                    "lambda": repr(val) if isinstance(val, float) else format_rational(val),
                    "method": method,
                    **({"agree": agree} if agree is not None else {}),
                }
            )
    header = "n,lambda,method" + (",agree" if len(methods) > 1 else "")
    csv_lines = [header] + [
        ",".join(str(r[k]) for k in header.split(",")) for r in rows
    ]
    return _emit(cfg, {"rows": rows}, csv_lines), EXIT_OK


def _cmd_preimage(cfg: RunConfig) -> tuple[str, int]:
    alpha, beta = cfg.args["alpha"], cfg.args["beta"]
    depth = cfg.args["depth"]
    mode = cfg.args["mode"]
    emit = cfg.args["emit"]
    base = Interval(alpha, beta)

    if emit == "set":
        ivset = preimage.preimage_set(base, depth)
        mu = ivset.total_mu(bits=cfg.precision) if alpha > 0 else None
        rows = [
            {"lo": format_rational(iv.lo), "hi": format_rational(iv.hi)} for iv in ivset
        ]
        head = f"# total: lambda={format_rational(ivset.total_lambda)}"
        if mu is not None:
            head += f" mu={float(mu)!r}"
        csv_lines = [head, "lo,hi"] + [f"{r['lo']},{r['hi']}" for r in rows]
        payload = {
            "depth": depth,
            "total_lambda": format_rational(ivset.total_lambda),
            **({"total_mu": float(mu)} if mu is not None else {}),
            "intervals": rows,
        }
        return _emit(cfg, payload, csv_lines), EXIT_OK

    report = preimage.preimage_measure(
        base, depth, mode="exact" if mode == "exact" else "float64", workers=cfg.threads
    )
    lam = (
        repr(report.lambda_total)
        if isinstance(report.lambda_total, float)
        else format_rational(report.lambda_total)
    )
    mu = "" if report.mu_total is None else repr(report.mu_total)
    row = {
        "depth": report.depth,
        "lambda": lam,
        "mu": report.mu_total,
        "interval_count": report.interval_count,
    }
    csv_lines = [
        "depth,lambda,mu,interval_count",
        f"{report.depth},{lam},{mu},{report.interval_count}",
    ]
    return _emit(cfg, {"rows": [row]}, csv_lines), EXIT_OK


def _cmd_transfer(cfg: RunConfig) -> tuple[str, int]:
    u = cfg.args["u"]
    K = cfg.args["n"]
    emit = cfg.args["emit"]
    if K > 10**6:
        raise CapacityError(f"iteration count {K} exceeds cap 10^6")
    context = _context_for(cfg.mesh_size) or transfer.get_default_context()

    if emit == "gridfn":
        vals = context.phi_iterate_values(K)
        rows = [{"x": repr(float(x)), "value": repr(float(v))} for x, v in zip(context.mesh, vals)]
        csv_lines = ["x,value"] + [f"{r['x']},{r['value']}" for r in rows]
        return _emit(cfg, {"order": K, "rows": rows}, csv_lines), EXIT_OK

    lam_grid = context.level_measures(u, K)
    exact_depth = min(K - 1, cfg.splice)
    exact_vals = context.exact_level_prefix(u, exact_depth)
    rows = []
    for n in range(1, K + 1):
        g = float(lam_grid[n - 1])
        if n - 1 <= exact_depth:
            ex = exact_vals[n - 1]
            rel = abs(g - float(ex)) / float(ex)
            rows.append(
                {"n": n, "lambda_grid": g, "lambda_exact": format_rational(ex), "rel_err": rel}
            )
        else:
            rows.append({"n": n, "lambda_grid": g, "lambda_exact": None, "rel_err": None})
    csv_lines = ["n,lambda_grid,lambda_exact,rel_err"] + [
        "{},{},{},{}".format(
            r["n"],
            repr(r["lambda_grid"]),
            r["lambda_exact"] or "",
            "" if r["rel_err"] is None else repr(r["rel_err"]),
        )
        for r in rows
    ]
    return _emit(cfg, {"rows": rows}, csv_lines), EXIT_OK


def _cmd_asympt(cfg: RunConfig) -> tuple[str, int]:
    law = cfg.args["law"]
    grid = cfg.args["grid"]
    context = _context_for(cfg.mesh_size)
    if law == "s":
        inv = 1 / cfg.args["u"]
        N = int((inv.numerator + inv.denominator - 1) // inv.denominator)
        report = asymptotic.laplace_law_fit(N, grid, context=context, splice=cfg.splice)
    elif law == "partial":
        ns = _ints_of(grid)
        report = asymptotic.partial_sum_law_fit(
            cfg.args["u"], ns, context=context, splice=cfg.splice
        )
    else:
        if cfg.args["alpha"] is None or cfg.args["beta"] is None:
            raise DomainError("--law pointwise requires --alpha and --beta")
        ns = _ints_of(grid)
        report = asymptotic.interval_law_fit(
            cfg.args["alpha"], cfg.args["beta"], ns, context=context, splice=cfg.splice
        )
    doc = report.as_json()
    csv_lines = [
        f"# law={doc['law']} K={doc['K']!r} verdict={doc['verdict']}",
        "n_or_sigma,value,error,scaled_error",
    ] + [
        f"{p['n_or_sigma']},{p['value']!r},{p['error']!r},{p['scaled_error']!r}"
        for p in doc["points"]
    ]
    return _emit(cfg, doc, csv_lines), EXIT_OK


def _ints_of(grid: list[float]) -> list[int]:
    ns = []
    for g in grid:
        if g != int(g) or g < 2:
            raise DomainError(f"n grid values must be integers >= 2, got {g}")
        ns.append(int(g))
    return ns


def _cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    suite = cfg.args["suite"]
    context = _context_for(cfg.mesh_size)
    checks = verify.run_suite(suite, context=context)
    failures = sum(1 for c in checks if not c.passed)
    rows = [{"name": c.name, "status": c.status, "detail": c.detail} for c in checks]
    csv_lines = [f"# suite={suite} failures={failures}", "name,status,detail"] + [
        "{},{},{}".format(r["name"], r["status"], r["detail"].replace(",", ";"))
        for r in rows
    ]
    payload = {"suite": suite, "failures": failures, "checks": rows}
    return _emit(cfg, payload, csv_lines), EXIT_VERIFY if failures else EXIT_OK


# -- argument wiring ------------------------------------------------------------


def _add_global_flags(p, suppress: bool) -> None:
    # registered on the main parser and (suppressed-default) on every
    # subparser, so they are accepted on either side of the subcommand
    kw = dict(default=argparse.SUPPRESS) if suppress else dict(default=None)
    p.add_argument("--format", choices=("csv", "json"), **kw)
    p.add_argument("--output", help="write to file instead of stdout", **kw)
    p.add_argument("--threads", type=int,
                   help=f"worker processes (default: ${ENV_THREADS} or 1)", **kw)
    p.add_argument("--config", help="key=value config file", **kw)
    p.add_argument("--mesh-size", type=int, help="grid node budget", **kw)
    p.add_argument("--precision", type=int,
                   help="bits for high-precision mu totals", **kw)
    p.add_argument("--splice", type=int,
                   help="exact prefix length for level-measure sequences", **kw)


def _build_parser() -> _Parser:
    p = _Parser(prog="farey", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_parser(name, **kwargs):
        q = sub.add_parser(name, **kwargs)
        _add_global_flags(q, suppress=True)
        return q

    sp = add_parser("sumlevel", help="level measures / interval sets of the digit-sum family")
    sp.add_argument("--n", required=True, help="level or range, e.g. 5 or 1..20")
    sp.add_argument("--method", default="sb",
                    help="comma list from sb,preimage,cf,transfer")
    sp.add_argument("--mode", choices=("exact", "float"), default="exact")
    sp.add_argument("--u", default="1/2", help="family base point (rational p/q)")
    sp.add_argument("--emit", choices=("measure", "set"), default="measure")

    pp = add_parser("preimage", help="measures / sets of iterated interval pullbacks")
    pp.add_argument("--alpha", required=True)
    pp.add_argument("--beta", required=True)
    pp.add_argument("--depth", type=int, required=True)
    pp.add_argument("--mode", choices=("exact", "float"), default="exact")
    pp.add_argument("--emit", choices=("measure", "set"), default="measure")

    bp = add_parser("stern-brocot", help="mediant refinement levels")
    bp.add_argument("--level", type=int, required=True)

    tp = add_parser("transfer", help="grid operator level measures / iterates")
    tp.add_argument("--u", default="1/2")
    tp.add_argument("--n", type=int, required=True, help="iteration count K")
    tp.add_argument("--mesh", type=int, default=None, help="mesh size for this run")
    tp.add_argument("--emit", choices=("lambda", "gridfn"), default="lambda")

    ap = add_parser("asympt", help="effective-law fit reports")
    ap.add_argument("--law", choices=("s", "partial", "pointwise"), required=True)
    ap.add_argument("--u", default="1/2")
    ap.add_argument("--alpha", default=None)
    ap.add_argument("--beta", default=None)
    ap.add_argument("--grid", default="1e2,1e3,1e4")

    vp = add_parser("verify", help="self-check suites")
    vp.add_argument("--suite", choices=("oracles", "lemmas", "laws", "all"), default="all")
    return p


def _resolve_config(ns: argparse.Namespace) -> RunConfig:
    file_cfg = _read_config_file(ns.config) if ns.config else {}

    def pick(flag_val, key, cast):
        if flag_val is not None:
            return flag_val
        if key in file_cfg:
            try:
                return cast(file_cfg[key])
            except ValueError as exc:
                raise DomainError(f"bad config value for {key}: {file_cfg[key]!r}") from exc
        return None

    threads = pick(ns.threads, "threads", int)
    if threads is None:
        env = os.environ.get(ENV_THREADS)
        if env is not None:
            try:
                threads = int(env)
            except ValueError as exc:
                raise DomainError(f"bad {ENV_THREADS} value {env!r}") from exc
    threads = 1 if threads is None else threads
    if threads < 1:
        raise DomainError(f"threads must be >= 1, got {threads}")

    fmt = pick(ns.format, "format", str)
    if fmt is None:
        fmt = "json" if ns.command in ("asympt", "verify") else "csv"
    if fmt not in ("csv", "json"):
        raise DomainError(f"format must be csv or json, got {fmt!r}")

    mesh_size = pick(ns.mesh_size, "mesh_size", int)
    if ns.command == "transfer" and getattr(ns, "mesh", None) is not None:
        mesh_size = ns.mesh
    mesh_size = GLOBAL_DEFAULTS["mesh_size"] if mesh_size is None else mesh_size
    precision = pick(ns.precision, "precision", int)
    precision = GLOBAL_DEFAULTS["precision"] if precision is None else precision
    splice = pick(ns.splice, "splice", int)
    splice = GLOBAL_DEFAULTS["splice"] if splice is None else splice
    if precision < 64:
        raise DomainError(f"precision must be >= 64 bits, got {precision}")
    if splice < 0 or splice > 22:
        raise DomainError(f"splice must be in 0..22, got {splice}")

    output = pick(ns.output, "output", str)

    args: dict = {}
    if ns.command == "sumlevel":
        args["n_list"] = _parse_n_range(ns.n)
        args["n"] = ns.n
        methods = [m.strip() for m in ns.method.split(",") if m.strip()]
        for m in methods:
            if m not in ("sb", "preimage", "cf", "transfer"):
                raise DomainError(f"unknown method {m!r}")
        args["methods"] = methods
        args["method"] = ",".join(methods)
        args["mode"] = ns.mode
        args["u"] = parse_rational(ns.u)
        args["emit"] = ns.emit
    elif ns.command == "preimage":
        args["alpha"] = parse_rational(ns.alpha)
        args["beta"] = parse_rational(ns.beta)
        args["depth"] = ns.depth
        args["mode"] = ns.mode
        args["emit"] = ns.emit
    elif ns.command == "stern-brocot":
        args["level"] = ns.level
    elif ns.command == "transfer":
        args["u"] = parse_rational(ns.u)
        args["n"] = ns.n
        args["emit"] = ns.emit
    elif ns.command == "asympt":
        args["law"] = ns.law
        args["u"] = parse_rational(ns.u)
        args["alpha"] = parse_rational(ns.alpha) if ns.alpha else None
        args["beta"] = parse_rational(ns.beta) if ns.beta else None
        args["grid"] = _parse_grid(ns.grid)
        args["grid_text"] = ns.grid
    elif ns.command == "verify":
        args["suite"] = ns.suite

    return RunConfig(
        command=ns.command,
        format=fmt,
        output=output,
        threads=threads,
        mesh_size=mesh_size,
        precision=precision,
        splice=splice,
        args=args,
    )


_COMMANDS = {
    "sumlevel": _cmd_sumlevel,
    "preimage": _cmd_preimage,
    "stern-brocot": _cmd_stern_brocot,
    "transfer": _cmd_transfer,
    "asympt": _cmd_asympt,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = _resolve_config(ns)
        text, code = _COMMANDS[cfg.command](cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (CapacityError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FareyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
