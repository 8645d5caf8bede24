"""Command-line front end.

    ivpquad integrate --id 6 [--trace steps.csv] [--dump sol.json]
    ivpquad integrate --suite closed15 --format csv
    ivpquad bender --y0 1..10 --xmax 24
    ivpquad double --defaults-table3 [--b1 1 --b2 1] [--dump-j J.json | --load-j J.json]
    ivpquad eval --load sol.json 0.25 0.5

Exit status: 0 when every run meets its tolerance, 1 on a numerical failure
or a missed tolerance, 2 on a usage error.
"""
import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

from . import __version__
from .errors import ConfigurationError, IvpQuadError, SolutionFormatError
from .kernels import BACKEND
from .propagator import ToleranceConfig, propagate
from .solution import SolutionFunction
from .problems import bender, corpus, double_range

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SMOOTH_RTOL = 1e-12
ROUGH_RTOL = 1e-8
BENDER_ATOL = 1e-8
DOUBLE_RTOL = 2e-13


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    problem: str
    value: float
    reference: float | None
    provenance: str
    abs_err: float | None
    rel_err: float | None
    tolerance: str
    ok: bool
    n_evals: int
    n_elements: int
    n_inner: int | None
    avg_width: float
    evals_per_element: float
    x_end: float
    wall_time: float
    config: dict

    COLUMNS = ("problem", "value", "reference", "provenance", "abs_err", "rel_err",
               "tolerance", "ok", "n_evals", "n_elements", "n_inner", "avg_width",
               "evals_per_element", "x_end", "wall_time", "config")

    @classmethod
    def build(cls, problem, value, reference, provenance, tol_kind, tol, stats,
              x_end, wall_time, config, n_inner=None):
        value = float(value)
        abs_err = rel_err = None
        if reference is not None:
            abs_err = abs(value - reference)
            rel_err = abs_err / max(abs(reference), 1e-300)
        if reference is None or tol_kind is None:
            ok = math.isfinite(value)
            tolerance = "finite"
        else:
            err = rel_err if tol_kind == "rel" else abs_err
            ok = bool(err <= tol)
            tolerance = f"{tol_kind}<={tol!r}"
        n_el = max(stats.n_elements, 1)
        return cls(problem, value, reference, provenance, abs_err, rel_err,
                   tolerance, ok, stats.n_evals, stats.n_elements, n_inner,
                   float(x_end) / n_el if x_end is not None else 0.0,
                   stats.n_evals / n_el, float(x_end), wall_time, config)

    def row(self):
        out = []
        for name in self.COLUMNS:
            v = getattr(self, name)
            if v is None:
                out.append("")
            elif name == "config":
                out.append(json.dumps(v, sort_keys=True))
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out

    @classmethod
    def from_row(cls, row):
        """Inverse of :meth:`row` for one parsed CSV record (a dict)."""
        kw = {}
        for f in fields(cls):
            raw = row[f.name]
            if f.name == "config":
                kw[f.name] = json.loads(raw)
            elif raw == "":
                kw[f.name] = None
            elif f.name in ("problem", "provenance", "tolerance"):
                kw[f.name] = raw
            elif f.name == "ok":
                kw[f.name] = raw == "True"
            elif f.name in ("n_evals", "n_elements", "n_inner"):
                kw[f.name] = int(raw)
            else:
                kw[f.name] = float(raw)
        return cls(**kw)


def _config_echo(config):
    d = config.as_dict()
    d["x_stop"] = repr(d["x_stop"]) if math.isinf(d["x_stop"]) else d["x_stop"]
    return d


def emit(reports, fmt, stream):
    if fmt == "json":
        json.dump([asdict(r) for r in reports], stream, indent=1, default=repr)
        stream.write("\n")
    elif fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(RunReport.COLUMNS)
        for r in reports:
            w.writerow(r.row())
    else:
        head = f"{'problem':<22} {'value':>24} {'rel err':>9} {'N':>9} {'elements':>9} {'ok':>4}"
        stream.write(head + "\n")
        for r in reports:
            rel = "" if r.rel_err is None else f"{r.rel_err:.2e}"
            n = f"{r.n_evals}" if r.n_inner is None else f"{r.n_inner}+{r.n_evals}"
            stream.write(f"{r.problem:<22} {r.value!r:>24} {rel:>9} {n:>9} "
                         f"{r.n_elements:>9} {'yes' if r.ok else 'NO':>4}\n")


def _config_from_args(args, base):
    if getattr(args, "paper_defaults", False):
        return base
    changes = {}
    if args.M is not None:
        changes["M"] = args.M
    if args.q1 is not None:
        changes["first_step"] = 2.0 * args.q1
    if args.drel is not None:
        changes["delta_rel"] = args.drel
    if args.dabs is not None:
        changes["delta_abs"] = args.dabs
    if args.predictor is not None:
        changes["predictor"] = args.predictor
    return base.replace(**changes) if changes else base


def _write_trace(path, solution):
    trace = solution.stats.trace or []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x_left", "width", "y_right", "rel_err", "slope_err",
                    "slope_tol", "bisections", "forced"])
        for t in trace:
            f_right = abs(float(t["f_right"]))
            rel = float(t["err"]) / f_right if f_right > 0 else math.inf
            w.writerow([repr(float(t["x_left"])), repr(float(t["width"])),
                        repr(float(t["y_right"])), repr(rel), repr(float(t["err"])),
                        repr(float(t["tol"])), t["bisections"], t["forced"]])


# subcommands -------------------------------------------------------------

def run_corpus_problem(problem_id, config, trace=False):
    """One corpus row; returns ``(report, solution)``."""
    p = corpus.get(problem_id)
    t0 = time.perf_counter()
    sol = propagate(p.integrand, p.a, 0.0, p.b, config,
                    singular_start=p.singular_start, trace=trace)
    wall = time.perf_counter() - t0
    tol = SMOOTH_RTOL if p.smooth else ROUGH_RTOL
    report = RunReport.build(
        f"closed15#{p.id}", sol.value, p.reference_value, p.provenance, "rel",
        tol, sol.stats, sol.x_end, wall, _config_echo(config))
    return report, sol


def _report_only(problem_id, config):
    return run_corpus_problem(problem_id, config)[0]


def cmd_integrate(args):
    if (args.id is None) == (args.suite is None):
        raise UsageError("give exactly one of --id or --suite")
    if args.suite is not None:
        if args.suite != "closed15":
            raise UsageError(f"unknown suite {args.suite!r}")
        ids = [p.id for p in corpus.corpus()]
    else:
        try:
            ids = [corpus.get(args.id).id]
        except KeyError as exc:
            raise UsageError(str(exc)) from exc
    if len(ids) > 1 and (args.trace or args.dump):
        raise UsageError("--trace/--dump need a single problem (--id)")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    config = _config_from_args(args, ToleranceConfig())
    if len(ids) == 1:
        report, sol = run_corpus_problem(ids[0], config, trace=bool(args.trace))
        if args.trace:
            _write_trace(args.trace, sol)
        if args.dump:
            sol.save(args.dump)
        return [report]
    if args.jobs == 1:
        return [_report_only(i, config) for i in ids]
    # map keeps the output in id order whatever finishes first
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        return list(pool.map(_report_only, ids, [config] * len(ids)))


def _parse_y0(text):
    values = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise UsageError(f"empty range {part!r}")
            values.extend(range(lo, hi + 1))
        elif part:
            values.append(float(part))
    if not values:
        raise UsageError("no initial values given")
    return values


def cmd_bender(args):
    try:
        y0s = _parse_y0(args.y0)
    except ValueError as exc:
        raise UsageError(f"bad --y0: {exc}") from exc
    if not args.xmax > 0:
        raise UsageError("--xmax must be positive")
    config = _config_from_args(args, bender.default_config())
    reports = []
    for y0 in y0s:
        t0 = time.perf_counter()
        sol = bender.solve_bender(y0, args.xmax, config, trace=bool(args.trace))
        wall = time.perf_counter() - t0
        ref = None
        if args.xmax == 24 and float(y0).is_integer() and int(y0) in bender.TABLE2:
            ref = bender.TABLE2[int(y0)]
        label = f"bender y0={y0:g}"
        reports.append(RunReport.build(
            label, sol.value, ref, "published y(24)" if ref is not None else "",
            "abs" if ref is not None else None, BENDER_ATOL, sol.stats, sol.x_end,
            wall, _config_echo(config)))
        if args.drift is not None:
            again = bender.solve_bender(y0, args.xmax, config.replace(delta_rel=args.drift))
            reports.append(RunReport.build(
                f"{label} drel={args.drift:g}", again.value, sol.value,
                f"drift vs drel={config.delta_rel:g}", "abs", 5e-13, again.stats,
                again.x_end, 0.0, _config_echo(config.replace(delta_rel=args.drift))))
        if args.trace and len(y0s) == 1:
            _write_trace(args.trace, sol)
        if args.dump and len(y0s) == 1:
            sol.save(args.dump)
    return reports


def _double_specs(args):
    if args.spec:
        try:
            spec = double_range.DoubleRangeSpec.from_json(args.spec)
        except OSError as exc:
            raise UsageError(f"cannot read spec file: {exc}") from exc
        return [(f"double {args.spec}", spec, None)]
    if args.defaults_table3:
        if (args.b1 is None) != (args.b2 is None):
            raise UsageError("give both --b1 and --b2, or neither for the full grid")
        keys = [(args.b1, args.b2)] if args.b1 is not None else list(double_range.TABLE3)
        out = []
        for b1, b2 in keys:
            spec = double_range.DoubleRangeSpec.table3(b1, b2)
            ref = double_range.TABLE3.get((b1, b2))
            out.append((f"double b1={b1:g} b2={b2:g}", spec, ref[2] if ref else None))
        return out
    needed = ("l1", "m1", "a1", "b1", "l2", "m2", "a2", "b2")
    if any(getattr(args, n) is None for n in needed):
        raise UsageError("give --spec FILE, --defaults-table3, or all of "
                         "--l1 --m1 --a1 --b1 --l2 --m2 --a2 --b2")
    spec = double_range.DoubleRangeSpec(args.l1, args.m1, args.a1, args.b1,
                                        args.l2, args.m2, args.a2, args.b2)
    return [("double custom", spec, None)]


def cmd_double(args):
    try:
        specs = _double_specs(args)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from exc
    if (args.dump_j or args.load_j) and len({s.inner_key() for _, s, _ in specs}) > 1:
        raise UsageError("--dump-j/--load-j need a single inner parameter set")
    config = _config_from_args(args, ToleranceConfig())
    cache = {}
    if args.load_j:
        J = SolutionFunction.load(args.load_j)
        if not J.has_tail:
            raise UsageError("loaded J has no converged tail")
        cache[specs[0][1].inner_key()] = J
    reports = []
    for label, spec, ref in specs:
        t0 = time.perf_counter()
        J = cache.get(spec.inner_key())
        res = double_range.double_range_integral(spec, config, inner=J)
        cache[spec.inner_key()] = res.inner
        wall = time.perf_counter() - t0
        reports.append(RunReport.build(
            label, res.value, ref, "published exact I" if ref is not None else "",
            "rel" if ref is not None else None, DOUBLE_RTOL, res.outer.stats,
            res.outer.x_end, wall, _config_echo(config), n_inner=res.n_inner))
        if args.dump_j:
            res.inner.save(args.dump_j)
    return reports


def cmd_eval(args):
    sol = SolutionFunction.load(args.load)
    out = []
    for x in args.x:
        out.append({"x": x, "y": sol.eval(x), "dydx": sol.eval_derivative(x)})
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ivpquad", description="Integration as an initial value problem.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--M", type=int, help="basis size (default 13)")
        p.add_argument("--q1", type=float, help="first half-width (default 0.25)")
        p.add_argument("--drel", type=float, help="relative tolerance")
        p.add_argument("--dabs", type=float, help="absolute tolerance")
        p.add_argument("--predictor", choices=("controller", "taylor"))
        p.add_argument("--paper-defaults", action="store_true",
                       help="ignore tolerance flags and use the published settings")
        p.add_argument("--format", choices=("table", "csv", "json"), default="table")
        p.add_argument("--trace", metavar="PATH", help="write per-element CSV")
        p.add_argument("--dump", metavar="PATH", help="write the solution as JSON")

    p = sub.add_parser("integrate", help="closed corpus problems")
    p.add_argument("--id", type=int)
    p.add_argument("--suite", help="closed15 runs every corpus row")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for suite runs (default 1)")
    common(p)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("bender", help="y' = cos(pi x y)")
    p.add_argument("--y0", default="1", help="values, e.g. 1..10 or 1,3,5.5")
    p.add_argument("--xmax", type=float, default=24.0)
    p.add_argument("--drift", type=float, metavar="DREL",
                   help="rerun at this tolerance and report the change")
    common(p)
    p.set_defaults(func=cmd_bender)

    p = sub.add_parser("double", help="double-range integral")
    p.add_argument("--spec", metavar="FILE", help="JSON DoubleRangeSpec")
    p.add_argument("--defaults-table3", action="store_true")
    for name, typ in (("l1", int), ("m1", int), ("a1", float), ("b1", float),
                      ("l2", int), ("m2", int), ("a2", float), ("b2", float)):
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--dump-j", metavar="PATH")
    p.add_argument("--load-j", metavar="PATH")
    common(p)
    p.set_defaults(func=cmd_double)

    p = sub.add_parser("eval", help="evaluate a dumped solution")
    p.add_argument("--load", required=True, metavar="PATH")
    p.add_argument("x", type=float, nargs="+")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except (UsageError, ConfigurationError) as exc:
        parser.print_usage(sys.stderr)
        print(f"ivpquad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolutionFormatError, OSError) as exc:
        print(f"ivpquad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, OSError) else EXIT_FAIL
    except IvpQuadError as exc:
        print(f"ivpquad: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.command == "eval":
        _emit_points(result, args.format, stdout)
        return EXIT_OK
    emit(result, args.format, stdout)
    return EXIT_OK if all(r.ok for r in result) else EXIT_FAIL


def _emit_points(points, fmt, stream):
    if fmt == "json":
        json.dump(points, stream)
        stream.write("\n")
        return
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["x", "y", "dydx"])
        for p in points:
            w.writerow([repr(p["x"]), repr(p["y"]), repr(p["dydx"])])
        return
    for p in points:
        stream.write(f"{p['x']!r:>24} {p['y']!r:>24} {p['dydx']!r:>24}\n")


def parse_csv(text):
    """Reports back from :func:`emit` CSV output."""
    return [RunReport.from_row(r) for r in csv.DictReader(io.StringIO(text))]


if __name__ == "__main__":
    sys.exit(main())
