"""Command-line interface.

Subcommands::

    eval      mean extinction time of one model at (lambda, p)
    compare   certified verdict: which strategy has the shorter mean lifetime
    scan      classify a (lambda, p) grid into phase-diagram regions (CSV)
    trace     bisect the lifetime-crossing points p_l, p_u at fixed lambda
    simulate  Monte Carlo estimate of the mean extinction time

Outputs are CSV rows on stdout (or a file for ``scan``) behind a
``# schema=1`` version line, or a JSON object with ``--format json``.
Numbers accept exact fractions ("15/17"); fraction and integer inputs are
classified against the critical thresholds in exact rational arithmetic.

Exit codes: 0 success, 2 invalid input, 3 out of regime (a compared mean
is not finite), 4 indeterminate-only result under ``--strict``.
"""

import argparse
import csv
import json
import math
import re
import sys
from fractions import Fraction

from .comparator import (
    DEFAULT_M_MAX,
    IndeterminateBandError,
    NoCrossingError,
    OutOfRegimeError,
    Verdict,
    compare_d2,
    compare_d3,
    compare_free,
    scan_region,
    trace_crossings,
)
from .formulas import (
    mean_time_free,
    mean_time_no_dispersion,
    mean_time_tree2,
    mean_time_tree3,
)
from .model import (
    FreeDispersion,
    InvalidParameterError,
    MeanKind,
    ModelParams,
    NoDispersion,
    TreeDispersion,
)
from .qproduct import PreconditionViolatedError, product_bounds_tight
from .simulator import SimConfig, simulate

__all__ = ["main"]

_SCHEMA_LINE = "# schema=1"
_TREE_MODEL = re.compile(r"^d(\d+)$")


def _parse_number(text: str):
    """Exact rationals for 'a/b' and integer literals; floats otherwise."""
    text = text.strip()
    try:
        if "/" in text:
            return Fraction(text)
        try:
            return int(text)
        except ValueError:
            return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        if math.isnan(value):
            return None
        return value
    if isinstance(value, Fraction):
        return str(value)
    return value


def _emit(args, header, row, notes=(), out=None):
    stream = out if out is not None else sys.stdout
    if args.format == "json":
        payload = {"schema": 1, **{k: _jsonable(v) for k, v in zip(header, row)}}
        if notes:
            payload["notes"] = list(notes)
        print(json.dumps(payload), file=stream)
    else:
        print(_SCHEMA_LINE, file=stream)
        for note in notes:
            print(f"# {note}", file=stream)
        writer = csv.writer(stream)
        writer.writerow(header)
        writer.writerow([_fmt(v) for v in row])


def _mean_fields(mean):
    if mean.kind is MeanKind.FINITE:
        return "finite", mean.time, mean.time
    if mean.kind is MeanKind.INFINITE:
        return "infinite", math.inf, math.inf
    return "survives-with-positive-probability", "", ""


def cmd_eval(args) -> int:
    params = ModelParams(args.lam, args.p)
    header = ["model", "lambda", "p", "regime", "mean_lo", "mean_hi"]
    if args.model == "A":
        if args.M is not None:
            interval = product_bounds_tight(params, args.M).affine(-1.0, 1.0 / params.lam_f)
        else:
            interval = mean_time_no_dispersion(params)
        row = [args.model, args.lam, args.p, "finite", interval.lo, interval.hi]
    else:
        fn = {"d2": mean_time_tree2, "d3": mean_time_tree3, "star": mean_time_free}[args.model]
        regime, lo, hi = _mean_fields(fn(params))
        row = [args.model, args.lam, args.p, regime, lo, hi]
    _emit(args, header, row)
    return 0


_VERDICT_NOTES = {
    Verdict.NO_DISPERSION_SHORTER: (
        "E[tau_A] < E[tau_{d}]: dispersion is the better longevity strategy"
    ),
    Verdict.DISPERSION_SHORTER: (
        "E[tau_{d}] < E[tau_A]: non-dispersion is the better longevity strategy"
    ),
    Verdict.INDETERMINATE: "certified bounds still overlap at M_max",
}


def cmd_compare(args) -> int:
    params = ModelParams(args.lam, args.p)
    fn = {"2": compare_d2, "3": compare_d3, "star": compare_free}[args.d]
    result = fn(params, args.M_max)
    label = "*" if args.d == "star" else args.d
    note = _VERDICT_NOTES[result.verdict].replace("{d}", label)
    header = ["d", "lambda", "p", "verdict", "lhs_lo", "lhs_hi", "rhs", "M"]
    row = [
        args.d,
        args.lam,
        args.p,
        result.verdict.value,
        result.f_bounds.lo,
        result.f_bounds.hi,
        result.rhs,
        result.M_used,
    ]
    _emit(args, header, row, notes=[note])
    if args.strict and result.verdict is Verdict.INDETERMINATE:
        return 4
    return 0


def _linspace(lo: float, hi: float, steps: int):
    if steps < 1:
        raise InvalidParameterError("steps must be >= 1")
    if steps == 1:
        return [lo]
    return [lo + i * (hi - lo) / (steps - 1) for i in range(steps)]


def cmd_scan(args) -> int:
    if not (0 < args.p_min <= args.p_max < 1):
        raise InvalidParameterError("need 0 < p-min <= p-max < 1")
    if not (0 < args.lambda_min <= args.lambda_max):
        raise InvalidParameterError("need 0 < lambda-min <= lambda-max")
    lams = _linspace(float(args.lambda_min), float(args.lambda_max), args.steps)
    ps = _linspace(float(args.p_min), float(args.p_max), args.steps)
    points = scan_region(lams, ps, int(args.d), args.M_max)
    stream = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        if args.format == "json":
            rows = [{"lambda": pt.lam, "p": pt.p, "region": pt.region.value} for pt in points]
            print(json.dumps({"schema": 1, "points": rows}), file=stream)
        else:
            print(_SCHEMA_LINE, file=stream)
            writer = csv.writer(stream)
            writer.writerow(["lambda", "p", "region"])
            for pt in points:
                writer.writerow([_fmt(pt.lam), _fmt(pt.p), pt.region.value])
    finally:
        if stream is not sys.stdout:
            stream.close()
    return 0


def cmd_trace(args) -> int:
    header = ["d", "lambda", "p_l", "p_u", "tol"]
    try:
        pair = trace_crossings(float(args.lam), int(args.d), args.tol, args.M_max)
    except NoCrossingError:
        _emit(args, header, [args.d, args.lam, "", "", args.tol], notes=["no crossing found"])
        return 0
    except IndeterminateBandError as exc:
        _emit(
            args,
            header,
            [args.d, args.lam, "", "", args.tol],
            notes=[f"indeterminate band [{exc.lo}, {exc.hi}] at M_max={exc.M_max}"],
        )
        return 4 if args.strict else 0
    notes = []
    if len(pair.crossings) != 2:
        notes.append(f"{len(pair.crossings)} crossings found: {[_fmt(c) for c in pair.crossings]}")
    _emit(args, header, [args.d, args.lam, pair.p_l, pair.p_u, args.tol], notes=notes)
    return 0


def cmd_simulate(args) -> int:
    params = ModelParams(args.lam, args.p)
    if args.model == "A":
        topo = NoDispersion()
    elif args.model == "star":
        topo = FreeDispersion()
    else:
        topo = TreeDispersion(int(_TREE_MODEL.match(args.model).group(1)))
    config = SimConfig(
        params=params,
        topo=topo,
        replicates=args.replicates,
        seed=args.seed,
        time_cap=args.time_cap,
        colony_cap=args.colony_cap,
    )
    trace_rows = [] if args.trace_file else None
    est = simulate(config, trace=trace_rows)
    notes = []
    thr = _warn_threshold(params, topo)
    if thr is not None:
        notes.append(f"p is within 2% of the critical threshold {thr}; "
                     "expect heavy tails and censoring")
    if est.censored_fraction > 0:
        notes.append(f"censored fraction {est.censored_fraction}; "
                     "mean is over uncensored runs only")
    header = [
        "model", "lambda", "p", "replicates", "seed",
        "mean", "std_error", "censored_fraction", "survival_fraction",
    ]
    row = [
        args.model, args.lam, args.p, args.replicates, args.seed,
        est.mean, est.std_error, est.censored_fraction, est.survival_fraction,
    ]
    _emit(args, header, row, notes=notes)
    if args.trace_file:
        with open(args.trace_file, "w", newline="") as fh:
            print(_SCHEMA_LINE, file=fh)
            writer = csv.writer(fh)
            writer.writerow(["replicate", "extinction_time", "max_colonies", "censored"])
            for rep, t, cols, cens in trace_rows:
                writer.writerow([rep, _fmt(t), cols, int(cens)])
    return 0


def _warn_threshold(params, topo):
    from .model import critical_survival

    if isinstance(topo, NoDispersion):
        return None
    thr = float(critical_survival(topo, params.lam_f))
    return thr if abs(params.p_f - thr) <= 0.02 * thr else None


def _model_kind(text: str) -> str:
    if text in ("A", "star") or _TREE_MODEL.match(text):
        if _TREE_MODEL.match(text) and int(_TREE_MODEL.match(text).group(1)) < 2:
            raise argparse.ArgumentTypeError("tree models need d >= 2")
        return text
    raise argparse.ArgumentTypeError(f"unknown model {text!r} (expected A, dN or star)")


def _add_common(parser):
    parser.add_argument("--format", choices=["csv", "json"], default="csv")


def _add_params(parser):
    parser.add_argument("--lambda", dest="lam", type=_parse_number, required=True,
                        help="growth rate (accepts fractions like 1/2)")
    parser.add_argument("--p", dest="p", type=_parse_number, required=True,
                        help="catastrophe survival probability in (0,1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binomcat",
        description="Mean extinction times under binomial catastrophes: "
                    "exact formulas, certified strategy comparison, Monte Carlo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a mean extinction time")
    p_eval.add_argument("--model", choices=["A", "d2", "d3", "star"], required=True)
    _add_params(p_eval)
    p_eval.add_argument("--M", type=int, default=None,
                        help="fixed truncation depth for model A (default: adaptive)")
    _add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_cmp = sub.add_parser("compare", help="certified strategy comparison")
    p_cmp.add_argument("--d", choices=["2", "3", "star"], required=True)
    _add_params(p_cmp)
    p_cmp.add_argument("--M-max", dest="M_max", type=int, default=DEFAULT_M_MAX)
    p_cmp.add_argument("--strict", action="store_true",
                       help="exit 4 when the verdict is indeterminate")
    _add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_scan = sub.add_parser("scan", help="region map over a (lambda, p) grid")
    p_scan.add_argument("--d", choices=["2", "3"], required=True)
    p_scan.add_argument("--lambda-min", type=float, required=True)
    p_scan.add_argument("--lambda-max", type=float, required=True)
    p_scan.add_argument("--p-min", type=float, required=True)
    p_scan.add_argument("--p-max", type=float, required=True)
    p_scan.add_argument("--steps", type=int, required=True,
                        help="grid points per axis")
    p_scan.add_argument("--M-max", dest="M_max", type=int, default=DEFAULT_M_MAX)
    p_scan.add_argument("--out", required=True, help="output CSV path, '-' for stdout")
    _add_common(p_scan)
    p_scan.set_defaults(func=cmd_scan)

    p_trace = sub.add_parser("trace", help="bisect the lifetime-crossing points")
    p_trace.add_argument("--d", choices=["2", "3"], required=True)
    p_trace.add_argument("--lambda", dest="lam", type=_parse_number, required=True)
    p_trace.add_argument("--tol", type=float, required=True)
    p_trace.add_argument("--M-max", dest="M_max", type=int, default=DEFAULT_M_MAX)
    p_trace.add_argument("--strict", action="store_true")
    _add_common(p_trace)
    p_trace.set_defaults(func=cmd_trace)

    p_sim = sub.add_parser("simulate", help="Monte Carlo mean extinction time")
    p_sim.add_argument("--model", type=_model_kind, required=True,
                       help="A, star, or dN for tree dispersion over N sites")
    _add_params(p_sim)
    p_sim.add_argument("--replicates", type=int, default=100_000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--time-cap", dest="time_cap", type=float, default=1e4)
    p_sim.add_argument("--colony-cap", dest="colony_cap", type=int, default=10_000_000)
    p_sim.add_argument("--trace-file", default=None,
                       help="write per-replicate outcomes to this CSV")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OutOfRegimeError as exc:
        print(f"out of regime: {exc}", file=sys.stderr)
        return 3
    except (InvalidParameterError, PreconditionViolatedError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
