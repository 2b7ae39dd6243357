"""Command-line front end.

Subcommands::

    doublepool optimize --p 0.01112 --k 1,2
    doublepool sweep --p-min 0.001 --p-max 0.2 --points 500 --grid log
    doublepool simulate --n 1012 --fixed-positives 11 --k 2 --s 23 --trials 10000 --seed 42
    doublepool figure-data 4 --format csv --out fig4.csv

Exit codes: 0 success, 1 domain/computation error, 2 usage error.

Every output carries a metadata block (comment lines in CSV, a
``metadata`` object in JSON) holding the tool version, the effective
configuration and a canonical command line that reproduces the output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import shlex
import sys

import numpy as np

from . import __version__
from .errors import PoolingError
from .optimizer import SearchBounds, _integer_min, _savings, integer_optimum
from .simulator import Bernoulli, FixedCount, SimConfig, run_simulation

TOOL = "doublepool"

FIGURES = {
    1: ("p", "s1_opt"),
    2: ("p", "s2_opt"),
    3: ("p", "cost_1", "cost_2"),
    4: ("p", "savings_percent"),
}

TRIAL_COLUMNS = (
    "trial",
    "pool_tests",
    "individual_retests",
    "total_tests",
    "positives",
    "detected_positives",
    "missed_positives",
    "suspect_negatives",
)


class UsageError(Exception):
    pass


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _num(x) -> str:
    # Shortest round-trip form, for reproducible command lines.
    return repr(float(x))


def _k_list(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not ks or any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError(f"rounds must be integers >= 1, got {text!r}")
    return sorted(set(ks))


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _add_bounds(parser):
    parser.add_argument("--s-max", type=_positive_int, default=10000)
    parser.add_argument("--practical-cap", type=_positive_int, default=None)


def _add_output(parser):
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", default="-", help="output path (default: stdout)")


def _add_grid(parser):
    parser.add_argument("--p-min", type=float, default=0.001)
    parser.add_argument("--p-max", type=float, default=0.2)
    parser.add_argument("--grid", choices=("lin", "log"), default="log")
    parser.add_argument("--points", type=_positive_int, default=500)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="optimal pool size for each number of rounds")
    p.add_argument("--p", type=float, required=True, help="prevalence, as a decimal")
    p.add_argument("--k", type=_k_list, default=[1, 2], help="comma-separated rounds, e.g. 1,2")
    _add_bounds(p)
    _add_output(p)

    p = sub.add_parser("sweep", help="optima, costs and savings over a grid of p")
    _add_grid(p)
    p.add_argument("--k", type=_k_list, default=[1, 2])
    _add_bounds(p)
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte-Carlo run of the pooling protocol")
    p.add_argument("--n", type=_positive_int, required=True, help="patients per trial")
    model = p.add_mutually_exclusive_group(required=True)
    model.add_argument("--p", type=float, help="Bernoulli prevalence")
    model.add_argument("--fixed-positives", type=int, help="exact number of infected patients")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--s", type=_positive_int, required=True)
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fn-rate", type=float, default=0.0, help="per-pool false-negative probability")
    p.add_argument("--emit-trials", metavar="PATH", default=None, help="write per-trial CSV")
    p.add_argument("--workers", type=_positive_int, default=1, help="processes (output unaffected)")
    _add_output(p)

    p = sub.add_parser("figure-data", help="data series behind the four summary figures")
    p.add_argument("which", type=int, choices=sorted(FIGURES))
    _add_grid(p)
    _add_bounds(p)
    _add_output(p)
    return parser


def _bounds(args) -> SearchBounds:
    if args.practical_cap is not None and not 2 <= args.practical_cap <= args.s_max:
        raise UsageError("--practical-cap must lie in [2, --s-max]")
    if args.s_max < 2:
        raise UsageError("--s-max must be >= 2")
    return SearchBounds(s_max=args.s_max, practical_cap=args.practical_cap)


def _bounds_argv(args) -> list[str]:
    out = ["--s-max", str(args.s_max)]
    if args.practical_cap is not None:
        out += ["--practical-cap", str(args.practical_cap)]
    return out


def _grid(args) -> np.ndarray:
    if not 0.0 < args.p_min < args.p_max < 1.0:
        raise UsageError("need 0 < --p-min < --p-max < 1")
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    if args.grid == "log":
        return np.geomspace(args.p_min, args.p_max, args.points)
    return np.linspace(args.p_min, args.p_max, args.points)


def _grid_argv(args) -> list[str]:
    return [
        "--p-min", _num(args.p_min),
        "--p-max", _num(args.p_max),
        "--grid", args.grid,
        "--points", str(args.points),
    ]


def _render(fmt: str, metadata: dict, columns, rows) -> str:
    if fmt == "json":
        doc = {"metadata": metadata, "columns": list(columns), "rows": rows}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# {TOOL} {metadata['version']}\n")
    buf.write(f"# command: {metadata['command_line']}\n")
    buf.write(f"# config: {json.dumps(metadata['config'], sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue()


def _metadata(command: str, argv: list[str], config: dict) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "argv": argv,
        "command_line": shlex.join([TOOL, command, *argv]),
        "config": config,
    }


def _cmd_optimize(args):
    bounds = _bounds(args)
    base = integer_optimum(args.p, 1, bounds)
    rows = []
    for k in args.k:
        plan = base if k == 1 else integer_optimum(args.p, k, bounds)
        row = plan.as_dict()
        row["savings_vs_k1_percent"] = (
            100.0 * (base.expected_cost - plan.expected_cost) / base.expected_cost
        )
        rows.append(row)
    columns = (
        "p", "k", "s_integer", "s_continuous", "expected_cost", "baseline_cost",
        "beneficial", "cap_binding", "savings_vs_k1_percent", "savings_vs_individual_percent",
    )
    argv = ["--p", _num(args.p), "--k", ",".join(map(str, args.k)), *_bounds_argv(args),
            "--format", args.format]
    config = {"p": args.p, "k": args.k, "s_max": args.s_max, "practical_cap": args.practical_cap}
    return _render(args.format, _metadata("optimize", argv, config), columns, rows)


def sweep_row(p: float, ks, bounds: SearchBounds) -> dict:
    """One grid point: integer optima and costs for each k plus double-vs-single savings."""
    cap = bounds.effective_cap
    row = {"p": p}
    for k in sorted(set(ks) | {1, 2}):
        s, cost = _integer_min(p, k, cap)
        row[f"s{k}_opt"] = s
        row[f"cost_{k}"] = cost
    row["savings_percent"] = _savings(p, cap)
    return row


def _sweep_columns(ks) -> list[str]:
    ks = sorted(set(ks) | {1, 2})
    return ["p", *[f"s{k}_opt" for k in ks], *[f"cost_{k}" for k in ks], "savings_percent"]


def _cmd_sweep(args):
    bounds = _bounds(args)
    grid = _grid(args)
    rows = [sweep_row(float(p), args.k, bounds) for p in grid]
    argv = [*_grid_argv(args), "--k", ",".join(map(str, args.k)), *_bounds_argv(args),
            "--format", args.format]
    config = {
        "p_min": args.p_min, "p_max": args.p_max, "grid": args.grid, "points": args.points,
        "k": args.k, "s_max": args.s_max, "practical_cap": args.practical_cap,
    }
    return _render(args.format, _metadata("sweep", argv, config), _sweep_columns(args.k), rows)


def _cmd_figure_data(args):
    bounds = _bounds(args)
    grid = _grid(args)
    columns = FIGURES[args.which]
    rows = []
    for p in grid:
        full = sweep_row(float(p), (1, 2), bounds)
        rows.append({c: full[c] for c in columns})
    argv = [str(args.which), *_grid_argv(args), *_bounds_argv(args), "--format", args.format]
    config = {
        "figure": args.which, "p_min": args.p_min, "p_max": args.p_max, "grid": args.grid,
        "points": args.points, "s_max": args.s_max, "practical_cap": args.practical_cap,
    }
    return _render(args.format, _metadata("figure-data", argv, config), columns, rows)


def _cmd_simulate(args):
    if args.p is not None:
        infection = Bernoulli(args.p)
        model_argv = ["--p", _num(args.p)]
    else:
        infection = FixedCount(args.fixed_positives)
        model_argv = ["--fixed-positives", str(args.fixed_positives)]
    config = SimConfig(
        n_patients=args.n,
        infection=infection,
        k=args.k,
        s=args.s,
        trials=args.trials,
        master_seed=args.seed,
        pool_fn_rate=args.fn_rate,
    )
    report = run_simulation(config, workers=args.workers, keep_trials=args.emit_trials is not None)
    if args.emit_trials is not None:
        with open(args.emit_trials, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRIAL_COLUMNS)
            for i, outcome in enumerate(report.outcomes):
                d = outcome.as_dict()
                writer.writerow([i, *(d[c] for c in TRIAL_COLUMNS[1:])])
    row = {**report.as_dict(), "n_patients": config.n_patients, "k": config.k, "s": config.s}
    columns = (
        "n_patients", "k", "s", "trials", "mean_total_tests", "mean_tests_per_patient",
        "std_error", "analytic_cost", "empirical_sensitivity", "total_positives", "total_detected",
    )
    argv = ["--n", str(args.n), *model_argv, "--k", str(args.k), "--s", str(args.s),
            "--trials", str(args.trials), "--seed", str(args.seed),
            "--fn-rate", _num(args.fn_rate), "--format", args.format]
    if args.emit_trials is not None:
        argv += ["--emit-trials", args.emit_trials]
    return _render(args.format, _metadata("simulate", argv, config.as_dict()), columns, [row])


COMMANDS = {
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "figure-data": _cmd_figure_data,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except PoolingError as exc:
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return 1
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
