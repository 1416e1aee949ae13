"""Command-line entry points.

Subcommands: run, eta-table, plot-schedule, sharpness. Exit codes:
0 success, 2 some seeds failed but the experiment completed, 3 the
config or inputs were unusable. Everything is controlled by config
files and flags; no environment variables are consulted.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .errors import ConfigError
from .harness import (
    build_objective,
    emit_schedule_plot,
    eta_table,
    load_config,
    load_schedule_list,
    read_json,
    read_trace_csv,
    run_experiment,
)
from .objective import WeightDecayObjective
from .scheduler import parse_schedule
from .sharpness import sharpness_report

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    """Argument errors map to the config-error exit code, not argparse's 2."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="schedsam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config across its seeds")
    p_run.add_argument("config", help="experiment config file")
    p_run.add_argument("--out", help="override the output directory")
    p_run.add_argument("--seeds", help="override seeds, comma-separated")

    p_table = sub.add_parser("eta-table", help="expected-cost table for schedules")
    p_table.add_argument("schedules", help="file with one schedule string per line")
    p_table.add_argument("--steps", type=int, required=True, help="horizon T")
    p_table.add_argument("--out", help="also write eta_table.csv into this directory")

    p_plot = sub.add_parser("plot-schedule", help="emit (t, p_t, x_t) plot data for a run")
    p_plot.add_argument("report", help="per-seed run report JSON")
    p_plot.add_argument("--out", help="output directory (default: alongside the report)")

    p_sharp = sub.add_parser("sharpness", help="flatness diagnostics at a run's endpoint")
    p_sharp.add_argument("report", help="per-seed run report JSON")
    p_sharp.add_argument("--rho", type=float, help="probe radius (default: the run's rho)")
    p_sharp.add_argument("--out", help="also write <report>_sharpness.json here")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.out:
        config.output_dir = args.out
    if args.seeds:
        try:
            config.seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"--seeds must be comma-separated integers, got {args.seeds!r}") from None
        if not config.seeds:
            raise ConfigError("--seeds must list at least one seed")

    aggregate = run_experiment(config)
    for result in aggregate.results:
        if result.failed:
            print(f"seed {result.seed}: FAILED after {result.steps_completed} steps: {result.error}")
        else:
            line = f"seed {result.seed}: empirical_eta={result.empirical_eta:.6f}"
            line += f" final_train_loss={result.final_train_loss:.6g}"
            if result.eval_error is not None:
                line += f" eval_error={result.eval_error:.4f}"
            print(line)
    print(f"schedule {aggregate.schedule}  expected_eta={aggregate.expected_eta:.6f}")
    if aggregate.mean is not None:
        line = f"mean empirical_eta={aggregate.mean['empirical_eta']:.6f} (std {aggregate.std['empirical_eta']:.6f})"
        if aggregate.mean["eval_error"] is not None:
            line += f"  mean eval_error={aggregate.mean['eval_error']:.4f}"
        print(line)
    print(f"reports written to {config.output_dir}")
    return EXIT_PARTIAL if aggregate.failed_seeds else EXIT_OK


def _cmd_eta_table(args) -> int:
    schedules = load_schedule_list(args.schedules)
    if args.steps < 1:
        raise ConfigError(f"--steps must be positive, got {args.steps}")
    rows = eta_table(schedules, args.steps)
    width = max(len(r.schedule) for r in rows)
    print(f"{'schedule':<{width}}  {'exact':>10}  {'closed':>10}  {'published':>9}  erratum")
    for r in rows:
        pub = f"{r.published:.2f}" if r.published is not None else "-"
        flag = "YES" if r.erratum else ""
        print(f"{r.schedule:<{width}}  {r.exact:>10.6f}  {r.closed_form:>10.6f}  {pub:>9}  {flag}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "eta_table.csv")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["schedule", "exact", "closed_form", "published", "erratum"])
            for r in rows:
                writer.writerow(
                    [
                        r.schedule,
                        repr(r.exact),
                        repr(r.closed_form),
                        repr(r.published) if r.published is not None else "",
                        "true" if r.erratum else "false",
                    ]
                )
        print(f"table written to {path}")
    return EXIT_OK


def _load_run_report(path) -> dict:
    report = read_json(path)
    if report.get("kind") != "run":
        raise ConfigError(f"{path} is not a per-seed run report")
    return report


def _cmd_plot_schedule(args) -> int:
    report = _load_run_report(args.report)
    report_dir = os.path.dirname(os.path.abspath(args.report))
    trace = read_trace_csv(os.path.join(report_dir, report["trace_file"]))
    if not trace:
        raise ConfigError(f"{args.report}: trace is empty, nothing to plot")
    schedule = parse_schedule(report["schedule"])
    out_dir = args.out or report_dir
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.report))[0]
    path = os.path.join(out_dir, f"{stem}_schedule.csv")
    emit_schedule_plot(schedule, trace, path, total_steps=report["total_steps"])
    print(f"plot data written to {path}")
    return EXIT_OK


def _cmd_sharpness(args) -> int:
    report = _load_run_report(args.report)
    if report.get("final_theta") is None:
        raise ConfigError(f"{args.report}: run failed, no endpoint to probe")
    config = report["config"]
    obj, _ = build_objective(config["objective"])
    weight_decay = config["optimizer"].get("weight_decay", 0.0)
    if weight_decay:
        obj = WeightDecayObjective(obj, weight_decay)
    theta = np.asarray(report["final_theta"], dtype=np.float64)
    rho = args.rho if args.rho is not None else config["optimizer"]["rho"]
    if not rho > 0:
        raise ConfigError(f"--rho must be positive, got {rho}")

    result = sharpness_report(obj, theta, rho)
    print(f"proxy_gap={result.proxy_gap:.8g}")
    print(f"top_eigenvalue={result.top_eigenvalue:.8g}")
    print(f"rho_used={result.rho_used:g}")
    print(f"probe_count={result.probe_count}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        stem = os.path.splitext(os.path.basename(args.report))[0]
        path = os.path.join(args.out, f"{stem}_sharpness.json")
        payload = {
            "schema": 1,
            "kind": "sharpness",
            "report": os.path.basename(args.report),
            "proxy_gap": result.proxy_gap,
            "top_eigenvalue": result.top_eigenvalue,
            "rho_used": result.rho_used,
            "probe_count": result.probe_count,
        }
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        print(f"report written to {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "eta-table":
            return _cmd_eta_table(args)
        if args.command == "plot-schedule":
            return _cmd_plot_schedule(args)
        if args.command == "sharpness":
            return _cmd_sharpness(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
