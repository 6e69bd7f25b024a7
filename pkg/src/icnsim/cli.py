"""Command-line driver: single runs and strategy/loop-fraction sweeps.

``icnsim run scenario.txt`` executes one run and writes ``summary.csv`` plus
``timeseries.csv`` (and optionally the trace) into the output directory.
``icnsim sweep scenario.txt`` runs every strategy at every loop fraction
listed in the scenario's sweep section and emits one combined CSV.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import Optional

from .metrics import SUMMARY_COLUMNS, TIMESERIES_COLUMNS, summary_row, timeseries_rows
from .model import MS
from .scenario import (
    BUNDLED,
    Scenario,
    ScenarioError,
    bundled_scenario,
    load_scenario,
    parse_duration,
)
from .simulator import STRATEGIES, ConfigError, RunResult, run, validate_config


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", help=f"scenario file path, or one of: {', '.join(BUNDLED)}")
    parser.add_argument("--strategy", choices=STRATEGIES, help="override the scenario strategy")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    parser.add_argument("--duration", help="override the run length, e.g. 10s or 500ms")
    parser.add_argument("--mil", help="override the pending-entry lifetime, e.g. 1000ms")
    parser.add_argument("--out-dir", default="out", help="output directory (default: out)")
    parser.add_argument("--trace", action="store_true", help="write the trace log")
    parser.add_argument("--check", action="store_true", help="validate the config and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icnsim")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one scenario run")
    _add_common(run_p)
    run_p.add_argument(
        "--loop-fraction",
        type=float,
        help="set every consumer's weight on the scenario's loop prefix",
    )

    sweep_p = sub.add_parser("sweep", help="run strategies x loop fractions")
    _add_common(sweep_p)
    return parser


def _load(path: str) -> Scenario:
    if path in BUNDLED and not os.path.exists(path):
        return bundled_scenario(path)
    if not os.path.exists(path):
        raise ConfigError(f"scenario file not found: {path}")
    return load_scenario(path)


def _tag(config) -> str:
    tag = f"{config.name}_{config.strategy}"
    if config.loop_fraction is not None:
        tag += f"_f{config.loop_fraction:g}"
    return tag


def _write_csv(path: str, columns: list[str], rows: list[dict[str, str]]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _execute(scenario: Scenario, args, fractions: list[Optional[float]], strategies) -> int:
    duration = parse_duration(args.duration, 0, "--duration") if args.duration else None
    mil = parse_duration(args.mil, 0, "--mil") if args.mil else None

    results: list[RunResult] = []
    for strategy in strategies:
        for fraction in fractions:
            config = scenario.to_run_config(
                strategy=strategy,
                seed=args.seed,
                duration=duration,
                mil=mil,
                loop_fraction=fraction,
            )
            if args.check:
                validate_config(config)
                continue
            results.append(run(config))

    if args.check:
        print("config ok")
        return 0

    os.makedirs(args.out_dir, exist_ok=True)
    summary = [summary_row(r.metrics, r.config) for r in results]
    series: list[dict[str, str]] = []
    for result in results:
        series.extend(timeseries_rows(result.metrics, result.config))
    _write_csv(os.path.join(args.out_dir, "summary.csv"), SUMMARY_COLUMNS, summary)
    _write_csv(os.path.join(args.out_dir, "timeseries.csv"), TIMESERIES_COLUMNS, series)
    if args.trace:
        for result in results:
            path = os.path.join(args.out_dir, _tag(result.config) + ".trace")
            with open(path, "w") as handle:
                handle.write(result.trace.text())

    for result in results:
        m = result.metrics
        print(
            f"{_tag(result.config)}: interests={m.interests_generated} "
            f"ndo={m.ndo_deliveries} nack={m.nack_deliveries} "
            f"unanswered={m.unanswered_names} "
            f"pending_ms={m.avg_pit_pending_ms if m.avg_pit_pending_ms is None else round(m.avg_pit_pending_ms, 3)} "
            f"pit_size={m.avg_pit_size if m.avg_pit_size is None else round(m.avg_pit_size, 3)} "
            f"rtt_ms={m.rtt.avg_ms if m.rtt.avg_ms is None else round(m.rtt.avg_ms, 3)}"
        )
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = _load(args.scenario)
        if args.command == "run":
            fractions = [getattr(args, "loop_fraction", None)]
            strategies = [args.strategy or scenario.run.strategy]
            return _execute(scenario, args, fractions, strategies)
        # sweep
        if scenario.sweep is None:
            raise ConfigError(f"scenario {scenario.name}: no sweep section")
        fractions = list(scenario.sweep.fractions)
        strategies = [args.strategy] if args.strategy else list(STRATEGIES)
        return _execute(scenario, args, fractions, strategies)
    except (ConfigError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
