"""Command-line interface: run scenarios, query traces, replay metrics."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .designator import format_description
from .introspect import successful_fetch_and_deliver_params
from .scenario import (
    ConfigError,
    aggregate,
    decode_trace,
    load_config,
    replay_trace,
    run_scenario,
)
from .seeding import derive_seed


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planproj",
        description="Fetch-and-deliver scenario runner with plan projection",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="execute seeded scenario runs")
    run.add_argument("--scenario", required=True, help="scenario config file (JSON)")
    run.add_argument("--seed", type=int, default=0, help="master seed")
    run.add_argument("--projection", choices=["on", "off"], default=None,
                     help="override the config's projection switch")
    run.add_argument("--runs", type=int, default=1, help="number of scenario runs")
    run.add_argument("--projection-samples", type=int, default=None,
                     help="override the number of projection runs per segment")
    run.add_argument("--out", default=None, help="directory for trace and metrics files")
    run.add_argument("--format", choices=["table", "records"], default="table")

    query = commands.add_parser("query", help="extract fetch/deliver parameters from a trace")
    query.add_argument("--trace", required=True)

    replay = commands.add_parser("replay", help="recompute metrics from a trace file")
    replay.add_argument("--trace", required=True)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.scenario)
    if args.projection is not None:
        config.projection.enabled = args.projection == "on"
    if args.projection_samples is not None:
        config.projection.n_runs = args.projection_samples
    out_dir = Path(args.out) if args.out else None
    results = []
    records = []
    for index in range(args.runs):
        run_seed = derive_seed(args.seed, "run", index)
        run_dir = out_dir / f"run{index:03d}" if out_dir else None
        run = run_scenario(config, run_seed, out_dir=run_dir)
        results.append(run.metrics)
        records.extend(run.metrics.to_records())
        if args.format == "table":
            print(f"-- run {index} (seed {run_seed})")
            print(run.metrics.format_table())
            print()
    summary = aggregate(results)
    records.extend(summary.to_records())
    if args.format == "table":
        print(f"-- average over {args.runs} runs "
              f"({'with' if config.projection.enabled else 'without'} projection)")
        print(summary.format_table())
    else:
        for record in records:
            print(json.dumps(record, separators=(",", ":"), sort_keys=True))
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        metrics_path = out_dir / "metrics.jsonl"
        with metrics_path.open("w") as handle:
            for record in records:
                handle.write(json.dumps(record, separators=(",", ":"), sort_keys=True) + "\n")
    return 0


def _cmd_query(args: argparse.Namespace) -> int:
    data = Path(args.trace).read_bytes()
    _doc, tree = decode_trace(data)
    params = successful_fetch_and_deliver_params(tree, ())
    if params is None:
        print("no successful fetch-and-deliver parameters in this trace")
        return 0
    labels = ("pick navigation", "pick-up action", "place navigation", "place action")
    for label, desc in zip(labels, params):
        print(f"{label}:")
        print(format_description(desc, indent=2))
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    data = Path(args.trace).read_bytes()
    embedded, recomputed, consistent = replay_trace(data)
    print(json.dumps(recomputed, separators=(",", ":"), sort_keys=True))
    if not consistent:
        print("mismatch against embedded metrics:", file=sys.stderr)
        print(json.dumps(embedded, separators=(",", ":"), sort_keys=True), file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "query":
            return _cmd_query(args)
        if args.command == "replay":
            return _cmd_replay(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
