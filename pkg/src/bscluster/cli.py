"""Command-line entry points: simulate, summarize, bell."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .baselines import MethodId
from .experiment import (
    config_from_dict,
    preset,
    rows_from_csv,
    run_experiment,
    summarize,
    summary_to_csv,
    write_outputs,
)
from .partitions import bell_number


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bscluster",
        description="Base-station clustering simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a sweep experiment")
    sim.add_argument("--config", type=Path, help="JSON experiment config file")
    sim.add_argument("--preset", choices=("A", "B", "C"), help="built-in preset")
    sim.add_argument("--out", type=Path, required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="master seed override")
    sim.add_argument(
        "--methods",
        type=str,
        default=None,
        help="comma-separated method names (default: config/preset methods)",
    )
    sim.add_argument("--drops", type=int, default=None, help="realizations per point")
    sim.add_argument("--workers", type=int, default=1, help="parallel workers")

    summ = sub.add_parser("summarize", help="aggregate a results CSV")
    summ.add_argument("--in", dest="input", type=Path, required=True)
    summ.add_argument("--out", dest="output", type=Path, required=True)

    bell = sub.add_parser("bell", help="print a Bell number")
    bell.add_argument("--k", type=int, required=True)

    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.preset is not None:
        config = preset(args.preset)
    elif args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except OSError as exc:
            print(f"cannot read config {args.config}: {exc}", file=sys.stderr)
            return 1
        config = config_from_dict(data)
    else:
        print("simulate needs --config or --preset", file=sys.stderr)
        return 2

    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.drops is not None:
        overrides["num_drops"] = args.drops
    if args.methods is not None:
        overrides["methods"] = tuple(
            MethodId(name.strip()) for name in args.methods.split(",") if name.strip()
        )
    if overrides:
        config = dataclasses.replace(config, **overrides)

    rows = run_experiment(config, workers=args.workers)
    paths = write_outputs(config, rows, args.out)
    print(f"wrote {paths['results']} ({len(rows)} rows) and {paths['manifest']}")
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    try:
        text = args.input.read_text()
    except OSError as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return 1
    rows = rows_from_csv(text)
    sweep_name = None
    manifest_path = args.input.parent / "manifest.json"
    if manifest_path.exists():
        try:
            sweep_name = json.loads(manifest_path.read_text()).get("sweep_variable")
        except (OSError, json.JSONDecodeError):
            sweep_name = None
    summary = summarize(rows)
    args.output.parent.mkdir(parents=True, exist_ok=True)
    args.output.write_text(summary_to_csv(summary, sweep_name=sweep_name), newline="")
    print(f"wrote {args.output} ({len(summary)} summary rows)")
    return 0


def _cmd_bell(args: argparse.Namespace) -> int:
    print(bell_number(args.k))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "summarize":
        return _cmd_summarize(args)
    if args.command == "bell":
        return _cmd_bell(args)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
