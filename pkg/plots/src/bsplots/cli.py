"""CLI: render a sweep figure from a summary CSV."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plot import PlotSpec, SchemaError, plot_sweep


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bscluster-plot",
        description="Plot bscluster summary sweeps with error bars",
    )
    parser.add_argument("--in", dest="input", type=Path, required=True,
                        help="summary CSV from `bscluster summarize`")
    parser.add_argument("--x", dest="x_column", required=True,
                        help="x-axis column, e.g. speed_kmh or sweep_value")
    parser.add_argument("--out", dest="output", type=Path, required=True,
                        help="output image path (extension picks the format)")
    parser.add_argument("--y", dest="y_column", default="sum_throughput_mean",
                        help="y-axis column (default: sum_throughput_mean)")
    parser.add_argument("--methods", default=None,
                        help="comma-separated method filter")
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    parser.add_argument("--logx", action="store_true", help="logarithmic x axis")
    parser.add_argument("--force", action="store_true",
                        help="overwrite an existing output file")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    methods = (
        [m.strip() for m in args.methods.split(",") if m.strip()]
        if args.methods
        else None
    )
    spec = PlotSpec(
        input_csv=args.input,
        x_column=args.x_column,
        output_path=args.output,
        y_column=args.y_column,
        methods=methods,
        x_label=args.xlabel,
        y_label=args.ylabel,
        log_x=args.logx,
        overwrite=args.force,
    )
    try:
        out = plot_sweep(spec)
    except (SchemaError, FileNotFoundError, FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
