"""One-line-per-method sweep figures with error bars.

Input is the summary CSV written by ``bscluster summarize``: one row per
(method, sweep value) with mean/stderr/percentile columns.  No statistics
are computed here; the figure is a pure rendering of the summary.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

#: stderr column paired with each plottable mean column, when one exists
_ERRORBAR_FOR = {"sum_throughput_mean": "sum_throughput_stderr"}

_MARKERS = ["o", "s", "^", "v", "D", "x", "*", "P"]


class SchemaError(ValueError):
    """The CSV does not carry the columns the plot needs."""


@dataclass
class PlotSpec:
    """What to draw: input summary, x column, y column, method filter."""

    input_csv: Path
    x_column: str
    output_path: Path
    y_column: str = "sum_throughput_mean"
    methods: list[str] | None = None
    x_label: str | None = None
    y_label: str | None = None
    log_x: bool = False
    overwrite: bool = False


def _load_summary(spec: PlotSpec) -> pd.DataFrame:
    try:
        frame = pd.read_csv(spec.input_csv)
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{spec.input_csv} is empty") from exc
    required = {"method", spec.x_column, spec.y_column}
    missing = required - set(frame.columns)
    if missing:
        raise SchemaError(
            f"{spec.input_csv} is missing columns {sorted(missing)}; "
            f"header has {list(frame.columns)}"
        )
    if frame.empty:
        raise SchemaError(f"{spec.input_csv} has a header but no rows")
    return frame


def plot_sweep(spec: PlotSpec) -> Path:
    """Render one curve per method over the sweep; returns the output path.

    Raises SchemaError when the CSV lacks the referenced columns or the
    method filter selects nothing, and FileExistsError when the output
    exists and overwriting was not requested.
    """
    frame = _load_summary(spec)
    if spec.methods:
        frame = frame[frame["method"].isin(spec.methods)]
        if frame.empty:
            raise SchemaError(f"no rows left after filtering methods={spec.methods}")
    out = Path(spec.output_path)
    if out.exists() and not spec.overwrite:
        raise FileExistsError(f"{out} exists; pass overwrite to replace it")

    stderr_column = _ERRORBAR_FOR.get(spec.y_column)
    if stderr_column is not None and stderr_column not in frame.columns:
        stderr_column = None

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for idx, (method, group) in enumerate(sorted(frame.groupby("method"))):
        group = group.sort_values(spec.x_column)
        errors = group[stderr_column] if stderr_column is not None else None
        ax.errorbar(
            group[spec.x_column],
            group[spec.y_column],
            yerr=errors,
            label=method,
            marker=_MARKERS[idx % len(_MARKERS)],
            capsize=3 if errors is not None else 0,
        )
    if spec.log_x:
        ax.set_xscale("log")
    ax.set_xlabel(spec.x_label or spec.x_column)
    ax.set_ylabel(spec.y_label or spec.y_column)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out
