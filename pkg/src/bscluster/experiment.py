"""Monte Carlo experiment driver: sweeps, method dispatch, CSV output.

A run sweeps one scenario variable (MS speed or transmit power) over a
grid, draws ``num_drops`` position/shadowing realizations per grid point,
evaluates every requested clustering method on each realization, and emits
one row per (sweep value, drop, method).  Seeding is hierarchical: drop i
always uses stream i of the master seed, and method-internal randomness
uses a further sub-stream keyed by the method, so adding or removing
methods never changes the networks and all methods see common random
numbers.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .baselines import MethodId, exhaustive_best, kmeans_best
from .coalition_formation import run_formation
from .network import ScenarioConfig, derive_rng, generate_network
from .partitions import ENUMERATION_CAP, grand, random_partition, singletons
from .rate_model import LOG2_E, RateContext, throughput

SWEEP_VARIABLES = ("speed_kmh", "tx_power_dbm")
_SWEEP_FIELD = {"speed_kmh": "ms_speed_kmh", "tx_power_dbm": "tx_power_dbm"}

# sub-stream tags so method randomness never collides with network draws
_METHOD_STREAM = {m: i + 1 for i, m in enumerate(MethodId)}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: scenario, sweep grid, methods, seeding, output."""

    scenario: ScenarioConfig
    sweep_variable: str
    sweep_values: tuple[float, ...]
    num_drops: int = 500
    methods: tuple[MethodId, ...] = tuple(MethodId)
    master_seed: int = 0
    budgets: int | tuple[int, ...] | None = None
    output_dir: str | None = None

    def __post_init__(self) -> None:
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(
                f"sweep_variable must be one of {SWEEP_VARIABLES}, "
                f"got {self.sweep_variable!r}"
            )
        values = tuple(float(v) for v in self.sweep_values)
        if not values:
            raise ValueError("sweep grid must be nonempty")
        if any(b >= a for a, b in zip(values[1:], values)):
            raise ValueError("sweep grid must be strictly increasing")
        object.__setattr__(self, "sweep_values", values)
        if self.num_drops < 1:
            raise ValueError("num_drops must be >= 1")
        methods = tuple(sorted(set(self.methods), key=lambda m: m.value))
        if not methods:
            raise ValueError("at least one method is required")
        object.__setattr__(self, "methods", methods)
        if (
            MethodId.EXHAUSTIVE in methods
            and self.scenario.num_users > ENUMERATION_CAP
        ):
            raise ValueError(
                f"exhaustive search needs K <= {ENUMERATION_CAP}, "
                f"got K={self.scenario.num_users}"
            )

    def scenario_at(self, sweep_value: float) -> ScenarioConfig:
        return replace(self.scenario, **{_SWEEP_FIELD[self.sweep_variable]: sweep_value})


@dataclass(frozen=True)
class ResultRow:
    """One (method, sweep point, drop) outcome."""

    method: str
    sweep_value: float
    drop_index: int
    sum_throughput: float
    sum_throughput_nats: float
    num_coalitions: int
    max_coalition_size: int
    prelog: float
    num_deviations: int
    num_attempts: int
    structure: str


RESULT_FIELDS = tuple(f.name for f in dataclasses.fields(ResultRow))


def _evaluate_drop(
    config: ExperimentConfig, sweep_value: float, drop: int
) -> list[ResultRow]:
    scenario = config.scenario_at(sweep_value)
    network = generate_network(scenario, derive_rng(config.master_seed, drop))
    ctx = RateContext.from_network(network, scenario)
    num = scenario.num_users
    rows: list[ResultRow] = []
    for method in config.methods:
        deviations = 0
        attempts = 0
        if method is MethodId.GRAND:
            structure = grand(num)
        elif method is MethodId.SINGLETONS:
            structure = singletons(num)
        elif method is MethodId.EXHAUSTIVE:
            structure, _ = exhaustive_best(ctx)
        elif method is MethodId.RANDOM:
            structure = random_partition(
                num, derive_rng(config.master_seed, drop, _METHOD_STREAM[method])
            )
        elif method is MethodId.KMEANS:
            structure = kmeans_best(
                ctx,
                network.bs_positions,
                derive_rng(config.master_seed, drop, _METHOD_STREAM[method]),
            )
        elif method is MethodId.FORMATION:
            structure, trace = run_formation(ctx, budgets=config.budgets)
            deviations = trace.num_deviations
            attempts = trace.num_attempts
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unhandled method {method}")
        report = throughput(ctx, structure)
        rows.append(
            ResultRow(
                method=method.value,
                sweep_value=sweep_value,
                drop_index=drop,
                sum_throughput=report.sum,
                sum_throughput_nats=report.sum / LOG2_E,
                num_coalitions=structure.num_coalitions,
                max_coalition_size=structure.max_coalition_size,
                prelog=report.prelog,
                num_deviations=deviations,
                num_attempts=attempts,
                structure=structure.to_text(),
            )
        )
    return rows


def _evaluate_task(args: tuple[ExperimentConfig, float, int]) -> list[ResultRow]:
    return _evaluate_drop(*args)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[ResultRow]:
    """All result rows for the experiment, in canonical order.

    Canonical order sorts by (sweep value, drop, method name) regardless of
    how many workers executed the tasks, so output is reproducible from
    (config, master_seed) alone.
    """
    tasks = [
        (config, value, drop)
        for value in config.sweep_values
        for drop in range(config.num_drops)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_evaluate_task, tasks, chunksize=8))
    else:
        chunks = [_evaluate_task(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r.sweep_value, r.drop_index, r.method))
    return rows


@dataclass(frozen=True)
class SummaryRow:
    """Aggregate of one (method, sweep value) cell."""

    method: str
    sweep_value: float
    num_rows: int
    sum_throughput_mean: float
    sum_throughput_stderr: float
    sum_throughput_p10: float
    sum_throughput_p50: float
    sum_throughput_p90: float
    num_coalitions_mean: float
    num_attempts_mean: float


SUMMARY_FIELDS = tuple(f.name for f in dataclasses.fields(SummaryRow))


def summarize(rows: Sequence[ResultRow]) -> list[SummaryRow]:
    """Mean, standard error, and percentiles per (method, sweep value)."""
    if not rows:
        raise ValueError("no rows to summarize")
    cells: dict[tuple[str, float], list[ResultRow]] = {}
    for row in rows:
        cells.setdefault((row.method, row.sweep_value), []).append(row)
    summaries = []
    for (method, value), cell in sorted(cells.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        sums = np.array([r.sum_throughput for r in cell])
        n = len(sums)
        stderr = float(np.std(sums, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        p10, p50, p90 = (float(p) for p in np.percentile(sums, [10, 50, 90]))
        summaries.append(
            SummaryRow(
                method=method,
                sweep_value=value,
                num_rows=n,
                sum_throughput_mean=float(np.mean(sums)),
                sum_throughput_stderr=stderr,
                sum_throughput_p10=p10,
                sum_throughput_p50=p50,
                sum_throughput_p90=p90,
                num_coalitions_mean=float(
                    np.mean([r.num_coalitions for r in cell])
                ),
                num_attempts_mean=float(np.mean([r.num_attempts for r in cell])),
            )
        )
    return summaries


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    """RFC 4180 text for the result rows (header matches the field names)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(RESULT_FIELDS)
    for row in rows:
        writer.writerow([getattr(row, f) for f in RESULT_FIELDS])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[ResultRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != RESULT_FIELDS:
        raise ValueError(f"unexpected results header: {header}")
    rows = []
    for record in reader:
        if not record:
            continue
        values = dict(zip(RESULT_FIELDS, record))
        rows.append(
            ResultRow(
                method=values["method"],
                sweep_value=float(values["sweep_value"]),
                drop_index=int(values["drop_index"]),
                sum_throughput=float(values["sum_throughput"]),
                sum_throughput_nats=float(values["sum_throughput_nats"]),
                num_coalitions=int(values["num_coalitions"]),
                max_coalition_size=int(values["max_coalition_size"]),
                prelog=float(values["prelog"]),
                num_deviations=int(values["num_deviations"]),
                num_attempts=int(values["num_attempts"]),
                structure=values["structure"],
            )
        )
    return rows


def summary_to_csv(
    summaries: Iterable[SummaryRow], sweep_name: str | None = None
) -> str:
    """Summary CSV; optionally duplicates sweep_value under its real name."""
    fields = list(SUMMARY_FIELDS)
    if sweep_name and sweep_name not in fields:
        fields.insert(2, sweep_name)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(fields)
    for s in summaries:
        record = {f: getattr(s, f) for f in SUMMARY_FIELDS}
        if sweep_name and sweep_name not in SUMMARY_FIELDS:
            record[sweep_name] = s.sweep_value
        writer.writerow([record[f] for f in fields])
    return buf.getvalue()


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "scenario": dataclasses.asdict(config.scenario),
        "sweep_variable": config.sweep_variable,
        "sweep_values": list(config.sweep_values),
        "num_drops": config.num_drops,
        "methods": [m.value for m in config.methods],
        "master_seed": config.master_seed,
        "budgets": list(config.budgets)
        if isinstance(config.budgets, tuple)
        else config.budgets,
    }


def config_from_dict(data: Mapping) -> ExperimentConfig:
    scenario = ScenarioConfig(**data["scenario"])
    budgets = data.get("budgets")
    if isinstance(budgets, list):
        budgets = tuple(int(b) for b in budgets)
    return ExperimentConfig(
        scenario=scenario,
        sweep_variable=data["sweep_variable"],
        sweep_values=tuple(data["sweep_values"]),
        num_drops=int(data.get("num_drops", 500)),
        methods=tuple(MethodId(m) for m in data.get(
            "methods", [m.value for m in MethodId]
        )),
        master_seed=int(data.get("master_seed", 0)),
        budgets=budgets,
    )


def manifest_for(config: ExperimentConfig) -> dict:
    blob = json.dumps(config_to_dict(config), sort_keys=True).encode()
    return {
        "config": config_to_dict(config),
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "master_seed": config.master_seed,
        "sweep_variable": config.sweep_variable,
        "code_version": __version__,
    }


def write_outputs(
    config: ExperimentConfig, rows: Sequence[ResultRow], out_dir: str | Path
) -> dict[str, Path]:
    """Write results.csv plus the manifest sidecar; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results_path = out / "results.csv"
    manifest_path = out / "manifest.json"
    results_path.write_text(rows_to_csv(rows), newline="")
    manifest_path.write_text(
        json.dumps(manifest_for(config), indent=2, sort_keys=True) + "\n"
    )
    return {"results": results_path, "manifest": manifest_path}


def preset(name: str) -> ExperimentConfig:
    """Built-in experiment presets A, B, and C."""
    power_grid = (-6.0, 0.0, 6.0, 12.0, 18.0, 24.0, 30.0)
    if name == "A":
        return ExperimentConfig(
            scenario=ScenarioConfig(num_users=8, bs_antennas=12, ms_antennas=6),
            sweep_variable="speed_kmh",
            sweep_values=(3.0, 10.0, 30.0, 60.0, 120.0, 250.0),
            methods=(
                MethodId.FORMATION,
                MethodId.GRAND,
                MethodId.SINGLETONS,
                MethodId.RANDOM,
                MethodId.KMEANS,
            ),
        )
    if name == "B":
        return ExperimentConfig(
            scenario=ScenarioConfig(num_users=8, bs_antennas=4, ms_antennas=2),
            sweep_variable="tx_power_dbm",
            sweep_values=power_grid,
            methods=tuple(MethodId),
        )
    if name == "C":
        return ExperimentConfig(
            scenario=ScenarioConfig(num_users=16, bs_antennas=4, ms_antennas=2),
            sweep_variable="tx_power_dbm",
            sweep_values=power_grid,
            methods=(
                MethodId.FORMATION,
                MethodId.GRAND,
                MethodId.SINGLETONS,
                MethodId.RANDOM,
                MethodId.KMEANS,
            ),
        )
    raise ValueError(f"unknown preset {name!r} (expected A, B, or C)")
