"""Experiment orchestration: sweep configs, report emission, summaries.

A config names workloads, formats and partition sizes; ``run_experiment``
produces one :class:`~sparsebench.costmodel.RunReport` per (workload,
partition size, format) cell, in that nesting order.  Reports serialize to a
flat CSV (one row per cell, fixed column order, floats at 15 significant
digits) or to JSON (lossless round-trip via :func:`load_reports`, optionally
carrying per-partition metrics).  Outputs contain no timestamps: the same
config always emits byte-identical text, regardless of ``threads``.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import partition
from .costmodel import (
    CostConfig,
    PartitionMetrics,
    RunAggregates,
    RunReport,
    aggregate,
    tile_metrics,
)
from .errors import ConfigError, EmptyInputError, SparseBenchError, VerificationError
from .formats import FormatId, FormatParams, encode
from .spmv import spmv_dense, spmv_partitioned
from .workloads import WorkloadSpec, build_workload

ALL_FORMATS = tuple(FormatId)
DEFAULT_PARTITION_SIZES = (8, 16, 32)

SPMV_REL_TOLERANCE = 1e-9

#: Column order of the flat CSV report; one row per (workload, size, format).
CSV_COLUMNS = [
    "matrix_id",
    "kind",
    "n_rows",
    "n_cols",
    "matrix_nnz",
    "density",
    "band_width",
    "seed",
    "path",
    "format",
    "partition_size",
    "tile_count",
    "value_width_bytes",
    "index_width_bytes",
    "bcsr_block",
    "ell_min_width",
    "dot_cycles",
    "offset_cycles",
    "element_cycles",
    "scan_cycles",
    "assign_cycles",
    "row_fetch_cycles",
    "bus_bytes_per_cycle",
    "clock_hz",
    "bytes_total",
    "bytes_useful",
    "total_mem_cycles",
    "total_compute_cycles",
    "total_latency_cycles",
    "balance_ratio",
    "throughput_bytes_per_sec",
    "bandwidth_utilization",
    "avg_overhead",
]


def _strict_build(cls, data: dict, what: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown {what} keys: {unknown}")
    return cls(**data)


@dataclass
class ExperimentConfig:
    """Everything one benchmark invocation needs."""

    workloads: list[WorkloadSpec]
    formats: tuple[FormatId, ...] = ALL_FORMATS
    partition_sizes: tuple[int, ...] = DEFAULT_PARTITION_SIZES
    cost: CostConfig = field(default_factory=CostConfig)
    params: FormatParams = field(default_factory=FormatParams)
    verify_spmv: bool = False
    threads: int = 1
    include_per_partition: bool = False
    output_format: str = "csv"
    output_path: str | None = None

    def __post_init__(self):
        if not self.workloads:
            raise ConfigError("config needs at least one workload")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(
                f"output_format must be 'csv' or 'json', got {self.output_format!r}"
            )

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        kwargs = dict(data)
        if "workloads" in kwargs:
            kwargs["workloads"] = [
                _strict_build(WorkloadSpec, w, "workload") for w in kwargs["workloads"]
            ]
        else:
            raise ConfigError("config needs at least one workload")
        if "formats" in kwargs:
            kwargs["formats"] = tuple(FormatId.parse(f) for f in kwargs["formats"])
        if "partition_sizes" in kwargs:
            kwargs["partition_sizes"] = tuple(int(s) for s in kwargs["partition_sizes"])
        if "cost" in kwargs:
            kwargs["cost"] = _strict_build(CostConfig, kwargs["cost"], "cost")
        if "params" in kwargs:
            kwargs["params"] = _strict_build(FormatParams, kwargs["params"], "params")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path}: top level must be an object")
        return cls.from_dict(data)


def _verification_vector(length: int) -> np.ndarray:
    # Index-derived, deterministic, non-uniform enough to expose column bugs.
    return 1.0 + (5 * np.arange(length) % 13) / 100.0


def _verify_spmv(matrix, grid, fmt, params, matrix_id):
    x = _verification_vector(matrix.n_cols)
    want = spmv_dense(matrix, x)
    got = spmv_partitioned(grid, fmt, x, params)
    rel = np.abs(got - want) / np.maximum(np.abs(want), 1e-300)
    worst = int(np.argmax(rel))
    if rel[worst] > SPMV_REL_TOLERANCE:
        raise VerificationError(
            f"{matrix_id} format={fmt.value} size={grid.size}: SpMV mismatch at "
            f"element {worst}: got {got[worst]!r}, expected {want[worst]!r} "
            f"(rel err {rel[worst]:.3e})"
        )


def run_experiment(config: ExperimentConfig) -> list[RunReport]:
    """Run the full sweep and return reports in deterministic order.

    Nesting order is workload, then partition size, then format.  With
    ``threads > 1`` per-tile metrics are computed on a thread pool but
    assembled in submission order, so reports do not depend on scheduling.

    Raises:
        EmptyInputError: if a workload has no non-zero partitions (labelled
            with the workload id), mirroring the aggregate precondition.
        VerificationError: if ``verify_spmv`` is set and the pipeline output
            disagrees with the dense reference beyond 1e-9 relative error.
    """
    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    cost_echo = asdict(config.cost)
    params_echo = asdict(config.params)
    reports: list[RunReport] = []
    try:
        for spec in config.workloads:
            try:
                matrix = build_workload(spec)
            except SparseBenchError as exc:
                raise type(exc)(f"workload {spec.matrix_id}: {exc}") from exc
            workload_echo = {
                "kind": spec.kind,
                "n": spec.n,
                "density": spec.density,
                "band_width": spec.band_width,
                "seed": spec.seed,
                "path": spec.path,
                "n_rows": matrix.n_rows,
                "n_cols": matrix.n_cols,
                "matrix_nnz": matrix.nnz,
            }
            for size in config.partition_sizes:
                grid = partition(matrix, size)
                if not grid.tiles:
                    raise EmptyInputError(
                        f"workload {spec.matrix_id}: no non-zero partitions "
                        f"at size {size}"
                    )
                for fmt in config.formats:
                    def job(tile, _fmt=fmt):
                        return tile_metrics(encode(tile, _fmt, config.params), config.cost)

                    if pool is not None:
                        metrics = list(pool.map(job, grid.tiles))
                    else:
                        metrics = [job(tile) for tile in grid.tiles]
                    aggregates = aggregate(metrics, config.cost)
                    if config.verify_spmv:
                        _verify_spmv(matrix, grid, fmt, config.params, spec.matrix_id)
                    reports.append(
                        RunReport(
                            matrix_id=spec.matrix_id,
                            format=fmt,
                            size=size,
                            aggregates=aggregates,
                            per_partition=tuple(metrics),
                            workload=dict(workload_echo),
                            cost=dict(cost_echo),
                            params=dict(params_echo),
                        )
                    )
    finally:
        if pool is not None:
            pool.shutdown()
    return reports


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.15g}"
    return str(value)


def _csv_row(report: RunReport) -> dict:
    w, a = report.workload, report.aggregates
    cost = report.cost
    kind = w["kind"]
    return {
        "matrix_id": report.matrix_id,
        "kind": kind,
        "n_rows": w["n_rows"],
        "n_cols": w["n_cols"],
        "matrix_nnz": w["matrix_nnz"],
        "density": w["density"] if kind == "random" else None,
        "band_width": w["band_width"] if kind == "band" else None,
        "seed": w["seed"] if kind == "random" else None,
        "path": w["path"] if kind == "file" else None,
        "format": report.format.value,
        "partition_size": report.size,
        "tile_count": a.tile_count,
        "value_width_bytes": report.params["value_width_bytes"],
        "index_width_bytes": report.params["index_width_bytes"],
        "bcsr_block": report.params["bcsr_block"],
        "ell_min_width": report.params["ell_min_width"],
        # effective per-row dot latency at this partition size
        "dot_cycles": CostConfig(**cost).dot_latency(report.size),
        "offset_cycles": cost["offset_cycles"],
        "element_cycles": cost["element_cycles"],
        "scan_cycles": cost["scan_cycles"],
        "assign_cycles": cost["assign_cycles"],
        "row_fetch_cycles": cost["row_fetch_cycles"],
        "bus_bytes_per_cycle": cost["bus_bytes_per_cycle"],
        "clock_hz": cost["clock_hz"],
        "bytes_total": a.bytes_total,
        "bytes_useful": a.bytes_useful,
        "total_mem_cycles": a.total_mem_cycles,
        "total_compute_cycles": a.total_compute_cycles,
        "total_latency_cycles": a.total_latency_cycles,
        "balance_ratio": a.balance_ratio,
        "throughput_bytes_per_sec": a.throughput_bytes_per_sec,
        "bandwidth_utilization": a.bandwidth_utilization,
        "avg_overhead": a.avg_overhead,
    }


def _reports_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        writer.writerow({k: _fmt_cell(v) for k, v in _csv_row(report).items()})
    return buf.getvalue()


def _reports_json(reports, include_per_partition: bool) -> str:
    docs = []
    for report in reports:
        doc = {
            "matrix_id": report.matrix_id,
            "format": report.format.value,
            "partition_size": report.size,
            "workload": report.workload,
            "cost": report.cost,
            "params": report.params,
            "aggregates": asdict(report.aggregates),
        }
        if include_per_partition:
            doc["per_partition"] = [asdict(m) for m in report.per_partition]
        docs.append(doc)
    return json.dumps({"reports": docs}, indent=2) + "\n"


def emit_report(
    reports,
    output_format: str = "csv",
    path=None,
    include_per_partition: bool = False,
) -> str:
    """Serialize reports; write to ``path`` when given and return the text."""
    if output_format == "csv":
        text = _reports_csv(reports)
    elif output_format == "json":
        text = _reports_json(reports, include_per_partition)
    else:
        raise ConfigError(f"output_format must be 'csv' or 'json', got {output_format!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def load_reports(path) -> list[RunReport]:
    """Read back a JSON report file written by :func:`emit_report`."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"report file {path}: {exc}") from exc
    reports = []
    for doc in data.get("reports", []):
        per_partition = tuple(
            PartitionMetrics(**m) for m in doc.get("per_partition", [])
        )
        reports.append(
            RunReport(
                matrix_id=doc["matrix_id"],
                format=FormatId.parse(doc["format"]),
                size=int(doc["partition_size"]),
                aggregates=RunAggregates(**doc["aggregates"]),
                per_partition=per_partition,
                workload=doc.get("workload", {}),
                cost=doc.get("cost", {}),
                params=doc.get("params", {}),
            )
        )
    return reports


# ---------------------------------------------------------------------------
# summary normalization
# ---------------------------------------------------------------------------

#: (metric name, higher_is_better) in presentation order.
SUMMARY_METRICS = (
    ("avg_overhead", False),
    ("total_latency_cycles", False),
    ("total_mem_cycles", False),
    ("balance_closeness", False),
    ("throughput_bytes_per_sec", True),
    ("bandwidth_utilization", True),
)


@dataclass(frozen=True)
class SummaryEntry:
    raw: dict
    score: dict


@dataclass(frozen=True)
class SummaryTable:
    """Per workload group, min-max normalized scores per format.

    Scores lie in [0, 1] with 1 always best: lower-is-better metrics are
    inverted before normalization.  When every format ties on a metric the
    whole column scores 1.0.
    """

    group_by: str
    groups: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        columns = ["group", "format"]
        for name, _ in SUMMARY_METRICS:
            columns += [f"raw_{name}", f"score_{name}"]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for group, per_format in self.groups.items():
            for fmt_name, entry in per_format.items():
                row = [group, fmt_name]
                for name, _ in SUMMARY_METRICS:
                    row += [_fmt_cell(entry.raw[name]), _fmt_cell(entry.score[name])]
                writer.writerow(row)
        return buf.getvalue()

    def to_text(self) -> str:
        lines = []
        header = ["format"] + [name for name, _ in SUMMARY_METRICS]
        for group, per_format in self.groups.items():
            lines.append(f"== {self.group_by}: {group}")
            widths = [max(len(header[0]), 6)] + [len(h) for h in header[1:]]
            lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
            for fmt_name, entry in per_format.items():
                cells = [fmt_name.ljust(widths[0])]
                for (name, _), w in zip(SUMMARY_METRICS, widths[1:]):
                    cells.append(f"{entry.score[name]:.3f}".ljust(w))
                lines.append("  ".join(cells))
        return "\n".join(lines) + "\n"


def _raw_metrics(report: RunReport) -> dict:
    a = report.aggregates
    return {
        "avg_overhead": a.avg_overhead,
        "total_latency_cycles": float(a.total_latency_cycles),
        "total_mem_cycles": float(a.total_mem_cycles),
        "balance_closeness": abs(a.balance_ratio - 1.0),
        "throughput_bytes_per_sec": a.throughput_bytes_per_sec,
        "bandwidth_utilization": a.bandwidth_utilization,
    }


def normalize_summary(reports, group_by: str = "kind") -> SummaryTable:
    """Average raw metrics per (group, format), then min-max normalize.

    ``group_by`` is ``"kind"`` (workload family: random/band/file) or
    ``"matrix_id"`` for per-matrix tables.
    """
    if group_by not in ("kind", "matrix_id"):
        raise ConfigError(f"group_by must be 'kind' or 'matrix_id', got {group_by!r}")
    buckets: dict = {}
    for report in reports:
        group = report.workload.get(group_by) if group_by == "kind" else report.matrix_id
        buckets.setdefault(group, {}).setdefault(report.format.value, []).append(
            _raw_metrics(report)
        )
    if not buckets:
        raise EmptyInputError("no reports to summarize")

    groups = {}
    format_order = [f.value for f in FormatId]
    for group in sorted(buckets, key=str):
        per_format_raw = {}
        for fmt_name in format_order:
            rows = buckets[group].get(fmt_name)
            if rows:
                per_format_raw[fmt_name] = {
                    name: sum(r[name] for r in rows) / len(rows)
                    for name, _ in SUMMARY_METRICS
                }
        entries = {fmt_name: {} for fmt_name in per_format_raw}
        for name, higher_better in SUMMARY_METRICS:
            values = {f: per_format_raw[f][name] for f in per_format_raw}
            lo, hi = min(values.values()), max(values.values())
            for f, v in values.items():
                if hi == lo:
                    score = 1.0
                elif higher_better:
                    score = (v - lo) / (hi - lo)
                else:
                    score = (hi - v) / (hi - lo)
                entries[f][name] = score
        groups[group] = {
            f: SummaryEntry(raw=per_format_raw[f], score=entries[f])
            for f in per_format_raw
        }
    return SummaryTable(group_by=group_by, groups=groups)


def resolve_output_path(path) -> Path:
    """Resolve a report path; relative paths honor $SPARSEBENCH_OUTPUT_DIR."""
    path = Path(path)
    if not path.is_absolute():
        base = os.environ.get("SPARSEBENCH_OUTPUT_DIR")
        if base:
            path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path
