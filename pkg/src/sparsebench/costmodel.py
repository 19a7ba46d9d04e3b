"""Analytical latency model for a streaming decode-then-multiply pipeline.

Every partition flows through two overlapped stages: its streams are fetched
from memory (each :class:`~sparsebench.formats.NamedArray` is one parallel
channel) while the decoder reconstructs dense rows and hands each emitted row
to a dot-product unit.  Per partition the pipeline pays
``max(memory, compute)`` cycles; a run's total latency is the sum of that
maximum over all non-zero partitions.

The decode cost of a partition depends only on its format and sparsity
pattern:

* ``DENSE``  -- free (rows stream straight to the dot units).
* ``CSR``    -- per non-zero row, one offsets-table access plus one cycle per
  stored element of that row.
* ``CSC``    -- per reconstructed row the decoder scans every stored entry,
  so ``size * nnz`` scan steps.
* ``BCSR``   -- per non-zero block-row, one offsets access plus one cycle per
  stored block (block columns unpack in parallel).
* ``COO``    -- one assignment per stored tuple.
* ``LIL``    -- one row-record fetch per non-zero row plus one for the
  terminator record.
* ``ELL``    -- one assignment per row with the column loop fully unrolled;
  independent of density and of the realized width.
* ``DIA``    -- per reconstructed row the decoder traverses every stored
  diagonal, so ``size * n_diagonals`` scan steps.

The per-row dot product costs ``ceil(log2(size)) + 2`` cycles by default (a
balanced adder tree plus the multiply stage), overridable via
``CostConfig.dot_cycles``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .errors import ConfigError, EmptyInputError
from .formats import EncodedPartition, FormatId, emitted_row_count, stored_diagonals


@dataclass(frozen=True)
class CostConfig:
    """Cycle costs of the pipeline primitives; all strictly positive."""

    dot_cycles: int | None = None  # per-row dot latency; None derives from size
    offset_cycles: int = 2         # one extra access into an offsets table
    element_cycles: int = 1        # streaming one sequential element
    scan_cycles: int = 1           # testing one candidate during a scan
    assign_cycles: int = 1         # one direct assignment
    row_fetch_cycles: int = 2      # fetching one row record from on-chip RAM
    bus_bytes_per_cycle: int = 8   # memory bus width per stream
    clock_hz: float = 250e6        # pipeline clock

    def __post_init__(self):
        for name in (
            "offset_cycles",
            "element_cycles",
            "scan_cycles",
            "assign_cycles",
            "row_fetch_cycles",
            "bus_bytes_per_cycle",
        ):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.dot_cycles is not None and self.dot_cycles < 1:
            raise ConfigError("dot_cycles must be >= 1 when set")
        if not self.clock_hz > 0:
            raise ConfigError("clock_hz must be positive")

    def dot_latency(self, size: int) -> int:
        """Per-row dot-product latency at a given partition size."""
        if self.dot_cycles is not None:
            return self.dot_cycles
        return ceil(log2(size)) + 2


@dataclass(frozen=True)
class PartitionMetrics:
    """Everything the aggregator needs about one encoded partition."""

    grid_row: int
    grid_col: int
    size: int
    nnz: int
    nnz_rows: int
    emitted_rows: int
    bytes_total: int
    bytes_useful: int
    mem_cycles: int
    decomp_cycles: int
    compute_cycles: int
    overhead: float


@dataclass(frozen=True)
class RunAggregates:
    """Whole-run metrics; every field is recomputable from the per-partition list."""

    tile_count: int
    bytes_total: int
    bytes_useful: int
    total_mem_cycles: int
    total_compute_cycles: int
    total_latency_cycles: int
    balance_ratio: float
    throughput_bytes_per_sec: float
    bandwidth_utilization: float
    avg_overhead: float


@dataclass(frozen=True)
class RunReport:
    """One (workload, format, partition size) cell of an experiment."""

    matrix_id: str
    format: FormatId
    size: int
    aggregates: RunAggregates
    per_partition: tuple[PartitionMetrics, ...]
    workload: dict
    cost: dict
    params: dict

    @property
    def total_latency_cycles(self) -> int:
        return self.aggregates.total_latency_cycles

    @property
    def balance_ratio(self) -> float:
        return self.aggregates.balance_ratio

    @property
    def throughput_bytes_per_sec(self) -> float:
        return self.aggregates.throughput_bytes_per_sec

    @property
    def bandwidth_utilization(self) -> float:
        return self.aggregates.bandwidth_utilization

    @property
    def avg_overhead(self) -> float:
        return self.aggregates.avg_overhead


def _decomp_cycles(enc: EncodedPartition, cfg: CostConfig) -> int:
    fmt = enc.format
    if fmt is FormatId.DENSE:
        return 0
    if fmt is FormatId.CSR:
        return enc.nnz_rows * cfg.offset_cycles + enc.nnz * cfg.element_cycles
    if fmt is FormatId.CSC:
        return enc.size * enc.nnz * cfg.scan_cycles
    if fmt is FormatId.BCSR:
        counts = enc.array("offsets").data
        nz_block_rows = int(np.count_nonzero(counts))
        n_blocks = int(counts.sum())
        return nz_block_rows * cfg.offset_cycles + n_blocks * cfg.element_cycles
    if fmt is FormatId.COO:
        return enc.nnz * cfg.assign_cycles
    if fmt is FormatId.LIL:
        return (enc.nnz_rows + 1) * cfg.row_fetch_cycles
    if fmt is FormatId.ELL:
        return enc.size * cfg.assign_cycles
    if fmt is FormatId.DIA:
        return enc.size * len(stored_diagonals(enc)) * cfg.scan_cycles
    raise ConfigError(f"no decode cost defined for {fmt}")


def compute_latency(enc: EncodedPartition, cfg: CostConfig) -> tuple[int, int]:
    """Decode cycles and total compute cycles of one partition.

    Returns:
        ``(decomp_cycles, compute_cycles)`` where ``compute_cycles`` adds one
        dot-product latency per emitted row on top of the decode cost.
    """
    decomp = _decomp_cycles(enc, cfg)
    emitted = emitted_row_count(enc)
    return decomp, decomp + emitted * cfg.dot_latency(enc.size)


def memory_latency(enc: EncodedPartition, cfg: CostConfig) -> int:
    """Cycles to fetch the slowest stream; streams transfer in parallel."""
    bus = cfg.bus_bytes_per_cycle
    return max((-(-arr.nbytes // bus) for arr in enc.arrays), default=0)


def overhead_ratio(metrics: "PartitionMetrics", cfg: CostConfig) -> float:
    """Compute latency relative to the dense baseline of the same tile.

    The dense pipeline spends exactly one dot latency per row, so the ratio
    is ``compute_cycles / (size * dot_latency)``; the dense format itself
    always measures exactly 1.0.
    """
    return metrics.compute_cycles / (metrics.size * cfg.dot_latency(metrics.size))


def tile_metrics(enc: EncodedPartition, cfg: CostConfig) -> PartitionMetrics:
    """Evaluate the full per-partition metric set for one encoding."""
    decomp, compute = compute_latency(enc, cfg)
    mem = memory_latency(enc, cfg)
    dot = cfg.dot_latency(enc.size)
    return PartitionMetrics(
        grid_row=enc.grid_row,
        grid_col=enc.grid_col,
        size=enc.size,
        nnz=enc.nnz,
        nnz_rows=enc.nnz_rows,
        emitted_rows=emitted_row_count(enc),
        bytes_total=enc.total_bytes,
        bytes_useful=enc.useful_bytes,
        mem_cycles=mem,
        decomp_cycles=decomp,
        compute_cycles=compute,
        overhead=compute / (enc.size * dot),
    )


def aggregate(metrics, cfg: CostConfig) -> RunAggregates:
    """Fold per-partition metrics into run-level aggregates.

    Per partition the pipeline pays ``max(mem_cycles, compute_cycles)``;
    the balance ratio averages ``mem/compute`` (1.0 means perfectly
    balanced); throughput counts every transmitted byte against total
    latency at the configured clock; bandwidth utilization is the useful
    fraction of transmitted bytes.

    Raises:
        EmptyInputError: on an empty metrics list.
    """
    metrics = list(metrics)
    if not metrics:
        raise EmptyInputError("cannot aggregate zero partitions")
    bytes_total = sum(m.bytes_total for m in metrics)
    bytes_useful = sum(m.bytes_useful for m in metrics)
    total_mem = sum(m.mem_cycles for m in metrics)
    total_compute = sum(m.compute_cycles for m in metrics)
    total_latency = sum(max(m.mem_cycles, m.compute_cycles) for m in metrics)
    balance = sum(m.mem_cycles / m.compute_cycles for m in metrics) / len(metrics)
    seconds = total_latency / cfg.clock_hz
    return RunAggregates(
        tile_count=len(metrics),
        bytes_total=bytes_total,
        bytes_useful=bytes_useful,
        total_mem_cycles=total_mem,
        total_compute_cycles=total_compute,
        total_latency_cycles=total_latency,
        balance_ratio=balance,
        throughput_bytes_per_sec=bytes_total / seconds,
        bandwidth_utilization=bytes_useful / bytes_total if bytes_total else 0.0,
        avg_overhead=sum(m.overhead for m in metrics) / len(metrics),
    )
