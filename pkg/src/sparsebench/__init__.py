"""Cost-model benchmarking of sparse storage formats on partitioned matrices.

The package models a streaming accelerator that fetches one encoded
partition at a time over a fixed-width bus, decompresses it, and feeds rows
to a dot-product pipeline.  Eight storage layouts (dense plus seven sparse
encodings) are scored on memory traffic, decompression work and row-level
compute so their trade-offs can be compared across matrix structures,
densities and partition sizes.
"""

from .core import (
    DensityStats,
    Partition,
    PartitionGrid,
    SparseMatrix,
    build_matrix,
    density_stats,
    from_arrays,
    partition,
)
from .costmodel import (
    CostConfig,
    PartitionMetrics,
    RunAggregates,
    RunReport,
    aggregate,
    compute_latency,
    memory_latency,
    overhead_ratio,
    tile_metrics,
)
from .errors import (
    BoundsError,
    ConfigError,
    CorruptEncodingError,
    EmptyInputError,
    ParseError,
    ShapeError,
    SparseBenchError,
    UnsupportedFormatError,
    VerificationError,
)
from .formats import (
    EncodedPartition,
    FormatId,
    FormatParams,
    NamedArray,
    decode,
    decode_rows,
    dump_encoding,
    emitted_row_count,
    emitted_row_indices,
    encode,
    stored_diagonals,
    worst_case_lengths,
)
from .runner import (
    ExperimentConfig,
    SummaryTable,
    emit_report,
    load_reports,
    normalize_summary,
    run_experiment,
)
from .spmv import spmv_dense, spmv_partitioned, tree_dot
from .workloads import (
    WorkloadSpec,
    build_workload,
    gen_band,
    gen_random,
    read_matrix_market,
    write_matrix_market,
)

__version__ = "0.1.0"

__all__ = [
    "BoundsError",
    "ConfigError",
    "CorruptEncodingError",
    "CostConfig",
    "DensityStats",
    "EmptyInputError",
    "EncodedPartition",
    "ExperimentConfig",
    "FormatId",
    "FormatParams",
    "NamedArray",
    "ParseError",
    "Partition",
    "PartitionGrid",
    "PartitionMetrics",
    "RunAggregates",
    "RunReport",
    "ShapeError",
    "SparseBenchError",
    "SparseMatrix",
    "SummaryTable",
    "UnsupportedFormatError",
    "VerificationError",
    "WorkloadSpec",
    "aggregate",
    "build_matrix",
    "build_workload",
    "compute_latency",
    "decode",
    "decode_rows",
    "density_stats",
    "dump_encoding",
    "emit_report",
    "emitted_row_count",
    "emitted_row_indices",
    "encode",
    "from_arrays",
    "gen_band",
    "gen_random",
    "load_reports",
    "memory_latency",
    "normalize_summary",
    "overhead_ratio",
    "partition",
    "read_matrix_market",
    "run_experiment",
    "spmv_dense",
    "spmv_partitioned",
    "stored_diagonals",
    "tile_metrics",
    "tree_dot",
    "worst_case_lengths",
    "write_matrix_market",
]
