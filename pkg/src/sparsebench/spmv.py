"""Sparse matrix-vector multiplication engines.

``spmv_dense`` is the triplet-order oracle; ``spmv_partitioned`` runs the
streaming pipeline (encode each tile, decode rows, dot each emitted row) and
must agree with the oracle to 1e-9 relative error per element.  All dot
products reduce with the same fixed pairwise tree, so results are
deterministic regardless of how tiles are scheduled.
"""

from __future__ import annotations

import numpy as np

from .core import PartitionGrid, SparseMatrix
from .errors import ShapeError
from .formats import FormatId, FormatParams, decode_rows, encode


def _pairwise_fold(terms: np.ndarray) -> np.ndarray:
    """Sum the last axis pairwise; an odd leftover joins the next round."""
    while terms.shape[-1] > 1:
        half = terms.shape[-1] // 2
        paired = terms[..., 0 : 2 * half : 2] + terms[..., 1 : 2 * half : 2]
        if terms.shape[-1] % 2:
            paired = np.concatenate([paired, terms[..., -1:]], axis=-1)
        terms = paired
    return terms[..., 0]


def tree_dot(row: np.ndarray, x: np.ndarray) -> float:
    """Dot product with a fixed balanced-tree reduction order."""
    row = np.asarray(row, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if row.shape != x.shape or row.ndim != 1:
        raise ShapeError(f"operand lengths differ: {row.shape} vs {x.shape}")
    if row.size == 0:
        return 0.0
    return float(_pairwise_fold(row * x))


def spmv_dense(matrix: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Reference y = A @ x, accumulating in stored-entry (row-major) order."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (matrix.n_cols,):
        raise ShapeError(
            f"x has length {x.shape}, matrix has {matrix.n_cols} columns"
        )
    y = np.zeros(matrix.n_rows, dtype=np.float64)
    np.add.at(y, matrix.rows, matrix.vals * x[matrix.cols])
    return y


def spmv_partitioned(
    grid: PartitionGrid,
    fmt: FormatId,
    x: np.ndarray,
    params: FormatParams | None = None,
) -> np.ndarray:
    """y = A @ x through the encode/decode-rows/dot pipeline.

    Tiles are re-encoded on the fly and processed in row-major grid order;
    contributions from column tiles accumulate into the same output rows
    sequentially by grid column.  ``x`` may have the source length (it is
    zero-padded to the grid extent) or the padded length.  The result is
    returned at the source length.
    """
    params = params or FormatParams()
    x = np.asarray(x, dtype=np.float64)
    padded_rows, padded_cols = grid.padded_shape
    if x.shape == (grid.n_cols,):
        x_pad = np.zeros(padded_cols, dtype=np.float64)
        x_pad[: grid.n_cols] = x
    elif x.shape == (padded_cols,):
        x_pad = x
    else:
        raise ShapeError(
            f"x has length {x.shape}, expected {grid.n_cols} or {padded_cols}"
        )

    size = grid.size
    y = np.zeros(padded_rows, dtype=np.float64)
    for tile in grid.tiles:
        emitted = decode_rows(encode(tile, fmt, params))
        if not emitted:
            continue
        row_idx = np.fromiter((r for r, _ in emitted), dtype=np.int64)
        rows = np.stack([row for _, row in emitted])
        x_slice = x_pad[tile.grid_col * size : (tile.grid_col + 1) * size]
        y[tile.grid_row * size + row_idx] += _pairwise_fold(rows * x_slice)
    return y[: grid.n_rows]
