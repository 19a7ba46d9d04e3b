"""Triplet-form sparse matrices and their partitioning into dense square tiles.

A :class:`SparseMatrix` stores entries as parallel ``rows``/``cols``/``vals``
arrays sorted row-major, with duplicates already summed and exact zeros
dropped.  :func:`partition` cuts a matrix into ``size`` x ``size`` tiles
(zero-padding the right and bottom edges) and keeps only the tiles containing
at least one non-zero; everything downstream operates on those tiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Iterable, Iterator

import numpy as np

from .errors import BoundsError, ConfigError, EmptyInputError


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Immutable sparse matrix in coordinate (triplet) form.

    Invariants: entry coordinates are in range, (row, col) pairs are unique,
    entries are sorted row-major and no stored value is exactly zero.  Use
    :func:`build_matrix` or :func:`from_arrays` rather than the raw
    constructor; they establish the invariants.
    """

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    def triplets(self) -> Iterator[tuple[int, int, float]]:
        """Yield entries as (row, col, value) tuples in row-major order."""
        for r, c, v in zip(self.rows, self.cols, self.vals):
            yield int(r), int(c), float(v)


@dataclass(frozen=True, eq=False)
class Partition:
    """One dense ``size`` x ``size`` tile cut out of a matrix."""

    grid_row: int
    grid_col: int
    size: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.size, self.size):
            raise ConfigError(
                f"partition values must be {self.size}x{self.size}, "
                f"got {self.values.shape}"
            )

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.values))

    @property
    def nnz_rows(self) -> int:
        """Number of rows containing at least one non-zero."""
        return int(np.count_nonzero(self.values.any(axis=1)))


@dataclass(frozen=True, eq=False)
class PartitionGrid:
    """All non-zero tiles of a matrix at one partition size.

    ``tiles`` is ordered row-major over grid coordinates.  ``grid_shape``
    counts tile slots including the all-zero ones that were dropped;
    ``padded_shape`` is the zero-padded extent covered by the grid.
    """

    n_rows: int
    n_cols: int
    size: int
    grid_shape: tuple[int, int]
    tiles: tuple[Partition, ...]

    @property
    def padded_shape(self) -> tuple[int, int]:
        return (self.grid_shape[0] * self.size, self.grid_shape[1] * self.size)

    @property
    def nnz(self) -> int:
        return sum(t.nnz for t in self.tiles)


def from_arrays(
    n_rows: int,
    n_cols: int,
    rows: np.ndarray,
    cols: np.ndarray,
    vals: np.ndarray,
) -> SparseMatrix:
    """Build a matrix from parallel coordinate arrays.

    Duplicate coordinates are summed, entries whose (possibly summed) value
    is exactly zero are dropped, and the result is sorted row-major.

    Raises:
        ConfigError: if the dimensions are not positive integers.
        BoundsError: if any coordinate falls outside the matrix, naming the
            offending triplet.
    """
    if n_rows < 1 or n_cols < 1:
        raise ConfigError(f"matrix dimensions must be >= 1, got {n_rows}x{n_cols}")
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
        raise ConfigError("rows, cols and vals must be 1-D arrays of equal length")

    bad = np.flatnonzero((rows < 0) | (rows >= n_rows) | (cols < 0) | (cols >= n_cols))
    if bad.size:
        i = int(bad[0])
        raise BoundsError(
            f"triplet ({int(rows[i])}, {int(cols[i])}, {float(vals[i])}) "
            f"outside a {n_rows}x{n_cols} matrix"
        )

    if rows.size == 0:
        return SparseMatrix(n_rows, n_cols, rows, cols, vals)

    # Sum duplicates on a flattened key; np.unique also yields row-major order.
    key = rows * np.int64(n_cols) + cols
    unique_key, inverse = np.unique(key, return_inverse=True)
    summed = np.bincount(inverse, weights=vals, minlength=unique_key.size)
    keep = summed != 0.0
    unique_key = unique_key[keep]
    summed = summed[keep]
    return SparseMatrix(
        n_rows,
        n_cols,
        (unique_key // n_cols).astype(np.int64),
        (unique_key % n_cols).astype(np.int64),
        summed.astype(np.float64),
    )


def build_matrix(
    n_rows: int, n_cols: int, triplets: Iterable[tuple[int, int, float]]
) -> SparseMatrix:
    """Build a matrix from an iterable of (row, col, value) triplets.

    See :func:`from_arrays` for the dedup/zero-drop/ordering rules.
    """
    items = list(triplets)
    if not items:
        empty = np.empty(0)
        return from_arrays(n_rows, n_cols, empty, empty, empty)
    arr = np.asarray(items, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ConfigError("triplets must be (row, col, value) tuples")
    return from_arrays(n_rows, n_cols, arr[:, 0], arr[:, 1], arr[:, 2])


def partition(matrix: SparseMatrix, size: int) -> PartitionGrid:
    """Cut ``matrix`` into dense tiles, keeping only the non-zero ones.

    The matrix is implicitly zero-padded on the right and bottom so both
    dimensions are multiples of ``size``; padded cells never contribute
    entries, so they can only appear inside kept tiles as zeros.

    Args:
        matrix: source matrix.
        size: tile edge length; must be at least 2.

    Returns:
        A :class:`PartitionGrid` with tiles in row-major grid order.
    """
    if not isinstance(size, int) or size < 2:
        raise ConfigError(f"partition size must be an integer >= 2, got {size!r}")
    grid_shape = (ceil(matrix.n_rows / size), ceil(matrix.n_cols / size))
    if matrix.nnz == 0:
        return PartitionGrid(matrix.n_rows, matrix.n_cols, size, grid_shape, ())

    grid_r = matrix.rows // size
    grid_c = matrix.cols // size
    key = grid_r * np.int64(grid_shape[1]) + grid_c
    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    boundaries = np.flatnonzero(np.diff(sorted_key)) + 1
    groups = np.split(order, boundaries)

    tiles = []
    for group in groups:
        gr = int(grid_r[group[0]])
        gc = int(grid_c[group[0]])
        cells = np.zeros((size, size), dtype=np.float64)
        cells[matrix.rows[group] - gr * size, matrix.cols[group] - gc * size] = (
            matrix.vals[group]
        )
        tiles.append(Partition(gr, gc, size, cells))
    return PartitionGrid(matrix.n_rows, matrix.n_cols, size, grid_shape, tuple(tiles))


@dataclass(frozen=True)
class DensityStats:
    """Averages taken over the non-zero partitions of a grid."""

    avg_partition_density: float
    avg_row_density: float
    avg_nonzero_row_fraction: float


def density_stats(grid: PartitionGrid) -> DensityStats:
    """Sparsity statistics of a grid, averaged over its non-zero tiles.

    ``avg_partition_density`` averages nnz/size^2 per tile;
    ``avg_row_density`` averages, per tile, the mean density of the rows that
    have at least one non-zero; ``avg_nonzero_row_fraction`` averages the
    fraction of rows per tile with at least one non-zero.

    Raises:
        EmptyInputError: if the grid has no non-zero partitions.
    """
    if not grid.tiles:
        raise EmptyInputError("grid has no non-zero partitions")
    size = grid.size
    part_d = np.empty(len(grid.tiles))
    row_d = np.empty(len(grid.tiles))
    row_f = np.empty(len(grid.tiles))
    for i, tile in enumerate(grid.tiles):
        counts = np.count_nonzero(tile.values, axis=1)
        nz_rows = counts[counts > 0]
        part_d[i] = counts.sum() / (size * size)
        row_d[i] = nz_rows.mean() / size
        row_f[i] = nz_rows.size / size
    return DensityStats(float(part_d.mean()), float(row_d.mean()), float(row_f.mean()))
