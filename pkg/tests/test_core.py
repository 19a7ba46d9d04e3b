import numpy as np
import pytest

from sparsebench import (
    BoundsError,
    ConfigError,
    EmptyInputError,
    build_matrix,
    density_stats,
    from_arrays,
    partition,
)

from reference import ref_density_stats


def test_build_matrix_sorts_row_major():
    m = build_matrix(4, 4, [(3, 1, 5.0), (0, 2, 1.0), (3, 0, 2.0), (0, 0, 4.0)])
    assert list(m.rows) == [0, 0, 3, 3]
    assert list(m.cols) == [0, 2, 0, 1]
    assert list(m.vals) == [4.0, 1.0, 2.0, 5.0]
    assert m.nnz == 4


def test_build_matrix_sums_duplicates_and_drops_zeros():
    m = build_matrix(3, 3, [(1, 1, 2.0), (1, 1, 3.0), (0, 0, 1.0), (0, 0, -1.0)])
    assert list(m.triplets()) == [(1, 1, 5.0)]


def test_build_matrix_drops_explicit_zeros():
    m = build_matrix(2, 2, [(0, 0, 0.0), (1, 1, 7.0)])
    assert m.nnz == 1


def test_from_arrays_rejects_out_of_range():
    with pytest.raises(BoundsError, match=r"\(2, 0, 1\.0\)"):
        from_arrays(2, 2, np.array([0, 2]), np.array([0, 0]), np.array([1.0, 1.0]))
    with pytest.raises(BoundsError, match=r"\(0, -1"):
        from_arrays(2, 2, np.array([0]), np.array([-1]), np.array([1.0]))


def test_from_arrays_rejects_bad_dimensions():
    empty = np.empty(0)
    with pytest.raises(ConfigError):
        from_arrays(0, 3, empty, empty, empty)
    with pytest.raises(ConfigError):
        from_arrays(3, 3, np.array([0]), np.array([0, 1]), np.array([1.0]))


def test_empty_matrix_is_allowed():
    m = build_matrix(5, 5, [])
    assert m.nnz == 0
    assert list(m.triplets()) == []


def test_partition_drops_all_zero_tiles():
    # entries confined to two of the four 2x2 tiles of a 4x4 matrix
    m = build_matrix(4, 4, [(0, 0, 1.0), (3, 3, 2.0)])
    grid = partition(m, 2)
    assert grid.grid_shape == (2, 2)
    assert [(t.grid_row, t.grid_col) for t in grid.tiles] == [(0, 0), (1, 1)]
    assert grid.nnz == 2


def test_partition_tiles_are_row_major_and_exact():
    m = build_matrix(4, 6, [(0, 0, 1.0), (0, 5, 2.0), (3, 2, 3.0), (3, 5, 4.0)])
    grid = partition(m, 2)
    assert grid.grid_shape == (2, 3)
    coords = [(t.grid_row, t.grid_col) for t in grid.tiles]
    assert coords == sorted(coords)
    tile = grid.tiles[0]
    assert tile.values[0, 0] == 1.0
    assert tile.nnz == 1


def test_partition_pads_ragged_edges_with_zeros():
    m = build_matrix(5, 5, [(4, 4, 9.0)])
    grid = partition(m, 4)
    assert grid.padded_shape == (8, 8)
    tile = grid.tiles[0]
    assert (tile.grid_row, tile.grid_col) == (1, 1)
    assert tile.values[0, 0] == 9.0
    assert tile.nnz == 1


def test_partition_size_validation():
    m = build_matrix(4, 4, [(0, 0, 1.0)])
    with pytest.raises(ConfigError):
        partition(m, 1)
    with pytest.raises(ConfigError):
        partition(m, 0)


def test_partition_empty_matrix_gives_no_tiles():
    grid = partition(build_matrix(8, 8, []), 4)
    assert grid.tiles == ()
    with pytest.raises(EmptyInputError):
        density_stats(grid)


def test_partition_properties():
    m = build_matrix(8, 8, [(i, i, 1.0) for i in range(8)])
    grid = partition(m, 4)
    assert len(grid.tiles) == 2
    for tile in grid.tiles:
        assert tile.nnz == 4
        assert tile.nnz_rows == 4


def test_density_stats_match_brute_force():
    triplets = [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (5, 5, 1.0), (6, 7, 2.0)]
    m = build_matrix(8, 8, triplets)
    grid = partition(m, 4)
    got = density_stats(grid)
    pd, rd, rf, count, _ = ref_density_stats(8, 8, triplets, 4)
    assert count == len(grid.tiles)
    assert got.avg_partition_density == pytest.approx(pd)
    assert got.avg_row_density == pytest.approx(rd)
    assert got.avg_nonzero_row_fraction == pytest.approx(rf)


def test_density_stats_full_tile():
    m = build_matrix(4, 4, [(i, j, 1.0) for i in range(4) for j in range(4)])
    stats = density_stats(partition(m, 4))
    assert stats.avg_partition_density == 1.0
    assert stats.avg_row_density == 1.0
    assert stats.avg_nonzero_row_fraction == 1.0
