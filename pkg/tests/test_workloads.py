import numpy as np
import pytest

from sparsebench import (
    ConfigError,
    ParseError,
    UnsupportedFormatError,
    WorkloadSpec,
    build_workload,
    gen_band,
    gen_random,
    read_matrix_market,
    write_matrix_market,
)

from reference import ref_band_nnz


def test_gen_random_places_the_exact_count():
    for n, density in [(10, 0.0), (10, 0.13), (32, 0.01), (32, 1.0), (7, 0.5)]:
        m = gen_random(n, density, seed=3)
        assert m.nnz == round(density * n * n), (n, density)


def test_gen_random_is_deterministic():
    a = gen_random(40, 0.2, seed=12)
    b = gen_random(40, 0.2, seed=12)
    assert np.array_equal(a.rows, b.rows)
    assert np.array_equal(a.cols, b.cols)
    assert np.array_equal(a.vals, b.vals)


def test_gen_random_seeds_differ():
    a = gen_random(40, 0.2, seed=1)
    b = gen_random(40, 0.2, seed=2)
    assert not (np.array_equal(a.rows, b.rows) and np.array_equal(a.cols, b.cols))


def test_gen_random_values_are_in_unit_interval():
    m = gen_random(30, 0.3, seed=77)
    assert (m.vals > 0.0).all()
    assert (m.vals <= 1.0).all()


def test_gen_random_full_density_is_the_complete_matrix():
    m = gen_random(9, 1.0, seed=0)
    assert m.nnz == 81
    assert set(zip(map(int, m.rows), map(int, m.cols))) == {
        (i, j) for i in range(9) for j in range(9)
    }


def test_gen_random_validation():
    with pytest.raises(ConfigError):
        gen_random(0, 0.5, seed=1)
    with pytest.raises(ConfigError):
        gen_random(4, 1.5, seed=1)


def test_gen_band_shape_and_values():
    m = gen_band(6, 3)
    for r, c, v in m.triplets():
        assert abs(r - c) <= 1
        assert v == 1.0 + ((3 * r + 7 * c) % 11) / 1000.0
    assert m.nnz == ref_band_nnz(6, 3)


def test_gen_band_k1_is_diagonal():
    m = gen_band(5, 1)
    assert m.nnz == 5
    assert np.array_equal(m.rows, m.cols)


def test_gen_band_closed_form_count():
    # n * (2*(k//2) + 1) - (k//2) * (k//2 + 1)
    for n, k in [(8, 4), (20, 7), (512, 64)]:
        assert gen_band(n, k).nnz == ref_band_nnz(n, k)
    assert gen_band(8000, 64).nnz == 8000 * 65 - 32 * 33 == 518944


def test_gen_band_validation():
    with pytest.raises(ConfigError):
        gen_band(4, 0)
    with pytest.raises(ConfigError):
        gen_band(4, 8)  # max is 2n - 1


def test_workload_spec_ids_and_validation():
    assert (
        WorkloadSpec(kind="random", n=64, density=0.1, seed=7).matrix_id
        == "random-n64-d0.1-s7"
    )
    assert WorkloadSpec(kind="band", n=64, band_width=4).matrix_id == "band-n64-k4"
    assert WorkloadSpec(kind="file", path="/tmp/dwt_918.mtx").matrix_id == "dwt_918"
    with pytest.raises(ConfigError):
        WorkloadSpec(kind="random", n=0, density=0.5)
    with pytest.raises(ConfigError):
        WorkloadSpec(kind="band", n=8, band_width=0)
    with pytest.raises(ConfigError):
        WorkloadSpec(kind="file")
    with pytest.raises(ConfigError):
        WorkloadSpec(kind="torus", n=8)


def test_build_workload_dispatch():
    m = build_workload(WorkloadSpec(kind="band", n=10, band_width=2))
    assert m.n_rows == 10
    assert m.nnz == ref_band_nnz(10, 2)


def write_lines(tmp_path, *lines):
    path = tmp_path / "m.mtx"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_read_matrix_market_general(tmp_path):
    path = write_lines(
        tmp_path,
        "%%MatrixMarket matrix coordinate real general",
        "% a comment",
        "3 4 3",
        "1 1 2.5",
        "3 4 -1.0",
        "2 2 7",
    )
    m = read_matrix_market(path)
    assert (m.n_rows, m.n_cols, m.nnz) == (3, 4, 3)
    assert list(m.triplets()) == [(0, 0, 2.5), (1, 1, 7.0), (2, 3, -1.0)]


def test_read_matrix_market_symmetric_expansion(tmp_path):
    path = write_lines(
        tmp_path,
        "%%MatrixMarket matrix coordinate real symmetric",
        "3 3 3",
        "1 1 5.0",
        "2 1 1.5",
        "3 2 2.5",
    )
    m = read_matrix_market(path)
    # off-diagonal entries mirror, the diagonal one does not double
    assert list(m.triplets()) == [
        (0, 0, 5.0), (0, 1, 1.5), (1, 0, 1.5), (1, 2, 2.5), (2, 1, 2.5),
    ]


def test_read_matrix_market_pattern_field(tmp_path):
    path = write_lines(
        tmp_path,
        "%%MatrixMarket matrix coordinate pattern general",
        "2 2 2",
        "1 2",
        "2 1",
    )
    m = read_matrix_market(path)
    assert list(m.vals) == [1.0, 1.0]


def test_read_matrix_market_sums_duplicates(tmp_path):
    path = write_lines(
        tmp_path,
        "%%MatrixMarket matrix coordinate real general",
        "2 2 2",
        "1 1 2.0",
        "1 1 3.0",
    )
    assert list(read_matrix_market(path).triplets()) == [(0, 0, 5.0)]


@pytest.mark.parametrize(
    "banner, qualifier",
    [
        ("%%MatrixMarket matrix array real general", "array"),
        ("%%MatrixMarket matrix coordinate complex general", "complex"),
        ("%%MatrixMarket matrix coordinate real skew-symmetric", "skew-symmetric"),
        ("%%MatrixMarket vector coordinate real general", "vector"),
    ],
)
def test_read_matrix_market_unsupported_banner(tmp_path, banner, qualifier):
    path = write_lines(tmp_path, banner, "1 1 0")
    with pytest.raises(UnsupportedFormatError, match=qualifier):
        read_matrix_market(path)


def test_read_matrix_market_bad_banner_line(tmp_path):
    path = write_lines(tmp_path, "not a banner", "1 1 0")
    with pytest.raises(ParseError, match="line 1"):
        read_matrix_market(path)


def test_read_matrix_market_bad_size_line(tmp_path):
    path = write_lines(
        tmp_path, "%%MatrixMarket matrix coordinate real general", "3 x 1"
    )
    with pytest.raises(ParseError, match="line 2"):
        read_matrix_market(path)


def test_read_matrix_market_wrong_field_count(tmp_path):
    path = write_lines(
        tmp_path,
        "%%MatrixMarket matrix coordinate real general",
        "2 2 1",
        "1 1",
    )
    with pytest.raises(ParseError, match="line 3") as err:
        read_matrix_market(path)
    assert err.value.line == 3


def test_read_matrix_market_out_of_range_entry(tmp_path):
    path = write_lines(
        tmp_path,
        "%%MatrixMarket matrix coordinate real general",
        "2 2 1",
        "3 1 1.0",
    )
    with pytest.raises(ParseError, match=r"\(3, 1\) outside 2x2"):
        read_matrix_market(path)


def test_read_matrix_market_entry_count_mismatch(tmp_path):
    short = write_lines(
        tmp_path,
        "%%MatrixMarket matrix coordinate real general",
        "2 2 2",
        "1 1 1.0",
    )
    with pytest.raises(ParseError, match="declared 2 entries, found 1"):
        read_matrix_market(short)


def test_read_matrix_market_too_many_entries(tmp_path):
    path = write_lines(
        tmp_path,
        "%%MatrixMarket matrix coordinate real general",
        "2 2 1",
        "1 1 1.0",
        "2 2 1.0",
    )
    with pytest.raises(ParseError, match="more than the declared"):
        read_matrix_market(path)


def test_write_read_round_trip_is_exact(tmp_path):
    m = gen_random(25, 0.3, seed=42)
    path = tmp_path / "rt.mtx"
    write_matrix_market(m, path)
    back = read_matrix_market(path)
    assert np.array_equal(back.rows, m.rows)
    assert np.array_equal(back.cols, m.cols)
    assert np.array_equal(back.vals, m.vals)
