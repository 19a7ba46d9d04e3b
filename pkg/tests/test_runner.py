import json

import numpy as np
import pytest

import sparsebench.runner as runner_mod
from sparsebench import (
    ConfigError,
    EmptyInputError,
    ExperimentConfig,
    FormatId,
    RunAggregates,
    RunReport,
    UnsupportedFormatError,
    VerificationError,
    emit_report,
    load_reports,
    normalize_summary,
    run_experiment,
)
from sparsebench.runner import CSV_COLUMNS, resolve_output_path


def small_config(**overrides):
    data = {
        "workloads": [
            {"kind": "band", "n": 24, "band_width": 4},
            {"kind": "random", "n": 24, "density": 0.2, "seed": 5},
        ],
        "partition_sizes": [8, 12],
    }
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="bogus"):
        ExperimentConfig.from_dict({"workloads": [], "bogus": 1})
    with pytest.raises(ConfigError, match="unknown workload keys"):
        ExperimentConfig.from_dict(
            {"workloads": [{"kind": "band", "n": 8, "band_width": 2, "oops": 3}]}
        )
    with pytest.raises(ConfigError, match="unknown cost keys"):
        ExperimentConfig.from_dict(
            {"workloads": [{"kind": "band", "n": 8, "band_width": 2}],
             "cost": {"warp_cycles": 9}}
        )
    with pytest.raises(ConfigError, match="unknown params keys"):
        ExperimentConfig.from_dict(
            {"workloads": [{"kind": "band", "n": 8, "band_width": 2}],
             "params": {"ell_width": 4}}
        )


def test_from_dict_requires_workloads():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"workloads": []})


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(threads=0)
    with pytest.raises(ConfigError):
        small_config(output_format="yaml")
    with pytest.raises(UnsupportedFormatError, match="unknown format"):
        small_config(formats=["csr", "hybrid"])


def test_run_experiment_order_and_count():
    reports = run_experiment(small_config())
    assert len(reports) == 2 * 2 * 8
    cells = [(r.matrix_id, r.size, r.format) for r in reports]
    expected = [
        (mid, size, fmt)
        for mid in ("band-n24-k4", "random-n24-d0.2-s5")
        for size in (8, 12)
        for fmt in FormatId
    ]
    assert cells == expected


def test_run_experiment_carries_provenance():
    report = run_experiment(small_config())[0]
    assert report.workload["kind"] == "band"
    assert report.workload["n_rows"] == 24
    assert report.cost["bus_bytes_per_cycle"] == 8
    assert report.params["ell_min_width"] == 6
    assert report.aggregates.tile_count == len(report.per_partition)


def test_run_experiment_labels_empty_workloads():
    config = small_config(
        workloads=[{"kind": "random", "n": 16, "density": 0.0, "seed": 1}]
    )
    with pytest.raises(EmptyInputError, match="random-n16-d0-s1"):
        run_experiment(config)


def test_diagonal_band_bandwidth_is_exact():
    config = ExperimentConfig.from_dict(
        {"workloads": [{"kind": "band", "n": 64, "band_width": 1}],
         "partition_sizes": [32], "formats": ["dia"]}
    )
    (report,) = run_experiment(config)
    # each diagonal tile is one record of 1 header + 32 values
    assert report.aggregates.bandwidth_utilization == 32 / 33


def test_verify_spmv_passes_on_honest_codecs():
    run_experiment(small_config(verify_spmv=True, partition_sizes=[8]))


def test_verify_spmv_reports_the_failing_cell(monkeypatch):
    def broken(grid, fmt, x, params=None):
        return np.ones(grid.n_rows)

    monkeypatch.setattr(runner_mod, "spmv_partitioned", broken)
    config = small_config(verify_spmv=True, partition_sizes=[8], formats=["csr"])
    with pytest.raises(VerificationError, match="format=csr size=8"):
        run_experiment(config)


def test_threads_do_not_change_results():
    base = emit_report(run_experiment(small_config()), "csv")
    threaded = emit_report(run_experiment(small_config(threads=4)), "csv")
    assert base == threaded


def test_csv_report_shape():
    reports = run_experiment(small_config(partition_sizes=[8]))
    text = emit_report(reports, "csv")
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + len(reports)
    first = lines[1].split(",")
    assert first[0] == "band-n24-k4"
    assert first[CSV_COLUMNS.index("format")] == "dense"
    assert first[CSV_COLUMNS.index("density")] == ""  # not a random workload


def test_csv_emission_is_byte_identical_across_runs():
    a = emit_report(run_experiment(small_config()), "csv")
    b = emit_report(run_experiment(small_config()), "csv")
    assert a == b


def test_json_round_trip(tmp_path):
    reports = run_experiment(small_config(partition_sizes=[8]))
    path = tmp_path / "reports.json"
    emit_report(reports, "json", path, include_per_partition=True)
    back = load_reports(path)
    assert len(back) == len(reports)
    for orig, loaded in zip(reports, back):
        assert loaded.matrix_id == orig.matrix_id
        assert loaded.format is orig.format
        assert loaded.size == orig.size
        assert loaded.aggregates == orig.aggregates
        assert loaded.per_partition == orig.per_partition


def test_json_omits_per_partition_by_default(tmp_path):
    reports = run_experiment(small_config(partition_sizes=[8]))
    path = tmp_path / "reports.json"
    emit_report(reports, "json", path)
    doc = json.loads(path.read_text())
    assert "per_partition" not in doc["reports"][0]
    assert load_reports(path)[0].per_partition == ()


def fake_report(fmt, kind="random", mid="m0", overhead=1.0, latency=100,
                mem=50, balance=1.0, throughput=1e6, bw=0.5):
    agg = RunAggregates(
        tile_count=1, bytes_total=100, bytes_useful=50, total_mem_cycles=mem,
        total_compute_cycles=80, total_latency_cycles=latency,
        balance_ratio=balance, throughput_bytes_per_sec=throughput,
        bandwidth_utilization=bw, avg_overhead=overhead,
    )
    return RunReport(matrix_id=mid, format=fmt, size=8, aggregates=agg,
                     per_partition=(), workload={"kind": kind}, cost={}, params={})


def test_normalize_summary_min_max_scores():
    reports = [
        fake_report(FormatId.CSR, overhead=1.0),
        fake_report(FormatId.ELL, overhead=3.0),
        fake_report(FormatId.DIA, overhead=2.0),
    ]
    table = normalize_summary(reports)
    scores = {f: e.score["avg_overhead"] for f, e in table.groups["random"].items()}
    assert scores == {"csr": 1.0, "ell": 0.0, "dia": 0.5}
    # metrics where everything ties score 1.0 across the board
    assert all(e.score["total_latency_cycles"] == 1.0
               for e in table.groups["random"].values())


def test_normalize_summary_higher_is_better_metrics():
    reports = [
        fake_report(FormatId.CSR, throughput=4e6, bw=0.25),
        fake_report(FormatId.COO, throughput=1e6, bw=0.75),
    ]
    entries = normalize_summary(reports).groups["random"]
    assert entries["csr"].score["throughput_bytes_per_sec"] == 1.0
    assert entries["coo"].score["throughput_bytes_per_sec"] == 0.0
    assert entries["csr"].score["bandwidth_utilization"] == 0.0
    assert entries["coo"].score["bandwidth_utilization"] == 1.0


def test_normalize_summary_balance_uses_distance_from_one():
    reports = [
        fake_report(FormatId.CSR, balance=1.05),
        fake_report(FormatId.COO, balance=0.5),
        fake_report(FormatId.ELL, balance=2.0),
    ]
    entries = normalize_summary(reports).groups["random"]
    assert entries["csr"].score["balance_closeness"] == 1.0
    assert entries["ell"].score["balance_closeness"] == 0.0


def test_normalize_summary_groups_and_averages():
    reports = [
        fake_report(FormatId.CSR, kind="band", mid="b1", overhead=1.0),
        fake_report(FormatId.CSR, kind="band", mid="b2", overhead=3.0),
        fake_report(FormatId.ELL, kind="band", mid="b1", overhead=4.0),
        fake_report(FormatId.ELL, kind="band", mid="b2", overhead=4.0),
        fake_report(FormatId.CSR, kind="random", mid="r1", overhead=9.0),
    ]
    table = normalize_summary(reports, group_by="kind")
    assert set(table.groups) == {"band", "random"}
    band = table.groups["band"]
    assert band["csr"].raw["avg_overhead"] == 2.0  # mean of 1 and 3
    assert band["csr"].score["avg_overhead"] == 1.0
    assert band["ell"].score["avg_overhead"] == 0.0

    by_matrix = normalize_summary(reports, group_by="matrix_id")
    assert set(by_matrix.groups) == {"b1", "b2", "r1"}


def test_normalize_summary_validation():
    with pytest.raises(ConfigError):
        normalize_summary([fake_report(FormatId.CSR)], group_by="color")
    with pytest.raises(EmptyInputError):
        normalize_summary([])


def test_summary_serializations():
    table = normalize_summary([
        fake_report(FormatId.CSR, overhead=1.0),
        fake_report(FormatId.ELL, overhead=2.0),
    ])
    text = table.to_text()
    assert "== kind: random" in text
    assert "csr" in text and "ell" in text
    csv_text = table.to_csv()
    header = csv_text.splitlines()[0]
    assert header.startswith("group,format,raw_avg_overhead,score_avg_overhead")
    assert len(csv_text.splitlines()) == 3


def test_resolve_output_path_env_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SPARSEBENCH_OUTPUT_DIR", str(tmp_path / "base"))
    got = resolve_output_path("sub/out.csv")
    assert got == tmp_path / "base" / "sub" / "out.csv"
    assert got.parent.is_dir()
    monkeypatch.delenv("SPARSEBENCH_OUTPUT_DIR")
    assert resolve_output_path(tmp_path / "abs.csv") == tmp_path / "abs.csv"
