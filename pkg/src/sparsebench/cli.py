"""Command line front end.

Three subcommands: ``run`` executes a JSON experiment config, ``gen`` writes
synthetic matrices to Matrix Market files, ``summarize`` turns JSON report
files into normalized per-format score tables.

Exit status: 0 on success, 2 when SpMV verification fails, 1 for any other
benchmark error (bad config, parse failures, empty inputs).
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, SparseBenchError, VerificationError
from .runner import (
    ExperimentConfig,
    emit_report,
    load_reports,
    normalize_summary,
    resolve_output_path,
    run_experiment,
)
from .workloads import WorkloadSpec, build_workload, write_matrix_market


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Benchmark sparse-format streaming costs on partitioned matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("--config", required=True, help="JSON experiment config")
    run_p.add_argument("--threads", type=int, default=None,
                       help="override worker thread count")
    run_p.add_argument("--per-partition", action="store_true",
                       help="include per-partition metrics in JSON output")
    run_p.add_argument("--out", default=None,
                       help="output path (overrides config; '-' for stdout)")

    gen_p = sub.add_parser("gen", help="generate a synthetic matrix")
    gen_sub = gen_p.add_subparsers(dest="generator", required=True)

    rand_p = gen_sub.add_parser("random", help="uniform random square matrix")
    rand_p.add_argument("--n", type=int, required=True)
    rand_p.add_argument("--density", type=float, required=True)
    rand_p.add_argument("--seed", type=int, default=0)
    rand_p.add_argument("--out", required=True, help="Matrix Market output path")

    band_p = gen_sub.add_parser("band", help="banded square matrix")
    band_p.add_argument("--n", type=int, required=True)
    band_p.add_argument("--k", type=int, required=True, help="band width")
    band_p.add_argument("--out", required=True, help="Matrix Market output path")

    sum_p = sub.add_parser("summarize", help="normalize JSON reports into score tables")
    sum_p.add_argument("reports", nargs="+", help="JSON report files")
    sum_p.add_argument("--group-by", choices=("kind", "matrix_id"), default="kind")
    sum_p.add_argument("--out", default=None,
                       help="write CSV table here instead of printing text")

    return parser


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("threads must be >= 1")
        config.threads = args.threads
    if args.per_partition:
        config.include_per_partition = True
    reports = run_experiment(config)
    out = args.out if args.out is not None else config.output_path
    if out is None or out == "-":
        sys.stdout.write(
            emit_report(reports, config.output_format,
                        include_per_partition=config.include_per_partition)
        )
    else:
        path = resolve_output_path(out)
        emit_report(reports, config.output_format, path,
                    include_per_partition=config.include_per_partition)
        print(f"wrote {len(reports)} reports to {path}")
    return 0


def _cmd_gen(args) -> int:
    if args.generator == "random":
        spec = WorkloadSpec(kind="random", n=args.n, density=args.density,
                            seed=args.seed)
    else:
        spec = WorkloadSpec(kind="band", n=args.n, band_width=args.k)
    matrix = build_workload(spec)
    path = resolve_output_path(args.out)
    write_matrix_market(matrix, path)
    print(f"wrote {spec.matrix_id}: {matrix.n_rows}x{matrix.n_cols}, "
          f"{matrix.nnz} entries to {path}")
    return 0


def _cmd_summarize(args) -> int:
    reports = []
    for path in args.reports:
        reports.extend(load_reports(path))
    table = normalize_summary(reports, group_by=args.group_by)
    if args.out is None:
        sys.stdout.write(table.to_text())
    else:
        path = resolve_output_path(args.out)
        path.write_text(table.to_csv())
        print(f"wrote summary to {path}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "gen":
            return _cmd_gen(args)
        return _cmd_summarize(args)
    except VerificationError as exc:
        print(f"bench: verification failed: {exc}", file=sys.stderr)
        return 2
    except SparseBenchError as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
