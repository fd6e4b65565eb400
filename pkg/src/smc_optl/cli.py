"""Command-line interface.

    smc-optl run   --experiment <name|config.json> [--strategy S] [options] --out DIR
    smc-optl study --experiment <name|config.json> --strategy S [--strategy S2 ...] --out DIR

`run` executes one strategy over the configured replicates and writes a
trace CSV per replicate; `study` compares several strategies and writes
the study table. Both echo the effective configuration as JSON. Exit
code is 0 on success and 1 when any run degenerated.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ExperimentConfig
from .errors import SmcRunError
from .experiments import (
    BUILTIN_NAMES,
    builtin_config,
    emit_config_json,
    emit_study_csv,
    emit_trace_csv,
    run_study,
)
from .lkernels import LKernelStrategy
from .smc import run


def _load_config(spec: str) -> ExperimentConfig:
    if spec in BUILTIN_NAMES:
        return builtin_config(spec)
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        return ExperimentConfig.from_json_file(path)
    raise ValueError(
        f"unknown experiment {spec!r}: not a builtin "
        f"({', '.join(BUILTIN_NAMES)}) and no such config file"
    )


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.n is not None:
        changes["n_particles"] = args.n
    if args.k is not None:
        changes["n_iterations"] = args.k
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    if args.ess_threshold is not None:
        changes["ess_threshold_ratio"] = args.ess_threshold
    strategies = getattr(args, "strategy", None)
    if strategies:
        changes["strategy"] = LKernelStrategy.parse(strategies[0])
    return config.replace(**changes) if changes else config


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--experiment",
        required=True,
        help=f"builtin name ({', '.join(BUILTIN_NAMES)}) or a config JSON path",
    )
    parser.add_argument(
        "--strategy",
        action="append",
        help="L-kernel: forward, gauss-opt or gmm-opt:M (repeatable for study)",
    )
    parser.add_argument("--n", type=int, help="particles per iteration")
    parser.add_argument("--k", type=int, help="number of iterations")
    parser.add_argument("--seed", type=int, help="base random seed")
    parser.add_argument("--replicates", type=int, help="replicate count")
    parser.add_argument(
        "--ess-threshold", type=float, help="resample when ESS/N falls below this"
    )
    parser.add_argument("--out", required=True, help="output directory")


def _cmd_run(args) -> int:
    config = _apply_overrides(_load_config(args.experiment), args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_config_json(config, out / "config.json")
    failed = False
    for replicate in range(config.replicates):
        run_config = config.replace(seed=config.seed + replicate)
        name = "trace.csv" if config.replicates == 1 else f"trace_{replicate}.csv"
        try:
            record = run(run_config)
        except SmcRunError as exc:
            print(f"replicate {replicate} failed: {exc}", file=sys.stderr)
            failed = True
            continue
        emit_trace_csv(record, out / name)
        mean = ", ".join(f"{v:.4f}" for v in record.final_recycled_mean)
        print(
            f"replicate {replicate} (seed {run_config.seed}): "
            f"resampled {record.resample_count}/{record.n_iterations}, "
            f"recycled mean [{mean}] -> {out / name}"
        )
    return 1 if failed else 0


def _cmd_study(args) -> int:
    config = _apply_overrides(_load_config(args.experiment), args)
    if not args.strategy:
        print("study requires at least one --strategy", file=sys.stderr)
        return 2
    strategies = [LKernelStrategy.parse(s) for s in args.strategy]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_config_json(config, out / "config.json", strategies=strategies)
    report = run_study(config, strategies)
    emit_study_csv(report, out / "study.csv")
    for study in report.strategies:
        counts = [c for c in study.resample_counts if c is not None]
        mean_count = sum(counts) / len(counts) if counts else float("nan")
        print(
            f"{study.strategy.label}: {len(counts)}/{len(study.seeds)} replicates, "
            f"mean resample count {mean_count:.1f}"
        )
    print(f"wrote {out / 'study.csv'}")
    return 1 if report.any_failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smc-optl",
        description="SMC sampler benchmarks with selectable L-kernels",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_parser = sub.add_parser("run", help="run one strategy, write trace CSVs")
    _add_common(run_parser)
    run_parser.set_defaults(func=_cmd_run)
    study_parser = sub.add_parser(
        "study", help="compare strategies across replicates"
    )
    _add_common(study_parser)
    study_parser.set_defaults(func=_cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
