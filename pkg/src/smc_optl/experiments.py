"""Built-in benchmark experiments, replicate studies, and CSV output.

Two toy setups ship with the library:

* ``2d_toy``  -- 2-D Gaussian target at mean [3, 2] with identity
  covariance, initial proposal N(0, I), random-walk covariance I,
  500 particles, 100 iterations.
* ``bimodal`` -- 1-D two-component mixture with means -3 and 3, unit
  variances and equal weights, initial proposal N(0, 3) (variance 3),
  random-walk variance 0.1, 500 particles, 1000 iterations.

A study runs a strategy list over seeded replicates (seed = base seed +
replicate index) and reports per-replicate resample counts, final
recycled estimates, and across-replicate sample variances per moment
entry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import (
    ExperimentConfig,
    GaussianTarget,
    MixtureTarget,
    ProposalSpec,
)
from .distributions import GaussianParams, GmmParams
from .errors import SmcRunError
from .lkernels import LKernelStrategy
from .smc import RunRecord, run

BUILTIN_NAMES = ("2d_toy", "bimodal")


def builtin_config(name: str) -> ExperimentConfig:
    """Return the exact parameterisation of a named built-in experiment."""
    if name == "2d_toy":
        return ExperimentConfig(
            target=GaussianTarget(GaussianParams([3.0, 2.0], np.eye(2))),
            proposal=ProposalSpec(
                initial=GaussianParams([0.0, 0.0], np.eye(2)),
                random_walk_cov=np.eye(2),
            ),
            n_particles=500,
            n_iterations=100,
        )
    if name == "bimodal":
        components = [
            GaussianParams([-3.0], [[1.0]]),
            GaussianParams([3.0], [[1.0]]),
        ]
        return ExperimentConfig(
            target=MixtureTarget(GmmParams([0.5, 0.5], components)),
            proposal=ProposalSpec(
                # N(0, 3) read as variance 3, matching the target's
                # sigma-squared notation.
                initial=GaussianParams([0.0], [[3.0]]),
                random_walk_cov=[[0.1]],
            ),
            n_particles=500,
            n_iterations=1000,
        )
    raise ValueError(
        f"unknown experiment {name!r}; valid names are {', '.join(BUILTIN_NAMES)}"
    )


def moment_names(dim: int) -> list[str]:
    """Moment entry labels: means then upper-triangle covariance entries."""
    names = [f"mean_{i}" for i in range(dim)]
    names += [f"cov_{i}{j}" for i in range(dim) for j in range(i, dim)]
    return names


def moment_values(mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Flatten (mean, cov) into the moment_names order."""
    dim = mean.shape[0]
    tri = [cov[i, j] for i in range(dim) for j in range(i, dim)]
    return np.concatenate([mean, np.asarray(tri)])


@dataclass(eq=False)
class StrategyStudy:
    """Replicate outcomes of one strategy within a study."""

    strategy: LKernelStrategy
    seeds: list[int]
    resample_counts: list[int | None] = field(default_factory=list)
    final_moments: list[np.ndarray | None] = field(default_factory=list)
    failures: dict[int, str] = field(default_factory=dict)

    def variances(self) -> np.ndarray:
        """Across-replicate sample variance per moment entry (ddof=1)."""
        rows = [m for m in self.final_moments if m is not None]
        if len(rows) < 2:
            return np.full(
                len(self.final_moments[0]) if rows else 0, np.nan
            )
        return np.var(np.stack(rows), axis=0, ddof=1)


@dataclass(eq=False)
class StudyReport:
    """Aggregated outcomes of strategies x replicates."""

    config: ExperimentConfig
    moment_labels: list[str]
    strategies: list[StrategyStudy]

    @property
    def any_failures(self) -> bool:
        return any(s.failures for s in self.strategies)


def run_study(
    config: ExperimentConfig,
    strategies: list[LKernelStrategy],
    *,
    seeds: list[int] | None = None,
    use_final_iteration: bool = False,
) -> StudyReport:
    """Run each strategy over the replicate seeds and aggregate.

    Seeds default to base seed + replicate index, so replicates are
    independent of execution order. Failed replicates are recorded and
    skipped in the aggregates rather than aborting the study. With
    `use_final_iteration=True` the per-replicate moments come from the
    last iteration's raw estimate instead of the recycled one.
    """
    if seeds is None:
        seeds = [config.seed + r for r in range(config.replicates)]
    labels = moment_names(config.dim)
    studies = []
    for strategy in strategies:
        study = StrategyStudy(strategy=strategy, seeds=list(seeds))
        for replicate, seed in enumerate(seeds):
            run_config = config.replace(strategy=strategy, seed=seed)
            try:
                record = run(run_config)
            except SmcRunError as exc:
                study.failures[replicate] = str(exc)
                study.resample_counts.append(None)
                study.final_moments.append(None)
                continue
            if use_final_iteration:
                moments = moment_values(
                    record.mean_estimate[-1], record.cov_estimate[-1]
                )
            else:
                moments = moment_values(
                    record.final_recycled_mean, record.final_recycled_cov
                )
            study.resample_counts.append(record.resample_count)
            study.final_moments.append(moments)
        studies.append(study)
    return StudyReport(config=config, moment_labels=labels, strategies=studies)


# ---------------------------------------------------------------------------
# CSV / JSON emission


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def emit_trace_csv(record: RunRecord, path) -> None:
    """Write the per-iteration trace of one run.

    Columns: iteration, ess, resampled, mean_i..., cov_ij... (row
    major), recycled_mean_i..., recycled_cov_ij...
    """
    d = record.dim
    header = ["iteration", "ess", "resampled"]
    header += [f"mean_{i}" for i in range(d)]
    header += [f"cov_{i}{j}" for i in range(d) for j in range(d)]
    header += [f"recycled_mean_{i}" for i in range(d)]
    header += [f"recycled_cov_{i}{j}" for i in range(d) for j in range(d)]
    lines = [",".join(header)]
    for k in range(record.n_iterations):
        row = [str(k + 1), _fmt(record.ess[k]), str(int(record.resampled[k]))]
        row += [_fmt(v) for v in record.mean_estimate[k]]
        row += [_fmt(v) for v in record.cov_estimate[k].ravel()]
        row += [_fmt(v) for v in record.recycled_mean[k]]
        row += [_fmt(v) for v in record.recycled_cov[k].ravel()]
        lines.append(",".join(row))
    _write_text(path, "\n".join(lines) + "\n")


def emit_study_csv(report: StudyReport, path) -> None:
    """Write per-replicate study rows plus the variance summary block.

    Replicate rows: strategy, replicate, seed, resample_count,
    final_<moment>...; failed replicates leave the numeric fields
    empty. The summary block rows are
    ``variance,<strategy>,<moment>,<value>``.
    """
    header = ["strategy", "replicate", "seed", "resample_count"]
    header += [f"final_{name}" for name in report.moment_labels]
    lines = [",".join(header)]
    for study in report.strategies:
        for replicate, seed in enumerate(study.seeds):
            row = [study.strategy.label, str(replicate), str(seed)]
            count = study.resample_counts[replicate]
            moments = study.final_moments[replicate]
            if moments is None:
                row += [""] * (1 + len(report.moment_labels))
            else:
                row.append(str(count))
                row += [_fmt(v) for v in moments]
            lines.append(",".join(row))
    for study in report.strategies:
        variances = study.variances()
        for name, value in zip(report.moment_labels, variances):
            lines.append(f"variance,{study.strategy.label},{name},{_fmt(value)}")
    _write_text(path, "\n".join(lines) + "\n")


def emit_csv(result, path) -> None:
    """Write `result` (a RunRecord or StudyReport) to CSV at `path`."""
    if isinstance(result, RunRecord):
        emit_trace_csv(result, path)
    elif isinstance(result, StudyReport):
        emit_study_csv(result, path)
    else:
        raise TypeError(f"cannot emit {type(result).__name__} as CSV")


def emit_config_json(config: ExperimentConfig, path, strategies=None) -> None:
    """Echo the full configuration (and study strategies) as JSON."""
    data = config.to_json_dict()
    if strategies is not None:
        data["strategies"] = [s.label for s in strategies]
    _write_text(path, json.dumps(data, indent=2) + "\n")


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def parse_trace_csv(path) -> dict[str, np.ndarray]:
    """Read a trace CSV back into named columns."""
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    data = np.asarray(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(header)}


def parse_study_csv(path) -> tuple[list[dict], dict[tuple[str, str], float]]:
    """Read a study CSV back: (replicate rows, variance block).

    Replicate rows become dicts keyed by column name; the variance
    block maps (strategy, moment) to its value.
    """
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = lines[0].split(",")
    rows = []
    variances = {}
    for line in lines[1:]:
        parts = line.split(",")
        if parts[0] == "variance":
            _, strategy, name, value = parts
            variances[(strategy, name)] = float(value)
            continue
        row = dict(zip(header, parts))
        rows.append(row)
    return rows, variances
