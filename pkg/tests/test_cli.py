"""Command-line interface tests, including the pinned golden trace."""

import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from smc_optl.cli import main
from smc_optl.experiments import parse_study_csv, parse_trace_csv

GOLDEN = Path(__file__).parent / "data" / "golden_trace.csv"

RUN_ARGS = [
    "run",
    "--experiment", "2d_toy",
    "--strategy", "gauss-opt",
    "--n", "16",
    "--k", "5",
    "--seed", "1",
]


def test_run_writes_trace_and_config(tmp_path, capsys):
    code = main(RUN_ARGS + ["--out", str(tmp_path)])
    assert code == 0
    cols = parse_trace_csv(tmp_path / "trace.csv")
    assert cols["iteration"].shape == (5,)
    config = json.loads((tmp_path / "config.json").read_text())
    assert config["n_particles"] == 16
    assert config["strategy"] == "gauss-opt"
    assert "recycled mean" in capsys.readouterr().out


def test_run_multiple_replicates(tmp_path):
    code = main(RUN_ARGS + ["--replicates", "2", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "trace_0.csv").exists()
    assert (tmp_path / "trace_1.csv").exists()
    a = parse_trace_csv(tmp_path / "trace_0.csv")
    b = parse_trace_csv(tmp_path / "trace_1.csv")
    assert not np.array_equal(a["ess"], b["ess"])  # different seeds


def test_run_accepts_config_json(tmp_path):
    out1 = tmp_path / "first"
    assert main(RUN_ARGS + ["--out", str(out1)]) == 0
    out2 = tmp_path / "second"
    code = main(
        ["run", "--experiment", str(out1 / "config.json"), "--out", str(out2)]
    )
    assert code == 0
    assert (out2 / "trace.csv").read_bytes() == (out1 / "trace.csv").read_bytes()


def test_study_emits_table_and_variances(tmp_path):
    code = main(
        [
            "study",
            "--experiment", "2d_toy",
            "--strategy", "forward",
            "--strategy", "gauss-opt",
            "--n", "40",
            "--k", "6",
            "--replicates", "2",
            "--out", str(tmp_path),
        ]
    )
    assert code == 0
    rows, variances = parse_study_csv(tmp_path / "study.csv")
    assert {r["strategy"] for r in rows} == {"forward", "gauss-opt"}
    assert len(rows) == 4
    assert ("gauss-opt", "mean_0") in variances
    config = json.loads((tmp_path / "config.json").read_text())
    assert config["strategies"] == ["forward", "gauss-opt"]


def test_study_is_byte_deterministic(tmp_path):
    args = [
        "study",
        "--experiment", "2d_toy",
        "--strategy", "gauss-opt",
        "--n", "40",
        "--k", "6",
        "--replicates", "2",
    ]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "study.csv").read_bytes() == (
        tmp_path / "b" / "study.csv"
    ).read_bytes()


def test_unknown_experiment_fails_with_valid_names(tmp_path, capsys):
    code = main(["run", "--experiment", "3d_toy", "--out", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "2d_toy" in err and "bimodal" in err


def test_bad_strategy_fails(tmp_path, capsys):
    code = main(
        ["run", "--experiment", "2d_toy", "--strategy", "optimal",
         "--out", str(tmp_path)]
    )
    assert code == 2
    assert "forward" in capsys.readouterr().err


def test_study_requires_strategy(tmp_path, capsys):
    code = main(["study", "--experiment", "2d_toy", "--out", str(tmp_path)])
    assert code == 2


def test_gmm_strategy_spec_parses(tmp_path):
    code = main(
        ["run", "--experiment", "bimodal", "--strategy", "gmm-opt:2",
         "--n", "30", "--k", "4", "--out", str(tmp_path)]
    )
    assert code == 0
    config = json.loads((tmp_path / "config.json").read_text())
    assert config["strategy"] == "gmm-opt:2"


def test_golden_trace_under_numpy_backend(tmp_path):
    """Pinned output: identical inputs must yield identical bytes."""
    env = dict(os.environ, SMC_OPTL_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-m", "smc_optl.cli"]
        + RUN_ARGS
        + ["--out", str(tmp_path)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert out.returncode == 0, out.stderr
    produced = (tmp_path / "trace.csv").read_bytes()
    assert produced == GOLDEN.read_bytes()
