"""Tests for the command-line interface."""

import json
import shutil
import subprocess

import numpy as np
import pytest

from pflight import (
    ExperimentConfig,
    FlightParams,
    fisher_info,
    moment_closed_form,
    moment_quadrature,
    radial_density_origin,
    run_experiment,
)
from pflight.cli import main
from pflight.io import summary_csv_lines

SIM_ARGS = [
    "simulate",
    "--lambda", "1.0",
    "--c", "1.0",
    "--T", "10.0",
    "--n", "20",
    "--seed", "42",
]


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:
    def test_sample_table(self, capsys):
        code, out, err = run_cli(capsys, SIM_ARGS)
        assert code == 0
        assert err == ""
        lines = out.strip().split("\n")
        assert lines[0] == "i,t,x,y"
        assert len(lines) == 22  # header + n + 1 rows
        assert lines[1].split(",")[:2] == ["0", "0"]

    def test_deterministic(self, capsys):
        _, first, _ = run_cli(capsys, SIM_ARGS)
        _, second, _ = run_cli(capsys, SIM_ARGS)
        assert first == second

    def test_stream_changes_output(self, capsys):
        _, first, _ = run_cli(capsys, SIM_ARGS)
        _, second, _ = run_cli(capsys, SIM_ARGS + ["--stream", "1"])
        assert first != second

    def test_trajectory_ndjson(self, capsys):
        code, out, _ = run_cli(
            capsys, SIM_ARGS + ["--emit", "trajectory", "--format", "ndjson"]
        )
        assert code == 0
        obj = json.loads(out)
        assert obj["type"] == "trajectory"
        assert obj["horizon"] == 10.0
        assert len(obj["directions"]) == len(obj["event_times"]) + 1

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "sample.csv"
        code, out, _ = run_cli(capsys, SIM_ARGS + ["--out", str(path)])
        assert code == 0
        assert out == ""
        assert path.read_text().startswith("i,t,x,y\n")


class TestEstimate:
    def make_sample_file(self, capsys, tmp_path, fmt="csv"):
        suffix = "csv" if fmt == "csv" else "ndjson"
        path = tmp_path / f"sample.{suffix}"
        code, _, _ = run_cli(
            capsys, SIM_ARGS + ["--format", fmt, "--out", str(path)]
        )
        assert code == 0
        return path

    def test_all_estimators(self, capsys, tmp_path):
        path = self.make_sample_file(capsys, tmp_path)
        code, out, err = run_cli(
            capsys, ["estimate", "--in", str(path), "--c", "1.0"]
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "kind,value,stderr,n,delta,n_plus,saturated"
        kinds = [line.split(",")[0] for line in lines[1:]]
        assert kinds == ["pseudo_mle", "modified_mle", "indicator"]
        value = float(lines[1].split(",")[1])
        assert 0.0 <= value < 10.0

    def test_single_estimator(self, capsys, tmp_path):
        path = self.make_sample_file(capsys, tmp_path)
        code, out, _ = run_cli(
            capsys,
            ["estimate", "--in", str(path), "--c", "1.0", "--estimator", "dot"],
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 2
        assert lines[1].startswith("indicator,")

    def test_ndjson_autodetected(self, capsys, tmp_path):
        csv_path = self.make_sample_file(capsys, tmp_path, "csv")
        nd_path = self.make_sample_file(capsys, tmp_path, "ndjson")
        _, out_csv, _ = run_cli(
            capsys, ["estimate", "--in", str(csv_path), "--c", "1.0"]
        )
        _, out_nd, _ = run_cli(
            capsys, ["estimate", "--in", str(nd_path), "--c", "1.0"]
        )
        assert out_csv == out_nd


class TestDensity:
    def test_rows_match_library(self, capsys):
        code, out, _ = run_cli(
            capsys,
            [
                "density",
                "--lambda", "1.0",
                "--c", "1.0",
                "--t", "1.0",
                "--r-min", "0.1",
                "--r-max", "0.9",
                "--points", "5",
            ],
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "r,ac,singular_weight"
        assert len(lines) == 6
        params = FlightParams(rate=1.0, speed=1.0)
        for line in lines[1:]:
            r, ac, sw = (float(v) for v in line.split(","))
            ref = radial_density_origin(params, 1.0, r)
            assert ac == ref.ac
            assert sw == ref.singular_weight

    def test_offset_start_uses_annulus_form(self, capsys):
        code, out, _ = run_cli(
            capsys,
            [
                "density",
                "--lambda", "1.0",
                "--c", "1.0",
                "--t", "1.0",
                "--x0", "0.2",
                "--y0", "0.1",
                "--r-min", "0.6",
                "--r-max", "0.6",
                "--points", "1",
            ],
        )
        assert code == 0
        row = out.strip().split("\n")[1]
        assert float(row.split(",")[1]) == pytest.approx(
            0.6311801789642677, rel=1e-12
        )


class TestMomentsAndFisher:
    def test_moments_rows(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["moments", "--lambda", "1.0", "--c", "1.0", "--t", "1.0",
             "--p-max", "3"],
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "p,value_closed_form,value_quadrature"
        assert len(lines) == 4
        params = FlightParams(rate=1.0, speed=1.0)
        for p, line in zip((1, 2, 3), lines[1:]):
            cells = line.split(",")
            assert int(cells[0]) == p
            assert float(cells[1]) == moment_closed_form(params, 1.0, p)
            assert float(cells[2]) == moment_quadrature(params, 1.0, p)

    def test_fisher_row(self, capsys):
        code, out, _ = run_cli(
            capsys, ["fisher", "--lambda", "2.0", "--delta", "0.5", "--n", "100"]
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "lambda,delta,n,per_obs,idealized,total"
        cells = lines[1].split(",")
        info = fisher_info(2.0, 0.5, 100)
        assert float(cells[3]) == info.per_observation
        assert float(cells[4]) == info.idealized_per_observation
        assert float(cells[5]) == info.total


class TestMonteCarloCommand:
    CONFIG = {
        "lambda_grid": [1.0],
        "n_grid": [20],
        "T": 50.0,
        "reps": 30,
        "master_seed": 5,
    }

    def write_config(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(self.CONFIG))
        return path

    def test_summary_matches_library(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("PFL_THREADS", "1")
        cfg_path = self.write_config(tmp_path)
        code, out, _ = run_cli(capsys, ["mc", "--config", str(cfg_path)])
        assert code == 0
        cfg = ExperimentConfig(
            lambda_grid=(1.0,), n_grid=(20,), horizon=50.0, reps=30,
            master_seed=5,
        )
        expected = "\n".join(summary_csv_lines(run_experiment(cfg, workers=1)))
        assert out.strip() == expected

    def test_worker_env_does_not_change_output(self, capsys, tmp_path,
                                               monkeypatch):
        cfg_path = self.write_config(tmp_path)
        monkeypatch.setenv("PFL_THREADS", "1")
        _, out_one, _ = run_cli(capsys, ["mc", "--config", str(cfg_path)])
        monkeypatch.setenv("PFL_THREADS", "4")
        _, out_four, _ = run_cli(capsys, ["mc", "--config", str(cfg_path)])
        assert out_one == out_four

    def test_raw_records(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("PFL_THREADS", "2")
        cfg_path = self.write_config(tmp_path)
        raw_path = tmp_path / "raw.ndjson"
        code, _, _ = run_cli(
            capsys,
            ["mc", "--config", str(cfg_path), "--out", str(tmp_path / "s.csv"),
             "--raw", str(raw_path)],
        )
        assert code == 0
        lines = raw_path.read_text().strip().split("\n")
        assert len(lines) == 30
        first = json.loads(lines[0])
        assert first["rep"] == 0
        assert first["lambda"] == 1.0

    def test_invalid_config_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, out, err = run_cli(capsys, ["mc", "--config", str(path)])
        assert code == 2
        assert json.loads(err)["error"] == "ParameterError"


class TestErrorHandling:
    def test_bad_parameter_exits_2(self, capsys):
        code, out, err = run_cli(
            capsys,
            ["simulate", "--lambda", "-1.0", "--c", "1.0", "--T", "10.0",
             "--n", "20", "--seed", "1"],
        )
        assert code == 2
        record = json.loads(err)
        assert record["error"] == "ParameterError"
        assert "rate" in record["message"]

    def test_inconsistent_positions_exit_2(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("i,t,x,y\n0,0,0,0\n1,1,5.0,0\n")
        code, _, err = run_cli(
            capsys, ["estimate", "--in", str(path), "--c", "1.0"]
        )
        assert code == 2
        assert json.loads(err)["error"] == "InconsistentSampleError"

    def test_degenerate_estimate_exits_1(self, capsys, tmp_path):
        # A walker reported at the same point every time: every stride is
        # a full-shortfall turn and the pseudo estimator's denominator is
        # exactly zero.
        path = tmp_path / "frozen.csv"
        rows = ["i,t,x,y"] + [f"{i},{i},0,0" for i in range(5)]
        path.write_text("\n".join(rows) + "\n")
        code, _, err = run_cli(
            capsys,
            ["estimate", "--in", str(path), "--c", "1.0", "--estimator", "hat"],
        )
        assert code == 1
        assert json.loads(err)["error"] == "NumericalError"

    def test_missing_input_file_exits_2(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys,
            ["estimate", "--in", str(tmp_path / "nope.csv"), "--c", "1.0"],
        )
        assert code == 2
        assert json.loads(err)["error"] == "FileNotFoundError"

    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--bogus", "1"])
        assert exc.value.code == 2


class TestInstalledScript:
    def test_console_script_runs(self):
        exe = shutil.which("pflight")
        assert exe is not None, "console script not on PATH"
        proc = subprocess.run(
            [exe, "fisher", "--lambda", "1.0", "--delta", "1.0", "--n", "5"],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0
        lines = proc.stdout.strip().split("\n")
        info = fisher_info(1.0, 1.0, 5)
        assert float(lines[1].split(",")[3]) == info.per_observation
