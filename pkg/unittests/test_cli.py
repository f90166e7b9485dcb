"""
Tests for the robustcrt command-line interface.
"""

import argparse
import sys

sys.path.insert(0, "src")

import numpy as np
import orjson
import pytest

from robustcrt import cli
from robustcrt.export import METRICS_HEADER
from robustcrt.model import GroundTruth, NoiseSpec, build_moduli, observe, save_observations


def _write_observations(path, values=(757.0, 31415.0)):
    ms = build_moduli(2, 100.0, l_min=2)
    gt = GroundTruth.from_values(list(values), ms.gamma)
    obs = observe(gt, ms, NoiseSpec(), np.random.default_rng(0))
    save_observations(obs, ms, path)
    return path


class TestParsers:
    """Argument helpers."""

    def test_parse_ensemble(self):
        assert cli.parse_ensemble("none") is None
        assert cli.parse_ensemble("pairs").policy == "all_pairs"
        assert cli.parse_ensemble("subsets:3").subset_size == 3
        assert cli.parse_ensemble("disjoint:2").policy == "disjoint_groups"
        cfg = cli.parse_ensemble("random:2:5")
        assert cfg.policy == "random_k" and cfg.kappa == 5
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_ensemble("triples")
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_ensemble("subsets:x")

    def test_snr_grid(self):
        assert cli.snr_grid(-2.0, 0.0, 1.0) == [-2.0, -1.0, 0.0]
        assert cli.snr_grid(0.0, 1.0, 0.5) == [0.0, 0.5, 1.0]
        with pytest.raises(ValueError):
            cli.snr_grid(0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            cli.snr_grid(1.0, 0.0, 1.0)

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args([])


class TestAnalyze:
    """Closed-form calculators."""

    def test_chernoff(self, capsys):
        assert cli.main(["analyze", "chernoff", "--p", "1", "--kappa", "8"]) == 0
        payload = orjson.loads(capsys.readouterr().out)
        assert payload["chernoff_success"] == pytest.approx(0.6321, abs=1e-4)

    def test_bound(self, capsys):
        assert cli.main(["analyze", "bound", "--sigma", "1", "--delta", "1", "--n", "1", "--l", "2"]) == 0
        payload = orjson.loads(capsys.readouterr().out)
        assert payload["bound_span_prob"] == pytest.approx(0.6827, abs=1e-4)
        assert payload["exact_span_prob"] <= payload["bound_span_prob"]
        assert payload["exact_span_prob_conditional"] == pytest.approx(0.8427, abs=1e-4)

    def test_invalid_value_exit_code(self, capsys):
        assert cli.main(["analyze", "chernoff", "--p", "0.4", "--kappa", "8"]) == 2
        assert "p must lie" in capsys.readouterr().err


class TestSolve:
    """Estimating from an observation file."""

    def test_noiseless_file(self, tmp_path, capsys):
        path = _write_observations(tmp_path / "obs.json")
        assert cli.main(["solve", "--input", str(path)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        records = [orjson.loads(line) for line in lines]
        assert [r["index"] for r in records] == [0, 1]
        assert sorted(r["Y_hat"] for r in records) == pytest.approx([757.0, 31415.0])
        assert all("Q" in r and r["ec_used"] is False for r in records)

    def test_algo1_with_ensemble(self, tmp_path, capsys):
        path = _write_observations(tmp_path / "obs.json")
        assert cli.main(["solve", "--input", str(path), "--algo", "algo1", "--ensemble", "pairs"]) == 0
        records = [orjson.loads(line) for line in capsys.readouterr().out.strip().splitlines()]
        assert sorted(r["Y_hat"] for r in records) == pytest.approx([757.0, 31415.0])
        assert all(r["proper"] is True for r in records)

    def test_missing_file(self, tmp_path, capsys):
        assert cli.main(["solve", "--input", str(tmp_path / "missing.json")]) == 2
        assert "not found" in capsys.readouterr().err

    def test_directory(self, tmp_path, capsys):
        assert cli.main(["solve", "--input", str(tmp_path)]) == 2
        assert "directory" in capsys.readouterr().err


class TestSimulate:
    """Monte Carlo runs from the command line."""

    def test_stdout_csv(self, capsys):
        args = ["simulate", "--n", "1", "--snr-min", "0", "--snr-max", "0", "--trials", "2"]
        assert cli.main(args) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == ",".join(METRICS_HEADER)
        assert len(lines) == 2
        fields = lines[1].split(",")
        assert fields[0] == "0.0"
        assert fields[3] == "algo2"
        assert fields[6] == "off"
        assert fields[-1] == ""

    def test_files(self, tmp_path, capsys):
        out = tmp_path / "metrics.csv"
        hist = tmp_path / "hist.csv"
        args = [
            "simulate", "--n", "1", "--snr-min", "-1", "--snr-max", "0", "--trials", "2",
            "--ec", "on", "--ensemble", "pairs", "--timing", "--out", str(out), "--hist", str(hist),
        ]
        assert cli.main(args) == 0
        assert capsys.readouterr().out == ""
        rows = out.read_text().strip().splitlines()
        assert len(rows) == 3
        assert rows[1].split(",")[5] == "pairs"
        assert rows[1].split(",")[6] == "on"
        assert rows[1].split(",")[-1] != ""
        assert hist.read_text().startswith("n,snr,scenario,iterations,count\n")

    def test_out_directory_rejected(self, tmp_path, capsys):
        args = ["simulate", "--n", "1", "--snr-min", "0", "--snr-max", "0", "--trials", "1", "--out", str(tmp_path)]
        assert cli.main(args) == 2
        assert "directory" in capsys.readouterr().err
