"""
Tests for metrics and histogram writers.
"""

import sys

sys.path.insert(0, "src")

import orjson
import pytest

from robustcrt.export import (HISTOGRAM_HEADER, METRICS_HEADER, metrics_dataframe, metrics_rows,
                              write_histogram_csv, write_metrics_csv, write_metrics_json)
from robustcrt.harness import ExperimentConfig, run_experiment


def _has_pandas():
    try:
        import pandas  # noqa: F401

        return True
    except ImportError:
        return False


@pytest.fixture(scope="module")
def metrics():
    return run_experiment(ExperimentConfig(N=1, snr_grid=[-25.0, 0.0], trials=3))


def test_metrics_header_is_fixed():
    assert METRICS_HEADER == [
        "snr", "n", "l", "algo", "objective", "ensemble", "ec", "trials",
        "avg_success", "perfect_success", "mean_iters", "mean_runtime_ms",
    ]


def test_metrics_rows_formatting(metrics):
    rows = metrics_rows(metrics)
    assert len(rows) == 2
    assert rows[0][:8] == ["-25.0", "1", "2", "algo2", "full_posterior", "none", "off", "3"]
    assert rows[0][-1] == ""


def test_write_metrics_csv(tmp_path, metrics):
    path = write_metrics_csv(metrics, tmp_path / "metrics.csv")
    text = path.read_text(encoding="utf-8")
    assert text.startswith(",".join(METRICS_HEADER) + "\n")
    assert "\r" not in text
    assert len(text.strip().splitlines()) == 3


def test_write_metrics_json(tmp_path, metrics):
    path = write_metrics_json(metrics, tmp_path / "metrics.json")
    payload = orjson.loads(path.read_bytes())
    assert [row["snr"] for row in payload["rows"]] == [-25.0, 0.0]
    assert payload["rows"][0]["ec"] is False
    assert payload["rows"][0]["mean_runtime_ms"] is None
    assert 0.0 <= payload["rows"][0]["avg_strict_success"] <= payload["rows"][0]["avg_success"]
    assert sum(r["count"] for r in payload["histogram"]) == 6


def test_write_histogram_csv(tmp_path, metrics):
    path = write_histogram_csv(metrics, tmp_path / "hist.csv")
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == ",".join(HISTOGRAM_HEADER)
    body = [line.split(",") for line in lines[1:]]
    assert {row[2] for row in body} == {"low", "high"}
    assert sum(int(row[4]) for row in body) == 6


def test_output_errors(tmp_path, metrics):
    with pytest.raises(IsADirectoryError):
        write_metrics_csv(metrics, tmp_path)
    with pytest.raises(FileNotFoundError):
        write_metrics_csv(metrics, tmp_path / "missing" / "metrics.csv")


@pytest.mark.skipif(not _has_pandas(), reason="pandas not installed")
def test_metrics_dataframe(metrics):
    frame = metrics_dataframe(metrics)
    assert list(frame.columns) == METRICS_HEADER
    assert len(frame) == 2
    assert frame["trials"].tolist() == [3, 3]
