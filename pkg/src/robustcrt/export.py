"""
Writers for experiment results.

Metrics go to CSV (the primary product, one row per SNR) or JSON; the
iteration histogram goes to its own CSV. Output is a pure function of the
Metrics object, so identical experiments produce identical bytes.

Example:
    >>> from robustcrt.harness import ExperimentConfig, run_experiment
    >>> metrics = run_experiment(ExperimentConfig(N=2, snr_grid=[0.0], trials=5))
    >>> write_metrics_csv(metrics, "metrics.csv")
"""

import csv
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, List, Optional, Union

import orjson

if TYPE_CHECKING:
    from .harness import Metrics

logger = logging.getLogger(__name__)

METRICS_HEADER = [
    "snr",
    "n",
    "l",
    "algo",
    "objective",
    "ensemble",
    "ec",
    "trials",
    "avg_success",
    "perfect_success",
    "mean_iters",
    "mean_runtime_ms",
]

HISTOGRAM_HEADER = ["n", "snr", "scenario", "iterations", "count"]


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _output_path(filepath: Union[str, Path]) -> Path:
    output_path = Path(filepath).resolve()
    if output_path.is_dir():
        raise IsADirectoryError(f"Output must be a file, not directory: {output_path}")
    if not output_path.parent.exists():
        raise FileNotFoundError(f"Output directory not found: {output_path.parent}")
    return output_path


def metrics_rows(metrics: "Metrics") -> List[List[str]]:
    """Formatted CSV rows (without header)."""
    rows = []
    for row in metrics.rows:
        record = row.to_record()
        rows.append([_format_value(record.get(key)) for key in METRICS_HEADER])
    return rows


def write_metrics_csv(metrics: "Metrics", filepath: Union[str, Path]) -> Path:
    """
    Write one line per SNR under the fixed METRICS_HEADER.

    mean_runtime_ms is left empty unless timing was recorded.
    """
    output_path = _output_path(filepath)
    with output_path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        writer.writerows(metrics_rows(metrics))
    logger.info(f"Wrote {len(metrics.rows)} metrics rows to {output_path}")
    return output_path


def write_metrics_json(metrics: "Metrics", filepath: Union[str, Path]) -> Path:
    """Write metrics rows and the iteration histogram as one JSON document."""
    output_path = _output_path(filepath)
    payload = {
        "rows": [row.to_record() for row in metrics.rows],
        "histogram": metrics.histogram_records(),
    }
    with output_path.open("wb") as f:
        f.write(orjson.dumps(payload, option=orjson.OPT_INDENT_2))
    logger.info(f"Wrote metrics JSON to {output_path}")
    return output_path


def write_histogram_csv(metrics: "Metrics", filepath: Union[str, Path]) -> Path:
    """Write exact iteration counts per (n, snr) with the low/high scenario tag."""
    output_path = _output_path(filepath)
    with output_path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=HISTOGRAM_HEADER, lineterminator="\n")
        writer.writeheader()
        for record in metrics.histogram_records():
            writer.writerow({key: _format_value(record[key]) for key in HISTOGRAM_HEADER})  # type: ignore[literal-required]
    logger.info(f"Wrote iteration histogram to {output_path}")
    return output_path


def metrics_dataframe(metrics: "Metrics", columns: Optional[List[str]] = None):
    """
    Metrics rows as a pandas DataFrame.

    Raises:
        ImportError: If pandas is not installed.
    """
    try:
        import pandas as pd
    except ImportError:
        raise ImportError(
            "metrics_dataframe requires pandas. Install with: pip install robustcrt[pandas]"
        )
    frame = pd.DataFrame([row.to_record() for row in metrics.rows], columns=columns or METRICS_HEADER)
    return frame
