"""
Sweep success rate versus SNR over several N and estimator configurations.

Writes one combined metrics CSV (same columns as `robustcrt simulate`) and one
combined iteration histogram into the output directory. Safe to rerun; files
are overwritten.

Usage:
    python scripts/sweep_grid.py                      # N in 2..10, algo1 + algo2
    python scripts/sweep_grid.py --quick              # N=2, 5 dB steps, 100 trials
    python scripts/sweep_grid.py --n 2 4 --ensemble pairs --workers 8
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import List, Optional

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from robustcrt.cli import parse_ensemble, snr_grid  # noqa: E402
from robustcrt.export import HISTOGRAM_HEADER, METRICS_HEADER, metrics_rows  # noqa: E402
from robustcrt.harness import ExperimentConfig, Metrics, run_experiment  # noqa: E402

logger = logging.getLogger("sweep_grid")


def _configs(args: argparse.Namespace) -> List[ExperimentConfig]:
    configs = []
    for n in args.n:
        for algorithm in args.algo:
            configs.append(
                ExperimentConfig(
                    N=n,
                    snr_grid=snr_grid(args.snr_min, args.snr_max, args.snr_step),
                    trials=args.trials,
                    algorithm=algorithm,
                    ensemble=args.ensemble,
                    ec=args.ec,
                    master_seed=args.seed,
                    workers=args.workers,
                    progress=args.progress,
                )
            )
    return configs


def _histogram_rows(metrics: Metrics) -> List[List[str]]:
    return [[str(record[key]) for key in HISTOGRAM_HEADER] for record in metrics.histogram_records()]  # type: ignore[literal-required]


def run_sweep(args: argparse.Namespace) -> Path:
    out_dir: Path = args.output
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "sweep_metrics.csv"
    hist_path = out_dir / "sweep_iterations.csv"

    with metrics_path.open("w", newline="", encoding="utf-8") as mf, hist_path.open(
        "w", newline="", encoding="utf-8"
    ) as hf:
        metrics_writer = csv.writer(mf, lineterminator="\n")
        hist_writer = csv.writer(hf, lineterminator="\n")
        metrics_writer.writerow(METRICS_HEADER)
        hist_writer.writerow(HISTOGRAM_HEADER + ["algo"])
        for cfg in _configs(args):
            logger.info(f"N={cfg.N} algo={cfg.algorithm} ensemble={cfg.ensemble_label}")
            metrics = run_experiment(cfg)
            metrics_writer.writerows(metrics_rows(metrics))
            hist_writer.writerows(row + [cfg.algorithm] for row in _histogram_rows(metrics))
            mf.flush()
            hf.flush()
            best = max(metrics.rows, key=lambda r: r.avg_success)
            print(
                f"N={cfg.N:<3} {cfg.algorithm}: best avg_success {best.avg_success:.3f} "
                f"at {best.snr:g} dB"
            )

    print(f"Wrote {metrics_path} and {hist_path}")
    return metrics_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Success-rate sweep over N, SNR and algorithm.")
    parser.add_argument("--n", type=int, nargs="+", default=[2, 4, 6, 8, 10])
    parser.add_argument("--algo", nargs="+", choices=["algo1", "algo2"], default=["algo1", "algo2"])
    parser.add_argument("--ensemble", type=parse_ensemble, default=None)
    parser.add_argument("--ec", action="store_true", help="Error-corrected reconstruction")
    parser.add_argument("--snr-min", type=float, default=-40.0)
    parser.add_argument("--snr-max", type=float, default=0.0)
    parser.add_argument("--snr-step", type=float, default=1.0)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--progress", action="store_true")
    parser.add_argument("--quick", action="store_true", help="N=2, 5 dB steps, 100 trials")
    parser.add_argument("--output", type=Path, default=ROOT / "results")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.quick:
        args.n, args.snr_step, args.trials = [2], 5.0, 100
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    run_sweep(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
