"""Command-line interface for robustcrt."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import orjson

from .analytics import bound_span_prob, chernoff_success, exact_span_prob
from .ensemble import EnsembleConfig
from .export import METRICS_HEADER, metrics_rows
from .harness import ExperimentConfig, run_experiment
from .model import load_observations
from .pipeline import estimate
from .types import EstimateRecord

logger = logging.getLogger(__name__)


def parse_ensemble(value: str) -> Optional[EnsembleConfig]:
    """
    none | pairs | subsets:S | disjoint:S | random:S[:K]
    """
    parts = value.split(":")
    try:
        if parts == ["none"]:
            return None
        if parts == ["pairs"]:
            return EnsembleConfig(policy="all_pairs")
        if parts[0] == "subsets" and len(parts) == 2:
            return EnsembleConfig(subset_size=int(parts[1]), policy="all_subsets")
        if parts[0] == "disjoint" and len(parts) == 2:
            return EnsembleConfig(subset_size=int(parts[1]), policy="disjoint_groups")
        if parts[0] == "random" and len(parts) in (2, 3):
            kappa = int(parts[2]) if len(parts) == 3 else None
            return EnsembleConfig(subset_size=int(parts[1]), policy="random_k", kappa=kappa)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid ensemble {value!r}: {exc}") from exc
    raise argparse.ArgumentTypeError(
        f"invalid ensemble {value!r}; use none, pairs, subsets:S, disjoint:S or random:S[:K]"
    )


def _parse_lmin(value: str) -> Optional[int]:
    if value == "full":
        return None
    try:
        parsed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--lmin must be an integer or 'full', got {value!r}") from None
    if parsed < 1:
        raise argparse.ArgumentTypeError(f"--lmin must be >= 1, got {parsed}")
    return parsed


def snr_grid(snr_min: float, snr_max: float, step: float) -> List[float]:
    """Inclusive grid snr_min, snr_min + step, ... <= snr_max."""
    if step <= 0:
        raise ValueError(f"--snr-step must be positive, got {step}")
    if snr_max < snr_min:
        raise ValueError(f"--snr-max ({snr_max}) is below --snr-min ({snr_min})")
    count = int(math.floor((snr_max - snr_min) / step + 1e-9)) + 1
    return [round(snr_min + i * step, 10) for i in range(count)]


def _configure_logging(verbosity: int) -> None:
    if verbosity <= 0:
        return
    level = logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _simulate(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(
        N=args.n,
        gamma=args.gamma,
        L=args.l,
        snr_grid=snr_grid(args.snr_min, args.snr_max, args.snr_step),
        trials=args.trials,
        algorithm=args.algo,
        objective_mode=args.objective,
        ensemble=args.ensemble,
        ec=args.ec == "on",
        max_iter=args.max_iter,
        restarts=args.restarts,
        master_seed=args.seed,
        l_min=args.lmin,
        workers=args.workers,
        timing=args.timing,
        progress=args.progress,
    )
    metrics = run_experiment(cfg, out=args.out, hist=args.hist, json_out=args.json)
    if args.out is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        writer.writerows(metrics_rows(metrics))
    return 0


def _solve(args: argparse.Namespace) -> int:
    view, ms = load_observations(args.input)
    result = estimate(
        view,
        ms,
        algorithm=args.algo,
        mode=args.objective,
        ensemble=args.ensemble,
        ec=args.ec == "on",
        max_iter=args.max_iter,
        restarts=args.restarts,
        rng=np.random.default_rng(args.seed),
    )
    single_shot = args.ensemble is None
    for index, value in enumerate(result.estimates):
        record = EstimateRecord(index=index, Y_hat=float(value))
        if single_shot:
            rec = result.reconstructions[index]
            record.update(
                mu_hat=rec.mu_hat,
                Q=rec.Q,
                ec_used=rec.ec_used,
                ec_consistency=rec.ec_consistency,
                ec_valid=rec.ec_valid,
            )
        if result.proper is not None:
            record["proper"] = result.proper
        sys.stdout.write(orjson.dumps(record).decode() + "\n")
    return 0


def _analyze(args: argparse.Namespace) -> int:
    if args.analysis == "bound":
        payload = {
            "bound_span_prob": bound_span_prob(args.sigma, args.delta, args.n, args.l),
            "exact_span_prob": exact_span_prob(args.sigma, args.delta, args.n, args.l),
            "exact_span_prob_conditional": exact_span_prob(
                args.sigma, args.delta, args.n, args.l, conditional=True
            ),
        }
    else:
        payload = {"chernoff_success": chernoff_success(args.p, args.kappa)}
    sys.stdout.write(orjson.dumps(payload).decode() + "\n")
    return 0


def _add_estimator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algo", choices=["algo1", "algo2"], default="algo2", help="Clustering algorithm")
    parser.add_argument(
        "--objective", choices=["full", "literal"], default="full", help="algo1 cut objective"
    )
    parser.add_argument(
        "--ensemble",
        type=parse_ensemble,
        default=None,
        help="none, pairs, subsets:S, disjoint:S or random:S[:K] (default: none)",
    )
    parser.add_argument("--ec", choices=["on", "off"], default="off", help="Error-corrected reconstruction")
    parser.add_argument("--restarts", type=int, default=1, help="algo2 initializations (default: 1)")
    parser.add_argument("--max-iter", type=int, default=50, help="algo2 iteration cap (default: 50)")
    parser.add_argument("--seed", type=int, default=0, help="Master random seed (default: 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Robust CRT reconstruction of multiple numbers from unordered noisy residues."
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="Log progress (-v info, -vv debug)"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    sim = subparsers.add_parser("simulate", help="Monte Carlo success rate versus SNR")
    sim.add_argument("--n", type=int, required=True, help="Numbers per trial")
    sim.add_argument("--gamma", type=float, default=100.0, help="Shared modulus factor (default: 100)")
    sim.add_argument("--l", type=int, default=None, help="Samplers (default: 2N)")
    sim.add_argument(
        "--lmin",
        type=_parse_lmin,
        default=2,
        help="D = gamma * product of the LMIN smallest moduli, or 'full' (default: 2)",
    )
    sim.add_argument("--snr-min", type=float, default=-40.0)
    sim.add_argument("--snr-max", type=float, default=0.0)
    sim.add_argument("--snr-step", type=float, default=1.0)
    sim.add_argument("--trials", type=int, default=1000, help="Trials per SNR (default: 1000)")
    _add_estimator_flags(sim)
    sim.add_argument("--workers", type=int, default=1, help="Worker processes (default: 1)")
    sim.add_argument("--timing", action="store_true", help="Fill the mean_runtime_ms column")
    sim.add_argument(
        "--progress", action="store_true", help="Show progress (uses rich if installed)"
    )
    sim.add_argument("--out", type=Path, default=None, help="Metrics CSV (default: stdout)")
    sim.add_argument("--hist", type=Path, default=None, help="Iteration histogram CSV")
    sim.add_argument("--json", type=Path, default=None, help="Metrics JSON")

    solve = subparsers.add_parser("solve", help="Estimate numbers from an observation file")
    solve.add_argument("--input", type=Path, required=True, help="Observation JSON file")
    _add_estimator_flags(solve)

    analyze = subparsers.add_parser("analyze", help="Closed-form probabilities")
    analyses = analyze.add_subparsers(dest="analysis", required=True)
    bound = analyses.add_parser("bound", help="Error-spread probabilities")
    bound.add_argument("--sigma", type=float, required=True)
    bound.add_argument("--delta", type=float, required=True)
    bound.add_argument("--n", type=int, required=True)
    bound.add_argument("--l", type=int, required=True)
    chern = analyses.add_parser("chernoff", help="Majority-vote success bound")
    chern.add_argument("--p", type=float, required=True)
    chern.add_argument("--kappa", type=int, required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    handlers = {"simulate": _simulate, "solve": _solve, "analyze": _analyze}
    handler = handlers.get(args.command)
    if handler is None:
        parser.print_help()
        return 1
    try:
        return handler(args)
    except (FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"robustcrt {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
