"""
Monte Carlo experiment engine.

Every trial draws its randomness from a stream derived from
(master_seed, snr, trial_index) alone, so results do not depend on the order
trials run in or on how many worker processes share them.

Example:
    >>> cfg = ExperimentConfig(N=2, snr_grid=[0.0], trials=10)
    >>> metrics = run_experiment(cfg)
    >>> metrics.rows[0].trials
    10
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .algo1 import normalize_mode
from .algo2 import DEFAULT_MAX_ITER
from .ensemble import EnsembleConfig
from .model import DEFAULT_GAMMA, ModuliSet, NoiseSpec, build_moduli, observe, sample_instance
from .pipeline import ALGORITHMS, estimate
from .types import HistogramRecord, MetricsRecord

logger = logging.getLogger(__name__)

# Boundary between the low and high SNR scenarios of the iteration histogram
LOW_SNR_BELOW = -20.0


def _default_snr_grid() -> List[float]:
    return [float(s) for s in range(-40, 1)]


@dataclass
class ExperimentConfig:
    """
    Simulation parameters.

    Attributes:
        N: Numbers per trial.
        gamma: Shared modulus factor.
        L: Samplers (default 2N).
        moduli: Explicit M_l overriding the prime sequence.
        snr_grid: SNR values in dB.
        trials: Trials per SNR.
        algorithm: "algo1" or "algo2".
        objective_mode: "full_posterior" or "literal" (algo1 only).
        ensemble: Grouping and voting, or None for single-shot estimation.
        ec: Error-corrected reconstruction.
        max_iter: algo2 iteration cap.
        restarts: algo2 initializations per estimate.
        master_seed: Root of all per-trial random streams.
        success_threshold: Largest error counted as a success (default gamma).
        l_min: Dynamic range D = gamma * product of the l_min smallest M_l;
            None uses the full range.
        workers: Worker processes (1 runs inline).
        timing: Record wall-clock runtime per trial.
        progress: Show a progress bar.
    """

    N: int = 2
    gamma: float = DEFAULT_GAMMA
    L: Optional[int] = None
    moduli: Optional[Sequence[int]] = None
    snr_grid: List[float] = field(default_factory=_default_snr_grid)
    trials: int = 1000
    algorithm: str = "algo2"
    objective_mode: str = "full_posterior"
    ensemble: Optional[EnsembleConfig] = None
    ec: bool = False
    max_iter: int = DEFAULT_MAX_ITER
    restarts: int = 1
    master_seed: int = 0
    success_threshold: Optional[float] = None
    l_min: Optional[int] = 2
    workers: int = 1
    timing: bool = False
    progress: bool = False

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.snr_grid:
            raise ValueError("snr_grid must not be empty")
        if any(math.isnan(s) or s == -math.inf for s in self.snr_grid):
            raise ValueError(f"snr_grid values must be numbers or +inf, got {self.snr_grid}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"Unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        self.objective_mode = normalize_mode(self.objective_mode)
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.max_iter < 1 or self.restarts < 1:
            raise ValueError("max_iter and restarts must be >= 1")
        self.snr_grid = [float(s) for s in self.snr_grid]

    @property
    def threshold(self) -> float:
        return self.gamma if self.success_threshold is None else float(self.success_threshold)

    @property
    def ensemble_label(self) -> str:
        return "none" if self.ensemble is None else self.ensemble.label

    def moduli_set(self) -> ModuliSet:
        l_min = self.l_min
        if l_min is not None:
            L = len(self.moduli) if self.moduli is not None else (self.L or 2 * self.N)
            l_min = min(l_min, L)
        return build_moduli(self.N, self.gamma, count=self.L, moduli=self.moduli, l_min=l_min)


@dataclass
class TrialResult:
    """Outcome of one seeded trial."""

    snr: float
    trial_index: int
    Y: np.ndarray
    Y_hat: np.ndarray
    success: List[bool]
    perfect: bool
    iterations: int
    runtime_ms: Optional[float] = None
    proper: Optional[bool] = None
    degenerate: bool = False
    unreliable: int = 0
    strict_success: List[bool] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return sum(self.success) / len(self.success)

    @property
    def strict_success_rate(self) -> float:
        """Success rate with plain |Y_hat - Y| (no wrap at D)."""
        return sum(self.strict_success) / len(self.strict_success) if self.strict_success else 0.0


@dataclass
class MetricsRow:
    """Aggregate of all trials at one SNR."""

    snr: float
    n: int
    l: int  # noqa: E741
    algo: str
    objective: str
    ensemble: str
    ec: bool
    trials: int
    avg_success: float
    perfect_success: float
    mean_iters: float
    mean_runtime_ms: Optional[float] = None
    avg_strict_success: Optional[float] = None

    def to_record(self) -> MetricsRecord:
        return MetricsRecord(
            snr=self.snr,
            n=self.n,
            l=self.l,
            algo=self.algo,
            objective=self.objective,
            ensemble=self.ensemble,
            ec=self.ec,
            trials=self.trials,
            avg_success=self.avg_success,
            perfect_success=self.perfect_success,
            mean_iters=self.mean_iters,
            mean_runtime_ms=self.mean_runtime_ms,
            avg_strict_success=self.avg_strict_success,
        )


@dataclass
class Metrics:
    """All rows of an experiment plus the exact iteration-count histogram."""

    rows: List[MetricsRow] = field(default_factory=list)
    iterations: Dict[float, Counter] = field(default_factory=dict)
    n: int = 0

    def histogram_records(self) -> List[HistogramRecord]:
        records: List[HistogramRecord] = []
        for snr in sorted(self.iterations):
            scenario = "low" if snr < LOW_SNR_BELOW else "high"
            for count_iters, count in sorted(self.iterations[snr].items()):
                records.append(
                    HistogramRecord(
                        n=self.n, snr=snr, scenario=scenario, iterations=count_iters, count=count
                    )
                )
        return records

    def scenario_histogram(self) -> Dict[str, Counter]:
        """Iteration counts pooled into the low and high SNR scenarios."""
        pooled: Dict[str, Counter] = {"low": Counter(), "high": Counter()}
        for snr, counts in self.iterations.items():
            pooled["low" if snr < LOW_SNR_BELOW else "high"].update(counts)
        return pooled


def trial_rng(master_seed: int, snr: float, trial_index: int) -> np.random.Generator:
    """Counter-based stream keyed on (master_seed, snr bits, trial_index)."""
    snr_key = int(np.float64(snr).view(np.uint64))
    seq = np.random.SeedSequence(master_seed, spawn_key=(snr_key, int(trial_index)))
    return np.random.Generator(np.random.Philox(seq))


def score_success(
    Y_hat: Sequence[float],
    Y: Sequence[float],
    threshold: float,
    D: Optional[float] = None,
) -> Tuple[List[bool], bool]:
    """
    One-to-one matching of estimates to truths within `threshold`.

    Distances are measured on the circle of circumference D when D is given.

    Returns:
        (per_number, perfect) where per_number[i] says whether truth i was matched.
    """
    est = np.asarray(Y_hat, dtype=float)
    truth = np.asarray(Y, dtype=float)
    if est.shape != truth.shape or est.ndim != 1:
        raise ValueError(f"Expected equal-length vectors, got {est.shape} and {truth.shape}")
    diff = np.abs(truth[:, np.newaxis] - est[np.newaxis, :])
    if D is not None:
        diff = np.minimum(np.mod(diff, D), D - np.mod(diff, D))
    close = diff <= threshold
    rows, cols = linear_sum_assignment((~close).astype(float))
    per_number = [False] * truth.shape[0]
    for i, j in zip(rows, cols):
        per_number[int(i)] = bool(close[i, j])
    return per_number, all(per_number)


def run_trial(cfg: ExperimentConfig, snr: float, trial_index: int) -> TrialResult:
    """
    Run one seeded trial: sample, observe, estimate, score.

    The hidden truth only enters through score_success.
    """
    rng = trial_rng(cfg.master_seed, snr, trial_index)
    noise = NoiseSpec(snr_db=snr)
    ms = cfg.moduli_set().with_noise(noise)
    gt = sample_instance(ms, cfg.N, rng)
    obs = observe(gt, ms, noise, rng)

    started = time.perf_counter()
    result = estimate(
        obs.view(),
        ms,
        algorithm=cfg.algorithm,
        mode=cfg.objective_mode,
        ensemble=cfg.ensemble,
        ec=cfg.ec,
        max_iter=cfg.max_iter,
        restarts=cfg.restarts,
        rng=rng,
    )
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    per_number, perfect = score_success(result.estimates, gt.Y, cfg.threshold, ms.D)
    strict, _ = score_success(result.estimates, gt.Y, cfg.threshold)
    logger.debug(
        f"trial snr={snr} #{trial_index}: {sum(per_number)}/{cfg.N} recovered, "
        f"{result.iterations} iterations"
    )
    return TrialResult(
        snr=snr,
        trial_index=trial_index,
        Y=gt.Y,
        Y_hat=result.estimates,
        success=per_number,
        perfect=perfect,
        iterations=result.iterations,
        runtime_ms=elapsed_ms if cfg.timing else None,
        proper=result.proper,
        degenerate=result.degenerate,
        unreliable=result.unreliable,
        strict_success=strict,
    )


def _run_trial_task(task: Tuple[ExperimentConfig, float, int]) -> TrialResult:
    return run_trial(*task)


def _compute_chunk_size(seq_len: Optional[int], pool_size: int) -> int:
    """Chunk size for ProcessPoolExecutor.map (at least 1)."""
    if not seq_len or seq_len <= 0:
        return 1
    return max(1, seq_len // max(1, pool_size * 4))


def _progress_hooks(
    total: int, description: str
) -> Tuple[Callable[[], None], Callable[[], None], Callable[[], None]]:
    """(start, tick, stop) callbacks; Rich when available, then tqdm, then a plain ticker."""

    def _noop() -> None:
        return None

    try:
        from rich.progress import (  # type: ignore
            BarColumn,
            MofNCompleteColumn,
            Progress,
            SpinnerColumn,
            TextColumn,
            TimeElapsedColumn,
            TimeRemainingColumn,
        )

        rp = Progress(
            SpinnerColumn(),
            TextColumn("[bold blue]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            TimeRemainingColumn(),
        )
        task_id = rp.add_task(description, total=total)
        return rp.start, lambda: rp.advance(task_id, 1), rp.stop
    except Exception:
        pass

    try:
        from tqdm import tqdm  # type: ignore

        bar = tqdm(total=total, desc=description, unit="trial")
        return _noop, lambda: bar.update(1), bar.close
    except Exception:
        pass

    processed = [0]
    step = max(1, total // 20)

    def _tick() -> None:
        processed[0] += 1
        if processed[0] % step == 0 or processed[0] == total:
            print(f"Processed {processed[0]}/{total}")

    return _noop, _tick, _noop


def _run_trials(
    tasks: List[Tuple[ExperimentConfig, float, int]],
    workers: int,
    tick: Optional[Callable[[], None]],
) -> Iterable[TrialResult]:
    if workers <= 1:
        for task in tasks:
            result = _run_trial_task(task)
            if tick:
                tick()
            yield result
        return
    chunk_size = _compute_chunk_size(len(tasks), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        for result in executor.map(_run_trial_task, tasks, chunksize=chunk_size):
            if tick:
                tick()
            yield result


def aggregate(cfg: ExperimentConfig, snr: float, results: Sequence[TrialResult]) -> MetricsRow:
    """Reduce the trials of one SNR to a metrics row."""
    runtimes = [r.runtime_ms for r in results if r.runtime_ms is not None]
    return MetricsRow(
        snr=snr,
        n=cfg.N,
        l=cfg.moduli_set().L,
        algo=cfg.algorithm,
        objective=cfg.objective_mode,
        ensemble=cfg.ensemble_label,
        ec=cfg.ec,
        trials=len(results),
        avg_success=float(np.mean([r.success_rate for r in results])),
        perfect_success=float(np.mean([r.perfect for r in results])),
        mean_iters=float(np.mean([r.iterations for r in results])),
        mean_runtime_ms=float(np.mean(runtimes)) if runtimes else None,
        avg_strict_success=float(np.mean([r.strict_success_rate for r in results])),
    )


def run_experiment(
    cfg: ExperimentConfig,
    out: Optional[Union[str, Path]] = None,
    hist: Optional[Union[str, Path]] = None,
    json_out: Optional[Union[str, Path]] = None,
) -> Metrics:
    """
    Run every (snr, trial) cell of the grid and aggregate.

    Args:
        cfg: Experiment configuration.
        out: Metrics CSV path.
        hist: Iteration histogram CSV path.
        json_out: Metrics JSON path.

    Returns:
        Metrics with one row per SNR in grid order.
    """
    from .export import write_histogram_csv, write_metrics_csv, write_metrics_json

    ms = cfg.moduli_set()
    total = len(cfg.snr_grid) * cfg.trials
    logger.info(
        f"Running {total} trials: N={cfg.N}, L={ms.L}, algo={cfg.algorithm}, "
        f"ensemble={cfg.ensemble_label}, ec={cfg.ec}, workers={cfg.workers}"
    )

    start, tick, stop = (None, None, None)
    if cfg.progress:
        start, tick, stop = _progress_hooks(total, "Simulating")
        start()

    metrics = Metrics(n=cfg.N)
    try:
        for snr in cfg.snr_grid:
            tasks = [(cfg, snr, index) for index in range(cfg.trials)]
            results = list(_run_trials(tasks, cfg.workers, tick))
            row = aggregate(cfg, snr, results)
            metrics.rows.append(row)
            metrics.iterations[snr] = Counter(r.iterations for r in results)
            logger.info(
                f"snr={snr:g}: avg_success={row.avg_success:.4f}, "
                f"perfect={row.perfect_success:.4f}, mean_iters={row.mean_iters:.2f}"
            )
    finally:
        if stop:
            stop()

    if out is not None:
        write_metrics_csv(metrics, out)
    if hist is not None:
        write_histogram_csv(metrics, hist)
    if json_out is not None:
        write_metrics_json(metrics, json_out)
    return metrics
