"""
Tests for the Monte Carlo harness: seeding, scoring and aggregation.
"""

import math
import statistics
import sys

sys.path.insert(0, "src")

import numpy as np
import pytest

from robustcrt.algo2 import algo2_iterate
from robustcrt.arith import mod_reduce_array
from robustcrt.ensemble import EnsembleConfig, group_moduli, vote_estimates
from robustcrt.export import write_metrics_csv
from robustcrt.harness import (ExperimentConfig, _compute_chunk_size, run_experiment, run_trial,
                               score_success, trial_rng)
from robustcrt.model import GroundTruth, NoiseSpec, observe, sample_instance
from robustcrt.pipeline import Estimate
from robustcrt.reconstruct import lift_common_residue, quotient_digits, reconstruct_number


class TestTrialRng:
    """Counter-based per-trial streams."""

    def test_same_key_same_stream(self):
        a = trial_rng(1, -10.0, 5).standard_normal(4)
        b = trial_rng(1, -10.0, 5).standard_normal(4)
        assert np.array_equal(a, b)

    def test_keys_separate_streams(self):
        base = trial_rng(1, -10.0, 5).standard_normal(4)
        assert not np.array_equal(base, trial_rng(1, -10.0, 6).standard_normal(4))
        assert not np.array_equal(base, trial_rng(1, -9.0, 5).standard_normal(4))
        assert not np.array_equal(base, trial_rng(2, -10.0, 5).standard_normal(4))


class TestScoreSuccess:
    """One-to-one matching within the threshold."""

    def test_cross_matching(self):
        per_number, perfect = score_success([5010.0, 150.0], [100.0, 5000.0], 100.0)
        assert per_number == [True, True]
        assert perfect

    def test_estimate_used_once(self):
        per_number, perfect = score_success([5010.0, 5020.0], [100.0, 5000.0], 100.0)
        assert per_number == [False, True]
        assert not perfect

    def test_circular_distance(self):
        per_number, _ = score_success([999.0], [1.0], 5.0, D=1000.0)
        assert per_number == [True]
        per_number, _ = score_success([999.0], [1.0], 5.0)
        assert per_number == [False]

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            score_success([1.0, 2.0], [1.0], 5.0)


class TestExperimentConfig:
    """Validation and derived moduli."""

    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.snr_grid[0] == -40.0 and cfg.snr_grid[-1] == 0.0
        assert cfg.threshold == cfg.gamma
        assert cfg.ensemble_label == "none"
        ms = cfg.moduli_set()
        assert ms.L == 4 and ms.L0 == 2

    def test_full_range(self):
        ms = ExperimentConfig(l_min=None).moduli_set()
        assert ms.L0 == ms.L

    def test_objective_alias(self):
        assert ExperimentConfig(objective_mode="theorem1_literal").objective_mode == "literal"

    def test_invalid(self):
        with pytest.raises(ValueError):
            ExperimentConfig(N=0)
        with pytest.raises(ValueError):
            ExperimentConfig(trials=0)
        with pytest.raises(ValueError):
            ExperimentConfig(snr_grid=[])
        with pytest.raises(ValueError):
            ExperimentConfig(snr_grid=[math.nan])
        with pytest.raises(ValueError):
            ExperimentConfig(algorithm="algo3")
        with pytest.raises(ValueError):
            ExperimentConfig(workers=0)


class TestRunTrial:
    """Single seeded trials."""

    @pytest.mark.parametrize("algorithm", ["algo1", "algo2"])
    def test_noiseless_always_succeeds(self, algorithm):
        cfg = ExperimentConfig(N=3, algorithm=algorithm, trials=1)
        for index in range(5):
            result = run_trial(cfg, math.inf, index)
            assert result.perfect
            assert result.success_rate == 1.0

    def test_reproducible(self):
        cfg = ExperimentConfig(N=2, trials=1)
        first = run_trial(cfg, -5.0, 3)
        second = run_trial(cfg, -5.0, 3)
        assert np.array_equal(first.Y, second.Y)
        assert np.array_equal(first.Y_hat, second.Y_hat)
        assert first.iterations == second.iterations

    def test_timing_only_when_requested(self):
        assert run_trial(ExperimentConfig(N=1, trials=1), 0.0, 0).runtime_ms is None
        timed = run_trial(ExperimentConfig(N=1, trials=1, timing=True), 0.0, 0)
        assert timed.runtime_ms is not None and timed.runtime_ms >= 0.0

    def test_ensemble_trial(self):
        cfg = ExperimentConfig(N=2, trials=1, ensemble=EnsembleConfig())
        result = run_trial(cfg, math.inf, 0)
        assert result.perfect


    def test_strict_success_ignores_wrap(self, monkeypatch):
        monkeypatch.setattr(
            "robustcrt.harness.sample_instance", lambda ms, n, rng: GroundTruth.from_values([5.0], ms.gamma)
        )
        monkeypatch.setattr(
            "robustcrt.harness.estimate", lambda view, ms, **kwargs: Estimate(estimates=np.array([ms.D - 20.0]))
        )
        result = run_trial(ExperimentConfig(N=1, trials=1), math.inf, 0)
        assert result.success == [True]
        assert result.strict_success == [False]
        assert result.strict_success_rate == 0.0

    def test_matches_step_by_step_pipeline(self):
        cfg = ExperimentConfig(N=2, trials=1, master_seed=11, ensemble=EnsembleConfig())
        snr, index = 0.0, 3
        result = run_trial(cfg, snr, index)

        rng = trial_rng(cfg.master_seed, snr, index)
        noise = NoiseSpec(snr_db=snr)
        ms = cfg.moduli_set().with_noise(noise)
        gt = sample_instance(ms, cfg.N, rng)
        obs = observe(gt, ms, noise, rng)
        view = obs.view()
        per_group, iterations = [], []
        for group in group_moduli(ms, cfg.ensemble, rng):
            sub_view, sub_ms = view.restrict(group), ms.subset(group)
            state = algo2_iterate(sub_view, sub_ms, max_iter=cfg.max_iter, rng=rng, restarts=cfg.restarts)
            iterations.append(state.iteration)
            recs = []
            for row, mu in zip(np.take_along_axis(sub_view.R, state.K_hat.T, axis=0), state.mu_hat):
                lift = lift_common_residue(
                    mod_reduce_array(row, sub_ms.gamma), float(mu), sub_ms.gamma, sub_ms.weights
                )
                q = quotient_digits(row, float(mu), sub_ms, mu_lift=lift)
                recs.append(reconstruct_number(q, float(mu), sub_ms, mu_lift=lift))
            per_group.append(recs)
        vote = vote_estimates(per_group, cfg.N, ms.gamma, ms.D)
        per_number, perfect = score_success(vote.estimates, gt.Y, cfg.threshold, ms.D)

        assert np.array_equal(result.Y, gt.Y)
        assert np.array_equal(result.Y_hat, vote.estimates)
        assert result.success == per_number
        assert result.perfect == perfect
        assert result.iterations == statistics.median_low(iterations)
        assert result.degenerate == vote.degenerate

class TestRunExperiment:
    """Aggregation over the SNR grid."""

    def test_rows_and_histogram(self):
        cfg = ExperimentConfig(N=2, snr_grid=[-30.0, 0.0], trials=4)
        metrics = run_experiment(cfg)
        assert [row.snr for row in metrics.rows] == [-30.0, 0.0]
        for row in metrics.rows:
            assert row.trials == 4
            assert 0.0 <= row.perfect_success <= row.avg_success <= 1.0
            assert row.mean_runtime_ms is None
            assert sum(metrics.iterations[row.snr].values()) == 4
        pooled = metrics.scenario_histogram()
        assert sum(pooled["low"].values()) == 4
        assert sum(pooled["high"].values()) == 4
        scenarios = {(r["snr"], r["scenario"]) for r in metrics.histogram_records()}
        assert scenarios == {(-30.0, "low"), (0.0, "high")}

    def test_row_matches_trials(self):
        cfg = ExperimentConfig(N=2, snr_grid=[-8.0], trials=3)
        metrics = run_experiment(cfg)
        rates = [run_trial(cfg, -8.0, i).success_rate for i in range(3)]
        assert metrics.rows[0].avg_success == pytest.approx(float(np.mean(rates)))

    def test_strict_rate_aggregated(self):
        cfg = ExperimentConfig(N=2, snr_grid=[-8.0], trials=3)
        row = run_experiment(cfg).rows[0]
        trials = [run_trial(cfg, -8.0, i) for i in range(3)]
        assert row.avg_strict_success == pytest.approx(float(np.mean([t.strict_success_rate for t in trials])))
        assert row.avg_strict_success <= row.avg_success
        assert row.to_record()["avg_strict_success"] == row.avg_strict_success

    def test_identical_bytes_across_runs_and_workers(self, tmp_path):
        cfg = ExperimentConfig(N=2, snr_grid=[-10.0, 0.0], trials=4, master_seed=42)
        parallel = ExperimentConfig(N=2, snr_grid=[-10.0, 0.0], trials=4, master_seed=42, workers=2)
        first = write_metrics_csv(run_experiment(cfg), tmp_path / "a.csv")
        second = write_metrics_csv(run_experiment(cfg), tmp_path / "b.csv")
        third = write_metrics_csv(run_experiment(parallel), tmp_path / "c.csv")
        assert first.read_bytes() == second.read_bytes() == third.read_bytes()

    def test_writes_requested_files(self, tmp_path):
        cfg = ExperimentConfig(N=1, snr_grid=[0.0], trials=2)
        run_experiment(cfg, out=tmp_path / "m.csv", hist=tmp_path / "h.csv", json_out=tmp_path / "m.json")
        assert (tmp_path / "m.csv").exists()
        assert (tmp_path / "h.csv").exists()
        assert (tmp_path / "m.json").exists()

    def test_chunk_size(self):
        assert _compute_chunk_size(0, 4) == 1
        assert _compute_chunk_size(100, 4) == 6
        assert _compute_chunk_size(3, 8) == 1
