"""
Tests for cyclic-shift matching, circular means and alternating descent.
"""

import math
import sys
from dataclasses import replace

sys.path.insert(0, "src")

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from scipy.stats import norm

from robustcrt.algo2 import (algo2_iterate, circular_weighted_mean, match_sampler, pairing_cost,
                             wrapped_log_likelihood)
from robustcrt.arith import circ_dist
from robustcrt.oracles import brute_force_pairing, circular_objective, grid_search_mean

GAMMA = 100.0
residues = st.floats(0.0, 99.999)


class TestMatchSampler:
    """Optimal matching of estimates to one sampler."""

    def test_example(self):
        perm = match_sampler([10.0, 60.0], [55.0, 5.0], GAMMA)
        assert perm.tolist() == [1, 0]
        assert pairing_cost([10.0, 60.0], [55.0, 5.0], perm, GAMMA) == pytest.approx(50.0)

    def test_single(self):
        assert match_sampler([42.0], [17.0], GAMMA).tolist() == [0]

    def test_same_multiset_costs_nothing(self):
        mu = [80.0, 3.0, 41.0]
        perm = match_sampler(mu, [41.0, 80.0, 3.0], GAMMA)
        assert pairing_cost(mu, [41.0, 80.0, 3.0], perm, GAMMA) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            match_sampler([1.0, 2.0], [1.0], GAMMA)

    @given(st.integers(1, 6).flatmap(lambda n: st.tuples(
        st.lists(residues, min_size=n, max_size=n), st.lists(residues, min_size=n, max_size=n)
    )))
    @settings(max_examples=300)
    def test_matches_exhaustive_search(self, pair):
        mu, r = pair
        perm = match_sampler(mu, r, GAMMA)
        assert sorted(perm.tolist()) == list(range(len(mu)))
        _, best = brute_force_pairing(mu, r, GAMMA)
        assert pairing_cost(mu, r, perm, GAMMA) == pytest.approx(best, rel=1e-9, abs=1e-9)


class TestCircularWeightedMean:
    """Weighted Frechet mean on the circle."""

    def test_examples(self):
        assert circular_weighted_mean([98.0, 2.0], [1.0, 1.0], GAMMA) == pytest.approx(0.0, abs=1e-12)
        assert circular_weighted_mean([10.0, 20.0, 30.0], [1.0, 1.0, 1.0], GAMMA) == pytest.approx(20.0)
        assert circular_weighted_mean([37.5], [2.0], GAMMA) == 37.5

    def test_weights_pull_mean(self):
        assert circular_weighted_mean([10.0, 20.0], [3.0, 1.0], GAMMA) == pytest.approx(12.5)

    def test_rejects_mismatch(self):
        with pytest.raises(ValueError):
            circular_weighted_mean([1.0, 2.0], [1.0], GAMMA)

    @given(
        st.integers(1, 5).flatmap(lambda n: st.tuples(
            st.lists(residues, min_size=n, max_size=n),
            st.lists(st.floats(0.1, 5.0), min_size=n, max_size=n),
        ))
    )
    @settings(max_examples=100, deadline=None)
    def test_not_worse_than_grid(self, pair):
        values, weights = pair
        mean = circular_weighted_mean(values, weights, GAMMA)
        assert 0.0 <= mean < GAMMA
        _, grid_cost = grid_search_mean(values, weights, GAMMA)
        assert circular_objective(mean, values, weights, GAMMA) <= grid_cost + 1e-6


class TestAlgo2Iterate:
    """Alternating descent."""

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_noiseless_converges_to_truth(self, make_instance, same_clusters, n):
        ms, gt, obs = make_instance(n=n, seed=60 + n)
        state = algo2_iterate(obs.view(), ms, rng=np.random.default_rng(0))
        assert state.converged
        assert state.iteration <= 2
        assert same_clusters(state.K_hat, obs.true_perm)
        for mu in gt.mu:
            assert min(circ_dist(mu, m, GAMMA) for m in state.mu_hat) < 1e-6

    @pytest.mark.parametrize("seed", range(8))
    def test_objective_trace_never_increases(self, make_instance, seed):
        ms, _, obs = make_instance(n=3, snr=-12.0 + seed, seed=seed)
        state = algo2_iterate(obs.view(), ms, rng=np.random.default_rng(seed))
        assert state.trace
        assert all(b <= a for a, b in zip(state.trace, state.trace[1:]))
        assert state.objective == state.trace[-1]
        assert 1 <= state.iteration <= 50

    def test_iteration_cap(self, make_instance):
        ms, _, obs = make_instance(n=3, snr=-10.0, seed=4)
        state = algo2_iterate(obs.view(), ms, max_iter=1, rng=np.random.default_rng(1))
        assert state.iteration == 1
        assert len(state.trace) == 1

    def test_restarts_never_lower_likelihood(self, make_instance):
        ms, _, obs = make_instance(n=4, snr=-10.0, seed=12)
        single = algo2_iterate(obs.view(), ms, rng=np.random.default_rng(3))
        several = algo2_iterate(obs.view(), ms, rng=np.random.default_rng(3), restarts=5)
        assert single.log_likelihood is not None
        assert several.log_likelihood >= single.log_likelihood
        assert several.log_likelihood == pytest.approx(
            wrapped_log_likelihood(several.mu_hat, several.K_hat, obs.r, ms.sigma, GAMMA)
        )

    def test_restarts_fall_back_to_objective_without_noise_levels(self, make_instance):
        noisy, _, obs = make_instance(n=4, snr=-10.0, seed=12)
        ms = replace(noisy, sigma=())
        single = algo2_iterate(obs.view(), ms, rng=np.random.default_rng(3))
        several = algo2_iterate(obs.view(), ms, rng=np.random.default_rng(3), restarts=5)
        assert several.log_likelihood is None
        assert several.objective <= single.objective

    def test_explicit_initialization(self, make_instance):
        ms, _, obs = make_instance(n=2, seed=5)
        state = algo2_iterate(obs.view(), ms, init=2)
        assert state.init_column == 2
        state = algo2_iterate(obs.view(), ms, init=obs.r[:, 0])
        assert state.init_column is None
        with pytest.raises(ValueError):
            algo2_iterate(obs.view(), ms, init=9)
        with pytest.raises(ValueError):
            algo2_iterate(obs.view(), ms, init=[1.0, 2.0, 3.0])

    def test_invalid_arguments(self, make_instance):
        ms, _, obs = make_instance(n=2, seed=5)
        with pytest.raises(ValueError):
            algo2_iterate(obs.view(), ms, max_iter=0)
        with pytest.raises(ValueError):
            algo2_iterate(obs.view(), ms, restarts=0)
        with pytest.raises(ValueError):
            algo2_iterate(obs.view().restrict([0, 1]), ms)


class TestWrappedLikelihood:
    """Exact wrapped-Gaussian likelihood."""

    def test_single_residue(self):
        value = wrapped_log_likelihood([50.0], np.array([[0]]), np.array([[52.0]]), [1.0], GAMMA)
        assert value == pytest.approx(norm.logpdf(2.0), rel=1e-12)

    def test_wraps_around(self):
        near = wrapped_log_likelihood([1.0], np.array([[0]]), np.array([[99.0]]), [1.0], GAMMA)
        assert near == pytest.approx(norm.logpdf(2.0), rel=1e-12)

    def test_better_assignment_scores_higher(self):
        r = np.array([[10.0, 61.0], [60.0, 11.0]])
        good = wrapped_log_likelihood([10.0, 60.0], np.array([[0, 1], [1, 0]]), r, [1.0, 1.0], GAMMA)
        bad = wrapped_log_likelihood([10.0, 60.0], np.array([[0, 1], [0, 1]]), r, [1.0, 1.0], GAMMA)
        assert good > bad
        assert math.isfinite(good)

    def test_requires_noise(self):
        with pytest.raises(ValueError):
            wrapped_log_likelihood([1.0], np.array([[0]]), np.array([[1.0]]), [0.0], GAMMA)
