"""
Alternating MAP estimation of permutations and common residues.

Step one re-matches every sampler's residues to the current common-residue
estimates; with both sides sorted on the circle the optimal matching is one of
the N cyclic shifts of the sorted order. Step two moves each estimate to the
weighted circular mean of the residues matched to it. Each block update is
kept only if it does not raise the total squared circular distance, so the
objective trace never increases.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .arith import mod_reduce_array
from .model import ModuliSet, ObservationView

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 50

InitPolicy = Union[None, int, Sequence[float], np.ndarray]


def _circ_dist_array(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    d = mod_reduce_array(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), gamma)
    return np.minimum(d, gamma - d)


def match_sampler(
    mu_hat: Sequence[float],
    r_col: Sequence[float],
    gamma: float,
    w_l: float = 1.0,
) -> np.ndarray:
    """
    Optimal one-to-one matching of estimates to one sampler's residues.

    Inputs need not be sorted; both are ordered internally (stable) and every
    cyclic shift of the sorted pairing is scored.

    Returns:
        perm with perm[i] the index into r_col matched to mu_hat[i].
        Ties between shifts go to the smallest shift.
    """
    mu = np.asarray(mu_hat, dtype=float)
    r = np.asarray(r_col, dtype=float)
    if mu.shape != r.shape or mu.ndim != 1:
        raise ValueError(f"Expected two equal-length vectors, got {mu.shape} and {r.shape}")
    n = mu.shape[0]
    a = np.argsort(mu, kind="stable")
    b = np.argsort(r, kind="stable")
    mu_sorted = mu[a]

    best_shift, best_cost = 0, math.inf
    for shift in range(n):
        cost = w_l * float(np.sum(_circ_dist_array(mu_sorted, r[np.roll(b, -shift)], gamma) ** 2))
        if cost < best_cost:
            best_shift, best_cost = shift, cost

    perm = np.empty(n, dtype=np.int64)
    perm[a] = np.roll(b, -best_shift)
    return perm


def pairing_cost(
    mu_hat: Sequence[float], r_col: Sequence[float], perm: Sequence[int], gamma: float
) -> float:
    """Sum of squared circular distances between mu_hat[i] and r_col[perm[i]]."""
    r = np.asarray(r_col, dtype=float)
    return float(np.sum(_circ_dist_array(np.asarray(mu_hat, dtype=float), r[np.asarray(perm)], gamma) ** 2))


def circular_weighted_mean(
    values: Sequence[float], weights: Sequence[float], gamma: float
) -> float:
    """
    Minimizer of sum_l w_l * d(x, values_l)^2 over the circle.

    With the values sorted ascending, the minimizer is the plain weighted mean of
    one of L lifts in which the j smallest values are moved up by gamma.

    Example:
        >>> circular_weighted_mean([98.0, 2.0], [1.0, 1.0], 100.0)
        0.0
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.ndim != 1 or v.shape[0] < 1 or w.shape != v.shape:
        raise ValueError(f"Expected matching non-empty values and weights, got {v.shape} and {w.shape}")
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    total = w.sum()
    lifted_mass = np.concatenate(([0.0], np.cumsum(w)[:-1])) * gamma
    candidates = mod_reduce_array((float(v @ w) + lifted_mass) / total, gamma)
    costs = (_circ_dist_array(candidates[:, np.newaxis], v[np.newaxis, :], gamma) ** 2) @ w
    return float(candidates[int(np.argmin(costs))])


@dataclass
class IterState:
    """Estimates and assignments after alternating descent."""

    mu_hat: np.ndarray
    K_hat: np.ndarray
    objective: float
    iteration: int
    trace: List[float] = field(default_factory=list)
    converged: bool = False
    init_column: Optional[int] = None
    log_likelihood: Optional[float] = None


def _objective(mu: np.ndarray, K: np.ndarray, r: np.ndarray, w: np.ndarray, gamma: float) -> float:
    clustered = np.take_along_axis(r, K.T, axis=0)
    d = _circ_dist_array(mu[:, np.newaxis], clustered, gamma)
    return float(np.sum((d**2) @ w))


def _initial_mu(r: np.ndarray, init: InitPolicy, rng: np.random.Generator) -> tuple:
    L = r.shape[1]
    if init is None:
        column = int(rng.integers(L))
        return r[:, column].copy(), column
    if isinstance(init, (int, np.integer)):
        if not 0 <= int(init) < L:
            raise ValueError(f"Initial column must lie in [0, {L}), got {init}")
        return r[:, int(init)].copy(), int(init)
    mu = np.asarray(init, dtype=float)
    if mu.shape != (r.shape[0],):
        raise ValueError(f"Initial estimates must have shape ({r.shape[0]},), got {mu.shape}")
    return mu.copy(), None


def _descend(
    r: np.ndarray,
    w: np.ndarray,
    gamma: float,
    mu: np.ndarray,
    max_iter: int,
) -> IterState:
    N, L = r.shape
    K: Optional[np.ndarray] = None
    current = math.inf
    trace: List[float] = []
    converged = False
    iteration = 0

    for iteration in range(1, max_iter + 1):
        K_new = np.stack([match_sampler(mu, r[:, l], gamma) for l in range(L)])  # noqa: E741
        objective = _objective(mu, K_new, r, w, gamma)
        if K is not None and objective > current:
            K_new, objective = K, current
        unchanged = K is not None and np.array_equal(K_new, K)
        K, current = K_new, objective

        clustered = np.take_along_axis(r, K.T, axis=0)
        mu_new = np.array([circular_weighted_mean(row, w, gamma) for row in clustered])
        objective = _objective(mu_new, K, r, w, gamma)
        if objective <= current:
            mu, current = mu_new, objective
        trace.append(current)

        if unchanged:
            converged = True
            break

    assert K is not None
    return IterState(
        mu_hat=mu,
        K_hat=K,
        objective=current,
        iteration=iteration,
        trace=trace,
        converged=converged,
    )


def algo2_iterate(
    obs: ObservationView,
    ms: ModuliSet,
    init: InitPolicy = None,
    max_iter: int = DEFAULT_MAX_ITER,
    rng: Optional[np.random.Generator] = None,
    restarts: int = 1,
) -> IterState:
    """
    Run alternating descent from one or more initializations.

    Args:
        obs: Residue view; only the common residues r are used.
        ms: Moduli (supplies gamma and sampler weights).
        init: None draws a sampler column uniformly; an int picks that column;
            an array gives the initial estimates directly. Only the first
            restart honours an explicit init.
        max_iter: Iteration cap per restart.
        rng: Random generator for column draws.
        restarts: Number of initializations. With every sampler noisy, the run
            with the highest wrapped-Gaussian log-likelihood wins; otherwise
            the lowest final objective wins. Ties keep the earlier run.

    Returns:
        IterState of the winning run (log_likelihood filled in when every
        sampler is noisy).
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    if obs.L != ms.L:
        raise ValueError(f"Observation has {obs.L} samplers but moduli set has {ms.L}")
    rng = rng if rng is not None else np.random.default_rng()
    w = ms.weights
    noisy = all(s > 0 for s in ms.sigma)

    best: Optional[IterState] = None
    for attempt in range(restarts):
        mu0, column = _initial_mu(obs.r, init if attempt == 0 else None, rng)
        state = _descend(obs.r, w, ms.gamma, mu0, max_iter)
        state.init_column = column
        if noisy:
            state.log_likelihood = wrapped_log_likelihood(
                state.mu_hat, state.K_hat, obs.r, ms.sigma, ms.gamma
            )
        if best is None or _better(state, best):
            best = state

    assert best is not None
    logger.debug(
        f"algo2 finished after {best.iteration} iterations "
        f"(converged={best.converged}, objective={best.objective:.6g})"
    )
    return best


def _better(state: IterState, best: IterState) -> bool:
    if state.log_likelihood is not None and best.log_likelihood is not None:
        return state.log_likelihood > best.log_likelihood
    return state.objective < best.objective


def wrapped_log_likelihood(
    mu_hat: Sequence[float],
    K: np.ndarray,
    r: np.ndarray,
    sigma: Sequence[float],
    gamma: float,
    translates: int = 3,
) -> float:
    """
    Exact wrapped-Gaussian log-likelihood of estimates and assignments.

    Sums the Gaussian density over 2 * translates + 1 copies of the circle,
    which is exact to machine precision whenever sigma is well below gamma.

    Raises:
        ValueError: If any sigma is not positive.
    """
    s = np.asarray(sigma, dtype=float)
    if np.any(s <= 0):
        raise ValueError("Wrapped likelihood needs strictly positive noise levels")
    mu = np.asarray(mu_hat, dtype=float)
    clustered = np.take_along_axis(np.asarray(r, dtype=float), np.asarray(K).T, axis=0)
    offsets = gamma * np.arange(-translates, translates + 1)
    diffs = clustered[:, :, np.newaxis] - mu[:, np.newaxis, np.newaxis] + offsets
    log_terms = norm.logpdf(diffs, scale=s[np.newaxis, :, np.newaxis])
    return float(np.sum(logsumexp(log_terms, axis=2)))
