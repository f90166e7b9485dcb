"""
Brute-force reference implementations.

Each function solves the same problem as a fast routine elsewhere in the
package by exhaustive search or direct numerical integration. They are only
practical for tiny inputs and exist to check the fast routines.
"""

from __future__ import annotations

import math
from itertools import permutations, product
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate

from .algo1 import ClusterAssignment, classification_log_posterior, properness_check
from .arith import ResidueVector, consistency_of, mod_reduce_array

MAX_ORACLE_N = 3
MAX_ORACLE_L = 4


def oracle_map_cluster(
    r: np.ndarray, weights: Sequence[float], gamma: float
) -> ClusterAssignment:
    """
    Exhaustive MAP classification over all N!^L permutation tuples.

    Improper classifications have zero posterior. The first tuple in
    lexicographic order wins ties; if none is proper the first tuple is
    returned with proper=False and score -inf.

    Raises:
        ValueError: If N > 3 or L > 4.
    """
    r = np.atleast_2d(np.asarray(r, dtype=float))
    N, L = r.shape
    if N > MAX_ORACLE_N or L > MAX_ORACLE_L:
        raise ValueError(
            f"Exhaustive search limited to N <= {MAX_ORACLE_N}, L <= {MAX_ORACLE_L}; got N={N}, L={L}"
        )
    best_K = None
    best_score = -math.inf
    for combo in product(permutations(range(N)), repeat=L):
        K = np.array(combo, dtype=np.int64)
        score = classification_log_posterior(K, r, weights, gamma)
        if best_K is None or score > best_score:
            best_K, best_score = K, score

    assert best_K is not None
    proper, intervals = properness_check(best_K, r, gamma)
    return ClusterAssignment(K=best_K, proper=proper, intervals=intervals, score=best_score)


def integrated_log_posterior(
    K: np.ndarray, r: np.ndarray, weights: Sequence[float], gamma: float
) -> float:
    """
    classification_log_posterior computed by numerical quadrature instead of
    the closed form.
    """
    proper, intervals = properness_check(K, r, gamma)
    if not proper:
        return -math.inf
    w = np.asarray(weights, dtype=float)
    total = float(w.sum())
    width = 12.0 / math.sqrt(total)
    clusters = np.take_along_axis(np.atleast_2d(np.asarray(r, dtype=float)), np.asarray(K).T, axis=0)
    log_post = 0.0
    for row, arc in zip(clusters, intervals):
        lifted = arc.lift(row)  # type: ignore[union-attr]
        centre = float(lifted @ w) / total
        # Scale by the peak value so the integrand stays near 1
        peak = -float(((lifted - centre) ** 2) @ w)

        def integrand(x: float) -> float:
            return math.exp(-float(((x - lifted) ** 2) @ w) - peak)

        value, _ = integrate.quad(integrand, centre - width, centre + width, epsabs=0.0, epsrel=1e-12)
        log_post += peak + math.log(value)
    return log_post


def brute_force_pairing(
    mu_hat: Sequence[float], r_col: Sequence[float], gamma: float
) -> Tuple[Tuple[int, ...], float]:
    """Minimum total squared circular distance over all N! matchings."""
    mu = np.asarray(mu_hat, dtype=float)
    r = np.asarray(r_col, dtype=float)
    best: Tuple[Tuple[int, ...], float] = ((), math.inf)
    for perm in permutations(range(mu.shape[0])):
        d = mod_reduce_array(mu - r[list(perm)], gamma)
        cost = float(np.sum(np.minimum(d, gamma - d) ** 2))
        if cost < best[1]:
            best = (perm, cost)
    return best


def grid_search_mean(
    values: Sequence[float],
    weights: Sequence[float],
    gamma: float,
    points: int = 100_000,
) -> Tuple[float, float]:
    """Grid minimizer of sum_l w_l * d(x, values_l)^2 and its objective value."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    grid = np.linspace(0.0, gamma, points, endpoint=False)
    best_x, best_cost = 0.0, math.inf
    # Chunked to keep the distance matrix small
    for start in range(0, points, 10_000):
        xs = grid[start:start + 10_000]
        d = mod_reduce_array(xs[:, np.newaxis] - v[np.newaxis, :], gamma)
        costs = (np.minimum(d, gamma - d) ** 2) @ w
        idx = int(np.argmin(costs))
        if costs[idx] < best_cost:
            best_x, best_cost = float(xs[idx]), float(costs[idx])
    return best_x, best_cost


def circular_objective(x: float, values: Sequence[float], weights: Sequence[float], gamma: float) -> float:
    v = np.asarray(values, dtype=float)
    d = mod_reduce_array(x - v, gamma)
    return float((np.minimum(d, gamma - d) ** 2) @ np.asarray(weights, dtype=float))


def brute_force_quotient(rv: ResidueVector, q_range: int, margin: int = 0) -> Tuple[int, int]:
    """
    Scan Q in [-margin, q_range + margin) for the largest digit agreement.

    Ties go to Q inside [0, q_range), then to the smallest Q.
    """
    outside = list(range(-margin, 0)) + list(range(q_range, q_range + margin))
    best_q, best_consistency = 0, -1
    for Q in [*range(q_range), *outside]:
        score = consistency_of(Q, rv)
        if score > best_consistency:
            best_q, best_consistency = Q, score
    return best_q, best_consistency
