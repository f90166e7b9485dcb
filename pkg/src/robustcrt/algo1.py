"""
Cutting-point MAP clustering of unordered common residues.

Once a point tau on the circle is known to lie outside every cluster's noise
arc, cutting the circle there turns each sampler's residues into a line, and
the most probable classification pairs residues by rank across samplers. The
search therefore only has to try every observed residue as a cut.

Example:
    >>> import numpy as np
    >>> r = np.array([[10.0, 12.0], [60.0, 58.0]])
    >>> assignment, tau = algo1_cluster(r, np.ones(2), 100.0)
    >>> assignment.K.tolist()
    [[1, 0], [1, 0]]
    >>> tau
    12.0
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from .arith import mod_reduce, mod_reduce_array

logger = logging.getLogger(__name__)

ObjectiveMode = Literal["full_posterior", "literal"]

_MODE_ALIASES = {
    "full_posterior": "full_posterior",
    "full": "full_posterior",
    "literal": "literal",
    "theorem1_literal": "literal",
}


def normalize_mode(mode: str) -> str:
    """Map CLI and long-form objective names onto 'full_posterior' / 'literal'."""
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(
            f"Unknown objective mode {mode!r}; expected one of {sorted(_MODE_ALIASES)}"
        ) from None


@dataclass(frozen=True)
class Arc:
    """Directed arc [start, start + length] on the circle of circumference gamma."""

    start: float
    length: float
    gamma: float

    @property
    def end(self) -> float:
        return mod_reduce(self.start + self.length, self.gamma)

    def contains(self, x: float) -> bool:
        return mod_reduce(x - self.start, self.gamma) <= self.length

    def lift(self, values: np.ndarray) -> np.ndarray:
        """Place values on the line segment [start, start + length] they occupy."""
        return self.start + mod_reduce_array(np.asarray(values) - self.start, self.gamma)


@dataclass(frozen=True)
class CutState:
    """Residues after cutting the circle at tau, with per-sampler rank tables."""

    tau: float
    r: np.ndarray
    r_shift: np.ndarray
    order: np.ndarray
    gamma: float

    @property
    def ranked(self) -> np.ndarray:
        """Row i holds the i-th smallest shifted residue of every sampler."""
        return np.take_along_axis(self.r_shift, self.order, axis=0)


@dataclass
class ClusterAssignment:
    """
    One bijection per sampler: K[l, i] is the observation row of sampler l
    assigned to cluster i.
    """

    K: np.ndarray
    proper: bool
    intervals: List[Optional[Arc]] = field(default_factory=list)
    score: float = float("nan")

    @property
    def N(self) -> int:
        return int(self.K.shape[1])

    @property
    def L(self) -> int:
        return int(self.K.shape[0])

    def cluster_values(self, M: np.ndarray) -> np.ndarray:
        """Gather an N x L matrix (e.g. R or r) into cluster rows."""
        return np.take_along_axis(M, self.K.T, axis=0)


def shift_residues(r: np.ndarray, tau: float, gamma: float) -> np.ndarray:
    """Subtract gamma from every residue strictly above the cut tau."""
    if not 0.0 <= tau < gamma:
        raise ValueError(f"Cutting point must lie in [0, {gamma}), got {tau!r}")
    r = np.asarray(r, dtype=float)
    return np.where(r > tau, r - gamma, r)


def cut_state(r: np.ndarray, tau: float, gamma: float) -> CutState:
    r = np.atleast_2d(np.asarray(r, dtype=float))
    r_shift = shift_residues(r, tau, gamma)
    order = np.argsort(r_shift, axis=0, kind="stable")
    return CutState(tau=float(tau), r=r, r_shift=r_shift, order=order, gamma=float(gamma))


def _cluster_scores(ranked: np.ndarray, weights: np.ndarray, mode: str) -> np.ndarray:
    if mode == "literal":
        return (ranked @ weights) ** 2
    total = weights.sum()
    centre = (ranked @ weights) / total
    # Centered form of (sum w r)^2 / W - sum w r^2; invariant to shifting a cluster
    return -(((ranked - centre[:, np.newaxis]) ** 2) @ weights)


def cut_objective(cs: CutState, weights: Sequence[float], mode: str = "full_posterior") -> float:
    """
    Score the rank pairing at one cut.

    full_posterior is the log posterior up to a constant (larger is better);
    literal is sum_i (sum_l w_l * ranked_il)^2 (smaller is better).
    """
    mode = normalize_mode(mode)
    w = np.asarray(weights, dtype=float)
    return float(_cluster_scores(cs.ranked, w, mode).sum())


def rank_pairing(cs: CutState) -> ClusterAssignment:
    """Cluster i takes the i-th smallest shifted residue of every sampler."""
    K = cs.order.T.copy()
    proper, intervals = properness_check(K, cs.r, cs.gamma)
    return ClusterAssignment(K=K, proper=proper, intervals=intervals)


def _cluster_arc(values: np.ndarray, gamma: float) -> Optional[Arc]:
    """Shortest arc holding all values, if it is shorter than half the circle."""
    v = np.sort(np.asarray(values, dtype=float))
    gaps = np.empty(v.shape[0])
    gaps[:-1] = np.diff(v)
    gaps[-1] = v[0] + gamma - v[-1]
    widest = int(np.argmax(gaps))
    length = gamma - float(gaps[widest])
    if length >= gamma / 2.0:
        return None
    start = float(v[(widest + 1) % v.shape[0]])
    return Arc(start=start, length=max(0.0, length), gamma=gamma)


def properness_check(
    K: np.ndarray, r: np.ndarray, gamma: float
) -> Tuple[bool, List[Optional[Arc]]]:
    """
    Find each cluster's noise arc and decide whether the classification is proper.

    Proper means every cluster fits in an arc shorter than gamma / 2 and at least
    one point of the circle is covered by no arc.

    Returns:
        (proper, intervals) with intervals[i] None when cluster i has no such arc.
    """
    K = np.asarray(K)
    r = np.atleast_2d(np.asarray(r, dtype=float))
    clusters = np.take_along_axis(r, K.T, axis=0)
    intervals = [_cluster_arc(row, gamma) for row in clusters]
    if any(arc is None for arc in intervals):
        return False, intervals

    arcs = [arc for arc in intervals if arc is not None]
    for arc in arcs:
        end = arc.start + arc.length
        # The point just past this arc's end is free unless another arc runs over it
        if all(
            other is arc or mod_reduce(end - other.start, gamma) >= other.length
            for other in arcs
        ):
            return True, intervals
    return False, intervals


def classification_log_posterior(
    K: np.ndarray, r: np.ndarray, weights: Sequence[float], gamma: float
) -> float:
    """
    Log posterior of a classification, up to an additive constant.

    Integrates the common residue of each cluster out in closed form on the
    cluster's arc. Improper classifications get -inf.
    """
    proper, intervals = properness_check(K, r, gamma)
    if not proper:
        return -math.inf
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    clusters = np.take_along_axis(np.atleast_2d(np.asarray(r, dtype=float)), np.asarray(K).T, axis=0)
    log_post = 0.0
    for row, arc in zip(clusters, intervals):
        lifted = arc.lift(row)  # type: ignore[union-attr]
        centre = float(lifted @ w) / total
        log_post += -float(((lifted - centre) ** 2) @ w) + 0.5 * math.log(math.pi / total)
    return log_post


def algo1_cluster(
    r: np.ndarray,
    weights: Sequence[float],
    gamma: float,
    mode: str = "full_posterior",
) -> Tuple[ClusterAssignment, float]:
    """
    Try every observed common residue as the cutting point and keep the best rank pairing.

    Only cuts whose rank-paired clusters each span less than gamma / 2 are
    eligible. If no cut qualifies, the best-scoring cut is returned anyway and
    the assignment is marked improper.

    Args:
        r: N x L common residues.
        weights: Per-sampler weights.
        gamma: Circle circumference.
        mode: "full_posterior" (maximize) or "literal" (minimize).

    Returns:
        (assignment, tau). Ties go to the smallest tau.
    """
    mode = normalize_mode(mode)
    r = np.atleast_2d(np.asarray(r, dtype=float))
    if r.size == 0:
        raise ValueError("algo1_cluster needs at least one residue")
    w = np.asarray(weights, dtype=float)
    if w.shape != (r.shape[1],):
        raise ValueError(f"Expected {r.shape[1]} weights, got shape {w.shape}")
    sign = 1.0 if mode == "full_posterior" else -1.0

    best: Optional[Tuple[float, float]] = None
    fallback: Optional[Tuple[float, float]] = None
    for tau in np.unique(r):
        cs = cut_state(r, float(tau), gamma)
        ranked = cs.ranked
        value = sign * float(_cluster_scores(ranked, w, mode).sum())
        spread = ranked.max(axis=1) - ranked.min(axis=1)
        if np.all(spread < gamma / 2.0):
            if best is None or value > best[0]:
                best = (value, float(tau))
        elif fallback is None or value > fallback[0]:
            fallback = (value, float(tau))

    chosen = best if best is not None else fallback
    assert chosen is not None
    value, tau = chosen
    assignment = rank_pairing(cut_state(r, tau, gamma))
    assignment.score = sign * value
    if best is None:
        logger.debug(f"No eligible cut among {r.size} residues; using tau={tau:.6g} (improper)")
    elif not assignment.proper:
        logger.debug(
            f"Cut tau={tau:.6g} passed the spread check but its noise arcs leave no free point "
            f"(improper, score {assignment.score:.6g})"
        )
    else:
        logger.debug(f"Selected cut tau={tau:.6g} with score {assignment.score:.6g}")
    return assignment, tau
