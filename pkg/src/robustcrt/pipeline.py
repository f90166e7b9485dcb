"""
One entry point from observed residues to N number estimates.

Shared by the Monte Carlo harness and the `solve` command so both run exactly
the same composition: cluster (algo1 or algo2), reconstruct each cluster, and
optionally repeat over moduli groups and vote.
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .algo1 import algo1_cluster, normalize_mode
from .algo2 import DEFAULT_MAX_ITER, algo2_iterate
from .arith import mod_reduce_array
from .ensemble import EnsembleConfig, group_moduli, vote_estimates
from .model import ModuliSet, ObservationView
from .reconstruct import (Reconstruction, lift_common_residue, quotient_digits,
                          reconstruct_number, single_rcrt)

logger = logging.getLogger(__name__)

ALGORITHMS = ("algo1", "algo2")


@dataclass
class Estimate:
    """Final estimates plus diagnostics of how they were obtained."""

    estimates: np.ndarray
    reconstructions: List[Reconstruction] = field(default_factory=list)
    iterations: int = 1
    proper: Optional[bool] = None
    degenerate: bool = False
    unreliable: int = 0
    groups: int = 1


def _single_shot(
    view: ObservationView,
    ms: ModuliSet,
    algorithm: str,
    mode: str,
    ec: bool,
    max_iter: int,
    restarts: int,
    rng: np.random.Generator,
) -> Estimate:
    if algorithm == "algo1":
        assignment, _ = algo1_cluster(view.r, ms.weights, ms.gamma, mode)
        rows = assignment.cluster_values(view.R)
        recs = [single_rcrt(row, ms, ec=ec) for row in rows]
        return Estimate(
            estimates=np.array([rec.Y_hat for rec in recs]),
            reconstructions=recs,
            iterations=1,
            proper=assignment.proper,
            unreliable=sum(not rec.reliable for rec in recs),
        )

    state = algo2_iterate(view, ms, max_iter=max_iter, rng=rng, restarts=restarts)
    rows = np.take_along_axis(view.R, state.K_hat.T, axis=0)
    recs = []
    for row, mu in zip(rows, state.mu_hat):
        if ec:
            recs.append(single_rcrt(row, ms, ec=True))
        else:
            lift = lift_common_residue(mod_reduce_array(row, ms.gamma), float(mu), ms.gamma, ms.weights)
            q = quotient_digits(row, float(mu), ms, mu_lift=lift)
            recs.append(reconstruct_number(q, float(mu), ms, mu_lift=lift))
    return Estimate(
        estimates=np.array([rec.Y_hat for rec in recs]),
        reconstructions=recs,
        iterations=state.iteration,
        unreliable=sum(not rec.reliable for rec in recs),
    )


def estimate(
    view: ObservationView,
    ms: ModuliSet,
    algorithm: str = "algo2",
    mode: str = "full_posterior",
    ensemble: Optional[EnsembleConfig] = None,
    ec: bool = False,
    max_iter: int = DEFAULT_MAX_ITER,
    restarts: int = 1,
    rng: Optional[np.random.Generator] = None,
) -> Estimate:
    """
    Estimate the N numbers behind an observation.

    Args:
        view: Residues as seen by the estimator.
        ms: Moduli set (with noise levels for weighting).
        algorithm: "algo1" (cutting-point clustering) or "algo2" (alternating descent).
        mode: Objective for algo1 ("full_posterior" or "literal").
        ensemble: Group the moduli and vote when given.
        ec: Error-corrected reconstruction.
        max_iter: Iteration cap for algo2.
        restarts: algo2 initializations.
        rng: Random generator (algo2 initialization, random_k grouping).

    Returns:
        Estimate with N values in [0, D).
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"Unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    mode = normalize_mode(mode)
    if view.L != ms.L:
        raise ValueError(f"Observation has {view.L} samplers but moduli set has {ms.L}")
    rng = rng if rng is not None else np.random.default_rng()

    if ensemble is None:
        return _single_shot(view, ms, algorithm, mode, ec, max_iter, restarts, rng)

    groups = group_moduli(ms, ensemble, rng)
    use_ec = ec or ensemble.ec
    per_group: List[List[Reconstruction]] = []
    iterations: List[int] = []
    unreliable = 0
    proper_flags: List[bool] = []
    for group in groups:
        part = _single_shot(
            view.restrict(group), ms.subset(group), algorithm, mode, use_ec, max_iter, restarts, rng
        )
        per_group.append(part.reconstructions)
        iterations.append(part.iterations)
        unreliable += part.unreliable
        if part.proper is not None:
            proper_flags.append(part.proper)

    vote = vote_estimates(per_group, view.N, ms.gamma, ms.D)
    logger.debug(
        f"Voted over {len(groups)} groups: {len(vote.table.entries)} buckets, "
        f"degenerate={vote.degenerate}"
    )
    return Estimate(
        estimates=vote.estimates,
        reconstructions=[rec for recs in per_group for rec in recs],
        iterations=statistics.median_low(iterations),
        proper=all(proper_flags) if proper_flags else None,
        degenerate=vote.degenerate,
        unreliable=unreliable,
        groups=len(groups),
    )
