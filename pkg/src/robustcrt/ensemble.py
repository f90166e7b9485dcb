"""
Moduli grouping and frequency voting.

Any subset of moduli whose combined range reaches D can reconstruct every
number on its own. Running the estimator on many subsets gives kappa * N
candidate numbers; the N quotients that appear most often are kept.

Example:
    >>> from robustcrt.model import build_moduli
    >>> ms = build_moduli(2, 100.0, l_min=2)
    >>> len(group_moduli(ms, EnsembleConfig()))
    6
"""

from __future__ import annotations

import logging
import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algo2 import circular_weighted_mean
from .arith import circ_dist, mod_reduce, signed_offset
from .model import ModuliSet
from .reconstruct import Reconstruction

logger = logging.getLogger(__name__)

POLICIES = ("all_pairs", "all_subsets", "disjoint_groups", "random_k")


@dataclass
class EnsembleConfig:
    """
    How to split the moduli into groups.

    Attributes:
        subset_size: Moduli per group (forced to 2 for all_pairs).
        policy: One of all_pairs, all_subsets, disjoint_groups, random_k.
        kappa: Number of groups drawn by random_k (default C(L, 2)).
        ec: Use error-corrected reconstruction inside each group.
    """

    subset_size: int = 2
    policy: str = "all_pairs"
    kappa: Optional[int] = None
    ec: bool = False

    def __post_init__(self) -> None:
        if self.policy not in POLICIES:
            raise ValueError(f"Unknown grouping policy {self.policy!r}; expected one of {POLICIES}")
        if self.policy == "all_pairs":
            self.subset_size = 2
        if self.subset_size < 1:
            raise ValueError(f"subset_size must be >= 1, got {self.subset_size}")
        if self.kappa is not None and self.kappa < 1:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")

    @property
    def label(self) -> str:
        """Short tag used in result files."""
        if self.policy == "all_pairs":
            return "pairs"
        if self.policy == "all_subsets":
            return f"subsets:{self.subset_size}"
        if self.policy == "disjoint_groups":
            return f"disjoint:{self.subset_size}"
        suffix = f":{self.kappa}" if self.kappa is not None else ""
        return f"random:{self.subset_size}{suffix}"


def group_moduli(
    ms: ModuliSet,
    cfg: EnsembleConfig,
    rng: Optional[np.random.Generator] = None,
) -> List[Tuple[int, ...]]:
    """
    Sampler index groups for an ensemble.

    Groups whose moduli do not reach the dynamic range are skipped.

    Raises:
        ValueError: If subset_size exceeds L or no group is valid.
    """
    S, L = cfg.subset_size, ms.L
    if S > L:
        raise ValueError(f"subset_size {S} exceeds the number of moduli {L}")

    if cfg.policy == "disjoint_groups":
        candidates = [tuple(range(start, start + S)) for start in range(0, L - S + 1, S)]
    else:
        candidates = list(combinations(range(L), S))
    groups = [g for g in candidates if ms.covers(g)]

    if cfg.policy == "random_k" and groups:
        k = cfg.kappa if cfg.kappa is not None else math.comb(L, 2)
        k = min(k, len(groups))
        rng = rng if rng is not None else np.random.default_rng()
        picks = rng.choice(len(groups), size=k, replace=False)
        groups = [groups[i] for i in sorted(int(p) for p in picks)]

    if not groups:
        raise ValueError(
            f"No group of {S} moduli from {ms.M} reaches the dynamic range D={ms.D}"
        )
    return groups


@dataclass
class VoteTable:
    """Quotient buckets after unifying neighbouring quotients."""

    entries: Dict[int, int] = field(default_factory=dict)
    members: Dict[int, List[Reconstruction]] = field(default_factory=dict, repr=False)

    @property
    def total(self) -> int:
        return sum(self.entries.values())


@dataclass
class VoteResult:
    """The N winning estimates in rank order."""

    estimates: np.ndarray
    quotients: List[int]
    table: VoteTable
    degenerate: bool = False


def _canonical(rec: Reconstruction, gamma: float) -> Tuple[int, float]:
    Q = int(math.floor(rec.Y_hat / gamma))
    return Q, mod_reduce(rec.Y_hat, gamma)


def _bucket_mean(members: Sequence[Reconstruction], gamma: float) -> float:
    values = [mod_reduce(m.Y_hat, gamma) for m in members]
    return circular_weighted_mean(values, np.ones(len(values)), gamma)


def _should_merge(lower: List[Reconstruction], upper: List[Reconstruction], gamma: float) -> bool:
    # lower sits just under a quotient boundary and upper just over it
    mu_lower = _bucket_mean(lower, gamma)
    mu_upper = _bucket_mean(upper, gamma)
    return (
        mu_lower >= gamma / 2.0
        and mu_upper < gamma / 2.0
        and circ_dist(mu_lower, mu_upper, gamma) < gamma / 4.0
    )


def _consistency(members: Sequence[Reconstruction]) -> float:
    return float(np.mean([m.ec_consistency or 0 for m in members]))


def vote_estimates(
    per_group: Sequence[Sequence[Reconstruction]],
    N: int,
    gamma: float,
    D: Optional[float] = None,
) -> VoteResult:
    """
    Keep the N most frequent quotients among all groups' reconstructions.

    Candidates are bucketed by floor(Y_hat / gamma). Two adjacent buckets whose
    members straddle the boundary between them count as one. Buckets are
    ranked by size, then mean decode consistency, then smaller quotient.
    Each winner is represented by its median member moved onto the circular
    mean of the bucket's common residues.

    Args:
        per_group: Reconstructions per group (N each).
        N: Number of estimates to return.
        gamma: Circle circumference.
        D: Dynamic range for the final reduction (defaults to no reduction).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not per_group:
        raise ValueError("vote_estimates needs at least one group")

    buckets: Dict[int, List[Reconstruction]] = defaultdict(list)
    for group in per_group:
        for rec in group:
            Q, _ = _canonical(rec, gamma)
            buckets[Q].append(rec)

    merged: Dict[int, List[Reconstruction]] = {}
    keys = sorted(buckets)
    skip = set()
    for Q in keys:
        if Q in skip:
            continue
        members = list(buckets[Q])
        if Q + 1 in buckets and _should_merge(buckets[Q], buckets[Q + 1], gamma):
            skip.add(Q + 1)
            upper = buckets[Q + 1]
            key = Q + 1 if len(upper) > len(members) else Q
            members.extend(upper)
            merged[key] = members
        else:
            merged[Q] = members

    ranked = sorted(merged, key=lambda q: (-len(merged[q]), -_consistency(merged[q]), q))
    table = VoteTable(entries={q: len(merged[q]) for q in ranked}, members=merged)

    degenerate = len(ranked) < N
    chosen = [ranked[i % len(ranked)] for i in range(N)]
    if degenerate:
        logger.debug(f"Only {len(ranked)} distinct quotients for {N} numbers; padding with duplicates")

    estimates = []
    for q in chosen:
        members = sorted(merged[q], key=lambda m: m.Y_hat)
        ref = statistics.median_low([m.Y_hat for m in members])
        mu = _bucket_mean(members, gamma)
        value = ref + signed_offset(mu, mod_reduce(ref, gamma), gamma)
        estimates.append(mod_reduce(value, D) if D is not None else value)

    return VoteResult(
        estimates=np.asarray(estimates, dtype=float),
        quotients=chosen,
        table=table,
        degenerate=degenerate,
    )
