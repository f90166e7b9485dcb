"""
Residue error-correcting decoding.

With L moduli of which any L0 already cover the quotient range, a residue
vector carries L - L0 redundant digits and tolerates up to
floor((L - L0) / 2) arbitrarily corrupted digits. Candidates are the CRT
solutions of every size-L0 subset of digits; each is scored by how many
digits it reproduces.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Set, Tuple

from .modular import ResidueVector, crt_solve, ensure_coprime

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ECDecode:
    """Outcome of an error-corrected decode."""

    Q: int
    consistency: int
    valid: bool
    capacity: int

    def __iter__(self):
        # Unpacks as (Q, consistency) like a plain pair
        yield self.Q
        yield self.consistency


def correction_capacity(L: int, L0: int) -> int:
    """Number of arbitrary digit errors a length-L code with L0 information digits corrects."""
    return max(0, (L - L0) // 2)


def consistency_of(Q: int, rv: ResidueVector) -> int:
    """How many digits of rv agree with Q."""
    return sum(1 for d, m in zip(rv.digits, rv.moduli) if Q % m == d)


def ec_decode(
    rv: ResidueVector, L0: int, q_range: Optional[int] = None, margin: int = 0
) -> ECDecode:
    """
    Decode a possibly corrupted residue vector.

    Args:
        rv: Digits and pairwise-coprime moduli.
        L0: Number of digits sufficient to reconstruct any quotient in range.
        q_range: Exclusive upper bound on admissible quotients. Defaults to the
            product of the L0 smallest moduli.
        margin: Also admit signed quotients in [-margin, 0) and
            [q_range, q_range + margin). A number within noise of either end
            of the dynamic range has quotient -1 or q_range.

    Returns:
        ECDecode with the most consistent candidate (ties go to a candidate
        inside [0, q_range), then to the smallest Q) and a validity flag that
        holds when the consistency reaches L - floor((L - L0) / 2).

    Raises:
        ValueError: If L0 is not in [1, L] or the moduli are not coprime.
    """
    L = len(rv)
    if L0 < 1 or L0 > L:
        raise ValueError(f"L0 must lie in [1, {L}], got {L0}")
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    ensure_coprime(rv.moduli)

    if q_range is None:
        q_range = 1
        for m in sorted(rv.moduli)[:L0]:
            q_range *= m

    best_q: Optional[int] = None
    best_key: Optional[Tuple[int, bool, int]] = None
    seen: Set[int] = set()
    for subset in combinations(range(L), L0):
        sub_rv = ResidueVector(
            tuple(rv.digits[i] for i in subset), tuple(rv.moduli[i] for i in subset)
        )
        solution = crt_solve(sub_rv)
        span = sub_rv.product
        for candidate in (solution - span, solution, solution + span):
            if not -margin <= candidate < q_range + margin or candidate in seen:
                continue
            seen.add(candidate)
            key = (-consistency_of(candidate, rv), not 0 <= candidate < q_range, candidate)
            if best_key is None or key < best_key:
                best_q, best_key = candidate, key

    best_consistency = -best_key[0] if best_key is not None else -1

    if best_q is None:
        # Every subset solution fell outside the range; fall back to the full CRT
        best_q = crt_solve(rv) % q_range
        best_consistency = consistency_of(best_q, rv)

    capacity = correction_capacity(L, L0)
    valid = best_consistency >= L - capacity
    if not valid:
        logger.debug(
            f"Unreliable decode: Q={best_q} matches {best_consistency}/{L} digits "
            f"(needs {L - capacity})"
        )
    return ECDecode(Q=best_q, consistency=best_consistency, valid=valid, capacity=capacity)
