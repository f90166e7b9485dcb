"""
From one clustered residue row to a number estimate.

Given an estimate mu_hat of the common residue, each residue R_l yields a
quotient digit q_l = round((R_l - mu_lift) / gamma) mod M_l. The digits are
combined by CRT (optionally error-corrected) into a quotient Q, and the
estimate is Y_hat = Q * gamma + mu_hat reduced into [0, D).

Example:
    >>> from robustcrt.model import ModuliSet
    >>> ms = ModuliSet(gamma=100.0, M=(3, 5), D=1500.0)
    >>> rec = single_rcrt([157.0, 257.0], ms)
    >>> rec.Q, rec.Y_hat
    (7, 757.0)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algo2 import circular_weighted_mean
from .arith import ResidueVector, crt_solve, ec_decode, mod_reduce, mod_reduce_array
from .model import ModuliSet

logger = logging.getLogger(__name__)

# Noise can carry a number just past either end of [0, D): quotient -1 or quotient_range
EC_QUOTIENT_MARGIN = 1


@dataclass(frozen=True)
class Reconstruction:
    """
    One reconstructed number.

    Y_hat = Q * gamma + mu_hat (mod D), with mu_hat in [0, gamma) and Q in
    [0, quotient_range).
    """

    mu_hat: float
    q: ResidueVector
    Q: int
    Y_hat: float
    ec_used: bool = False
    ec_consistency: Optional[int] = None
    ec_valid: Optional[bool] = None

    @property
    def reliable(self) -> bool:
        return self.ec_valid is not False


def lift_common_residue(r_row: Sequence[float], mu_hat: float, gamma: float, weights: Sequence[float]) -> float:
    """
    Representative of mu_hat in (mu_hat - gamma, mu_hat] on the same side of the
    wrap as most of the residues (by weight).
    """
    r = np.asarray(r_row, dtype=float)
    w = np.asarray(weights, dtype=float)
    across = float(w[r < mu_hat - gamma / 2.0].sum())
    return mu_hat - gamma if across > w.sum() / 2.0 else mu_hat


def quotient_digits(
    R_row: Sequence[float],
    mu_hat: float,
    ms: ModuliSet,
    mu_lift: Optional[float] = None,
) -> ResidueVector:
    """
    Quotient digits q_l = round((R_l - mu_lift) / gamma) mod M_l.

    Args:
        R_row: One residue per sampler, already clustered to one number.
        mu_hat: Common residue estimate in [0, gamma).
        ms: Moduli set.
        mu_lift: Representative of mu_hat to subtract; computed from the
            residues when omitted.
    """
    R = np.asarray(R_row, dtype=float)
    if R.shape != (ms.L,):
        raise ValueError(f"Expected {ms.L} residues, got shape {R.shape}")
    if mu_lift is None:
        mu_lift = lift_common_residue(mod_reduce_array(R, ms.gamma), mu_hat, ms.gamma, ms.weights)
    raw = np.rint((R - mu_lift) / ms.gamma).astype(np.int64)
    return ResidueVector(tuple(int(v) % m for v, m in zip(raw, ms.M)), ms.M)


def reconstruct_number(
    q: ResidueVector,
    mu_hat: float,
    ms: ModuliSet,
    ec: bool = False,
    mu_lift: Optional[float] = None,
) -> Reconstruction:
    """
    Combine quotient digits and a common residue into a number estimate.

    The CRT quotient is read as signed: solutions in the upper part of the
    decode range beyond D are treated as small negative quotients, so a
    number just above 0 whose noise pushed it below 0 lands just below D.

    Args:
        q: Digits over ms.M.
        mu_hat: Common residue estimate in [0, gamma).
        ms: Moduli set.
        ec: Decode with residue error correction (L0 from ms).
        mu_lift: The representative of mu_hat the digits were computed against.
            Defaults to mu_hat.
    """
    gamma = ms.gamma
    if mu_lift is None:
        mu_lift = mu_hat
    wraps = int(round((mu_hat - mu_lift) / gamma))

    consistency: Optional[int] = None
    valid: Optional[bool] = None
    if ec:
        decoded = ec_decode(q, ms.L0, margin=EC_QUOTIENT_MARGIN)
        raw_q = decoded.Q
        consistency, valid = decoded.consistency, decoded.valid
        span = 1
        for m in sorted(ms.M)[: ms.L0]:
            span *= m
        if not decoded.valid:
            logger.debug(f"Unreliable quotient {raw_q} for mu_hat={mu_hat:.6g}")
    else:
        raw_q = crt_solve(q)
        span = ms.product

    signed_q = raw_q
    if raw_q * gamma + mu_lift > (ms.D + span * gamma) / 2.0:
        signed_q -= span
    folded = signed_q - wraps
    Q = folded % ms.quotient_range
    Y_hat = mod_reduce(folded * gamma + mu_hat, ms.D)
    return Reconstruction(
        mu_hat=float(mu_hat),
        q=q,
        Q=int(Q),
        Y_hat=Y_hat,
        ec_used=ec,
        ec_consistency=consistency,
        ec_valid=valid,
    )


def single_rcrt(R_row: Sequence[float], ms: ModuliSet, ec: bool = False) -> Reconstruction:
    """
    Robust CRT for one clustered residue row.

    Without error correction the common residue is the weighted circular mean
    of all residues. With error correction, the circular mean and every single
    residue are tried as anchors; the anchor whose digits decode most
    consistently wins, and the common residue is re-estimated from the
    residues that agree with the decoded quotient only.
    """
    R = np.asarray(R_row, dtype=float)
    r = mod_reduce_array(R, ms.gamma)
    w = ms.weights
    mu_hat = circular_weighted_mean(r, w, ms.gamma)

    if not ec:
        lift = lift_common_residue(r, mu_hat, ms.gamma, w)
        q = quotient_digits(R, mu_hat, ms, mu_lift=lift)
        return reconstruct_number(q, mu_hat, ms, ec=False, mu_lift=lift)

    best_mask: Optional[np.ndarray] = None
    best_consistency = -1
    for anchor in [mu_hat, *r.tolist()]:
        lift = lift_common_residue(r, anchor, ms.gamma, w)
        q = quotient_digits(R, anchor, ms, mu_lift=lift)
        decoded = ec_decode(q, ms.L0, margin=EC_QUOTIENT_MARGIN)
        if decoded.consistency > best_consistency:
            best_consistency = decoded.consistency
            best_mask = np.array([decoded.Q % m == d for d, m in zip(q.digits, q.moduli)])
            if best_consistency == ms.L:
                break

    assert best_mask is not None
    refined = circular_weighted_mean(r[best_mask], w[best_mask], ms.gamma)
    lift = lift_common_residue(r[best_mask], refined, ms.gamma, w[best_mask])
    q = quotient_digits(R, refined, ms, mu_lift=lift)
    return reconstruct_number(q, refined, ms, ec=True, mu_lift=lift)
