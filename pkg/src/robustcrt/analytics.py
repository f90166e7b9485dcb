"""
Closed-form probability calculators.

- bound_span_prob: chance that every error of every number lies in [-delta, delta).
- exact_span_prob: integral over the minimum error of each number.
- chernoff_success: lower bound on the majority-vote success of kappa
  independent groups that each succeed with probability p.

Example:
    >>> round(bound_span_prob(1.0, 1.0, 1, 2), 4)
    0.6827
    >>> round(chernoff_success(1.0, 8), 4)
    0.6321
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.stats import norm


def _check_sigma(sigma: float) -> None:
    if not math.isfinite(sigma) or sigma <= 0:
        raise ValueError(f"sigma must be a positive finite number, got {sigma!r}")


def bound_span_prob(sigma: float, delta: float, N: int, L: int) -> float:
    """(Phi(delta/sigma) - Phi(-delta/sigma)) ** (N * (L - 1))."""
    _check_sigma(sigma)
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta!r}")
    if N < 1 or L < 1:
        raise ValueError(f"N and L must be >= 1, got N={N}, L={L}")
    if math.isinf(delta):
        return 1.0
    inside = float(norm.cdf(delta / sigma) - norm.cdf(-delta / sigma))
    return float(inside ** (N * (L - 1)))


def exact_span_prob(
    sigma: float,
    delta: float,
    N: int,
    L: int,
    conditional: bool = False,
) -> float:
    """
    Probability that each number's L errors fit in a window of width 2 * delta.

    The default integrates the density of the minimum error times the
    probability that L - 1 independent errors land in [x, x + 2 * delta); this
    product form never exceeds bound_span_prob. With conditional=True the
    remaining errors are conditioned on lying above the minimum, which gives
    exactly Pr(max - min < 2 * delta) per number.

    Args:
        sigma: Noise standard deviation.
        delta: Half window width.
        N: Numbers (the per-number probability is raised to this power).
        L: Errors per number.
        conditional: See above.
    """
    _check_sigma(sigma)
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta!r}")
    if N < 1 or L < 1:
        raise ValueError(f"N and L must be >= 1, got N={N}, L={L}")
    if L == 1 or math.isinf(delta):
        return 1.0
    if delta == 0:
        return 0.0

    width = 2.0 * delta / sigma

    if conditional:
        def integrand(z: float) -> float:
            window = norm.cdf(z + width) - norm.cdf(z)
            return L * norm.pdf(z) * window ** (L - 1)
    else:
        def integrand(z: float) -> float:
            survival = norm.sf(z)
            window = norm.cdf(z + width) - norm.cdf(z)
            return L * norm.pdf(z) * survival ** (L - 1) * window ** (L - 1)

    # Integrate in units of sigma; the integrand is negligible beyond 12 sigma
    per_number, _ = integrate.quad(integrand, -12.0, 12.0, epsabs=1e-10, epsrel=1e-10, limit=200)
    per_number = float(np.clip(per_number, 0.0, 1.0))
    return per_number**N


def chernoff_success(p: float, kappa: int) -> float:
    """
    1 - exp(-kappa * (p - 1/2)^2 / (2p)).

    Raises:
        ValueError: If p is not in (1/2, 1] or kappa is negative.
    """
    if not 0.5 < p <= 1.0:
        raise ValueError(f"p must lie in (1/2, 1], got {p!r}")
    if kappa < 0:
        raise ValueError(f"kappa must be non-negative, got {kappa}")
    return 1.0 - math.exp(-kappa * (p - 0.5) ** 2 / (2.0 * p))
