"""
Modular and circular arithmetic primitives.

Everything here is a pure function of its inputs. Real-valued reductions use
fmod-based arithmetic; integer CRT uses exact Python integers so quotient
ranges far beyond float precision stay exact.

Example:
    >>> mod_reduce(757, 300)
    157.0
    >>> circ_dist(10, 95, 100)
    15.0
    >>> crt_solve(ResidueVector((2, 3), (3, 5)))
    8
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Tuple

import numpy as np


def _check_modulus(m: float, name: str = "modulus") -> None:
    if not math.isfinite(m) or m <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {m!r}")


def mod_reduce(x: float, m: float) -> float:
    """
    Reduce a real number onto [0, m).

    Args:
        x: Value to reduce.
        m: Positive modulus.

    Returns:
        The representative of x modulo m in [0, m).

    Raises:
        ValueError: If x is not finite or m is not positive.
    """
    if not math.isfinite(x):
        raise ValueError(f"Cannot reduce non-finite value {x!r}")
    _check_modulus(m)
    result = math.fmod(x, m)
    if result < 0:
        result += m
    # a tiny negative x rounds up to m itself
    if result >= m:
        result = 0.0
    return float(result)


def mod_reduce_array(x: np.ndarray, m: "float | np.ndarray") -> np.ndarray:
    """Elementwise mod_reduce; bit-identical to the scalar version."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("Cannot reduce non-finite values")
    m_arr = np.asarray(m, dtype=float)
    if np.any(m_arr <= 0) or not np.all(np.isfinite(m_arr)):
        raise ValueError(f"Moduli must be positive finite numbers, got {m!r}")
    result = np.fmod(x, m_arr)
    result = np.where(result < 0, result + m_arr, result)
    return np.where(result >= m_arr, 0.0, result)


def circ_dist(a: float, b: float, gamma: float) -> float:
    """
    Shortest distance between a and b on the circle of circumference gamma.

    Equals min over integers j of |a - b + j*gamma| and lies in [0, gamma/2].
    """
    _check_modulus(gamma, "gamma")
    d = mod_reduce(a - b, gamma)
    return float(min(d, gamma - d))


def signed_offset(a: float, b: float, gamma: float) -> float:
    """Directed displacement from b to a on the circle, in [-gamma/2, gamma/2)."""
    _check_modulus(gamma, "gamma")
    return mod_reduce(a - b + gamma / 2.0, gamma) - gamma / 2.0


@dataclass(frozen=True)
class CircularValue:
    """A point on the small circle modulo gamma."""

    value: float
    gamma: float

    def __post_init__(self) -> None:
        _check_modulus(self.gamma, "gamma")
        if not (0.0 <= self.value < self.gamma):
            raise ValueError(
                f"CircularValue must lie in [0, {self.gamma}), got {self.value!r}"
            )

    @classmethod
    def wrap(cls, x: float, gamma: float) -> "CircularValue":
        """Build a CircularValue from any real number."""
        return cls(mod_reduce(x, gamma), gamma)

    def dist(self, other: "CircularValue | float") -> float:
        other_value = other.value if isinstance(other, CircularValue) else other
        return circ_dist(self.value, other_value, self.gamma)

    def shifted(self, delta: float) -> "CircularValue":
        return CircularValue.wrap(self.value + delta, self.gamma)


@dataclass(frozen=True)
class ResidueVector:
    """Integer digits over pairwise-coprime integer moduli."""

    digits: Tuple[int, ...]
    moduli: Tuple[int, ...]

    def __post_init__(self) -> None:
        digits = tuple(int(d) for d in self.digits)
        moduli = tuple(int(m) for m in self.moduli)
        object.__setattr__(self, "digits", digits)
        object.__setattr__(self, "moduli", moduli)
        if len(digits) != len(moduli):
            raise ValueError(
                f"ResidueVector needs one digit per modulus, got {len(digits)} digits "
                f"for {len(moduli)} moduli"
            )
        for d, m in zip(digits, moduli):
            if m <= 0:
                raise ValueError(f"Moduli must be positive integers, got {m}")
            if not 0 <= d < m:
                raise ValueError(f"Digit {d} out of range for modulus {m}")

    @classmethod
    def of(cls, value: int, moduli: Sequence[int]) -> "ResidueVector":
        """Residues of an integer over the given moduli."""
        return cls(tuple(int(value) % int(m) for m in moduli), tuple(moduli))

    @property
    def product(self) -> int:
        return reduce(lambda acc, m: acc * m, self.moduli, 1)

    def __len__(self) -> int:
        return len(self.moduli)


def ensure_coprime(moduli: Sequence[int]) -> None:
    """Raise ValueError unless the moduli are pairwise coprime."""
    for a_idx in range(len(moduli)):
        for b_idx in range(a_idx + 1, len(moduli)):
            a, b = int(moduli[a_idx]), int(moduli[b_idx])
            if math.gcd(a, b) != 1:
                raise ValueError(f"Moduli {a} and {b} are not coprime")


def crt_solve(rv: ResidueVector) -> int:
    """
    Conventional CRT: the unique Q in [0, prod(moduli)) matching every digit.

    Raises:
        ValueError: If the moduli are not pairwise coprime.
    """
    ensure_coprime(rv.moduli)
    product = rv.product
    result = 0
    for digit, modulus in zip(rv.digits, rv.moduli):
        partial = product // modulus
        result += digit * partial * pow(partial, -1, modulus)
    return result % product
