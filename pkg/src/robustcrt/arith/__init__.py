"""
Modular arithmetic for robust CRT.

Example:
    >>> from robustcrt.arith import ResidueVector, crt_solve, ec_decode
    >>> crt_solve(ResidueVector((1, 5), (23, 29)))
    208
    >>> tuple(ec_decode(ResidueVector((2, 3, 1, 9), (3, 5, 7, 11)), L0=2))
    (8, 3)
"""

from .decode import ECDecode, consistency_of, correction_capacity, ec_decode
from .modular import (CircularValue, ResidueVector, circ_dist, crt_solve,
                      ensure_coprime, mod_reduce, mod_reduce_array,
                      signed_offset)

__all__ = [
    # Circle
    "CircularValue",
    "mod_reduce",
    "mod_reduce_array",
    "circ_dist",
    "signed_offset",
    # Integer CRT
    "ResidueVector",
    "crt_solve",
    "ensure_coprime",
    # Error correction
    "ECDecode",
    "ec_decode",
    "consistency_of",
    "correction_capacity",
]
