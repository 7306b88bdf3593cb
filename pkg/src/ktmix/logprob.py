"""Log-domain (base 2) probability arithmetic.

Probabilities are carried as plain floats holding log2(p) <= 0, with -inf
standing for probability zero.  Products are sums, mixtures go through
:func:`log2_sum`; linear values are only materialized for conditionals.
"""

from __future__ import annotations

import math

import numpy as np

LOG2_ZERO = float("-inf")


def exp2(x: float) -> float:
    return 2.0 ** x


def log2_add(a: float, b: float) -> float:
    """log2(2**a + 2**b) without leaving the log domain."""
    if a == LOG2_ZERO:
        return b
    if b == LOG2_ZERO:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log2(1.0 + 2.0 ** (lo - hi))


def log2_sum(terms) -> float:
    """log2 of the sum of 2**t over ``terms`` (array-like)."""
    arr = np.asarray(terms, dtype=float)
    if arr.size == 0:
        return LOG2_ZERO
    hi = arr.max()
    if hi == LOG2_ZERO:
        return LOG2_ZERO
    return float(hi + np.log2(np.exp2(arr - hi).sum()))
