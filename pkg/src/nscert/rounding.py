"""Directed rounding at a given number of significant digits.

Certified quantities are always rounded in the safe direction: constants
that multiply error terms are rounded up, admissibility thresholds on data
are rounded down.  Plain nearest-rounding could silently invalidate a
certificate.  Decimal arithmetic keeps the operation exact; float log/pow
round trips can land one ulp on the wrong side.
"""

from __future__ import annotations

import math
from decimal import ROUND_DOWN, ROUND_UP, Decimal


def _snap(x: float, digits: int, rounding) -> float:
    if x == 0.0 or not math.isfinite(x):
        return x
    if digits < 1:
        raise ValueError("need at least one significant digit")
    d = Decimal(repr(x))
    quantum = Decimal(1).scaleb(d.adjusted() - digits + 1)
    return float(d.quantize(quantum, rounding=rounding))


def ceil_sig(x: float, digits: int) -> float:
    """Round |x| up (away from zero) at ``digits`` significant digits."""
    return _snap(x, digits, ROUND_UP)


def floor_sig(x: float, digits: int) -> float:
    """Round |x| down (toward zero) at ``digits`` significant digits."""
    return _snap(x, digits, ROUND_DOWN)
