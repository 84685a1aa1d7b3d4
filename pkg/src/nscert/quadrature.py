"""Deterministic adaptive quadrature used across the package.

A hand-rolled adaptive Simpson rule is preferred over library quadrature
wherever a result feeds a certificate: the recursion is deterministic,
depends on nothing but the integrand values, and its accuracy target is
explicit at the call site.
"""

from __future__ import annotations

import math
from typing import Callable


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute/relative tolerance ``tol``."""
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    scale = max(1.0, abs(left + right))
    if depth <= 0 or abs(delta) <= 15.0 * tol * scale:
        return left + right + delta / 15.0
    half = 0.5 * tol
    return _simpson_rec(f, a, m, fa, flm, fm, left, half, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, half, depth - 1
    )


def integrate_sqrt_kernel(
    g: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
) -> float:
    """Integrate ``g(x)`` on ``[a, b]`` when ``g(x) ~ c/sqrt(x)`` near 0.

    Substitutes ``x = r**2`` so the integrand ``2 r g(r**2)`` is bounded,
    which removes the inverse-square-root singularity exactly.
    """
    if b <= a:
        return 0.0
    ra, rb = math.sqrt(a), math.sqrt(b)
    # skip an O(1e-12) head so g is never evaluated at the singular point;
    # the omitted mass is ~ 2 c r0 for g ~ c/sqrt(x), far below tol
    r0 = 1e-12 * max(1.0, rb)
    return adaptive_simpson(lambda r: 2.0 * r * g(r * r), max(ra, r0), rb, tol=tol)
