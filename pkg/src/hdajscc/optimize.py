"""Scalar minimization by golden-section search."""

from __future__ import annotations

import math
from typing import Callable

__all__ = ["golden_section_minimize"]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(f: Callable[[float], float], lo: float, hi: float,
                            tol: float = 1e-10, max_iter: int = 500) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on ``[lo, hi]``.

    Returns
    -------
    x, fx : float
        Location and value of the minimum.  The endpoints are also compared,
        so a minimum on the boundary is found exactly.
    """
    if not hi > lo:
        raise ValueError(f"need hi > lo, got [{lo}, {hi}]")
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    candidates = [(f(x), x), (f(lo), float(lo)), (f(hi), float(hi))]
    fx, x = min(candidates)
    return x, fx
