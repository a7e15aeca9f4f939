"""Distortion under SNR mismatch and distortion exponents.

All schemes are designed for noise ``sigma2`` and operated at ``sigma_a2``;
the receiver forms the LMMSE estimate for the noise it actually sees.
Formulas are the ``eps -> 0`` limits and accept numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .designs import RATE_TOL, matched_optimum
from .errors import InfeasibleDesignError, InvalidParameterError

__all__ = [
    "MismatchReport",
    "WzBounds",
    "mismatch_source_distortion",
    "mismatch_interference_distortion",
    "gen_hda_mismatch",
    "wz_mismatch_bounds",
    "naive_analog_distortion",
    "modified_mismatch_distortion",
    "digital_costa_distortion",
    "digital_wz_distortion",
    "exponent_estimate",
    "EXPONENT_GRID_POINTS",
]

EXPONENT_GRID_POINTS = 20


@dataclass(frozen=True)
class MismatchReport:
    d_source: float
    d_interference: float | None = None


@dataclass(frozen=True)
class WzBounds:
    d_hda: float
    d_lower: float
    d_separation: float
    gap_db: float
    decode_warning: bool


def _mismatch_denominator(P, Q, s2, sa2):
    return (P * P * (P + Q) + P * (P + Q) * s2 + Q * s2 * s2
            + (P * (2 * P + Q) + 3 * P * s2 + s2 * s2) * sa2)


def mismatch_source_distortion(P, Q, sigma2, sigma_a2, sigma_z2):
    """Source MSE of the combined interference/side-information scheme.

    With ``sigma_z2 = sigma_v2`` this is HDA Costa; with ``Q = 0`` it is HDA
    Wyner-Ziv.
    """
    s2, sa2 = sigma2, sigma_a2
    num = (Q * s2 * s2 + (P * (P + Q) + 2 * P * s2 + s2 * s2) * sa2) * sigma_z2
    return num / _mismatch_denominator(P, Q, s2, sa2)


def mismatch_interference_distortion(P, Q, sigma2, sigma_a2):
    """MSE of the interference estimate from ``(U, Y)`` for HDA Costa."""
    num = Q * (P + sigma2) * (P * P + (2 * P + sigma2) * sigma_a2)
    return num / _mismatch_denominator(P, Q, sigma2, sigma_a2)


def gen_hda_mismatch(P, Q, sigma2, sigma_a2, sigma_v2, R) -> MismatchReport:
    """Source and interference MSE of generalized HDA with digital rate ``R`` (bits)."""
    C = 0.5 * math.log2(1.0 + P / sigma2)
    if R < 0:
        raise InvalidParameterError(f"rate must be >= 0, got {R}")
    if R > C * (1 + RATE_TOL):
        raise InfeasibleDesignError(f"rate {R:.6g} > capacity {C:.6g} bits")
    t = 2.0 ** (2.0 * min(R, C))
    s2, sa2 = sigma2, sigma_a2
    d_v = ((sa2 * (s2 + P) ** 2 + (s2 * s2 + sa2 * P) * Q) * sigma_v2
           / ((s2 + P) ** 2 * (sa2 + P + Q) - t * (s2 - sa2) * P * (s2 + P + Q)))
    d_s = ((s2 + P) * (t * (s2 - sa2) * P - (s2 + P) * (sa2 + P)) * Q
           / (t * (s2 - sa2) * P * (s2 + P + Q) - (s2 + P) ** 2 * (sa2 + P + Q)))
    return MismatchReport(d_source=float(d_v), d_interference=float(d_s))


def wz_mismatch_bounds(P, sigma2, sigma_a2, sigma_z2) -> WzBounds:
    """HDA Wyner-Ziv distortion against the genie lower bound and separation.

    The HDA expression assumes the codeword is decoded, which is no longer
    guaranteed for ``sigma_a2 > sigma2``; such calls set ``decode_warning``.
    """
    s2, sa2 = sigma2, sigma_a2
    return WzBounds(
        d_hda=(P + s2) * sa2 * sigma_z2 / (P * P + (2 * P + s2) * sa2),
        d_lower=sigma_z2 / (1.0 + P / sa2),
        d_separation=sigma_z2 * s2 / (P + s2),
        gap_db=abs(10.0 * math.log10(P / (P + s2))),
        decode_warning=bool(sa2 > s2),
    )


def naive_analog_distortion(P, sigma2, sigma_z2):
    """Uncoded transmission with decoder side information, unit source variance.

    For a source of variance ``sv2`` pass ``P / sv2`` as the power.
    """
    return sigma_z2 / (1.0 + (P / sigma2) * sigma_z2)


def modified_mismatch_distortion(P, Q, sigma_z2, sigma_a2, kappa_e_sq):
    """Source MSE of the ``alpha = 1`` scheme with embedding gain ``kappa_e``."""
    pq = P + Q
    return pq * sigma_a2 * sigma_z2 / (pq * sigma_a2 + kappa_e_sq * (pq + sigma_a2) * sigma_z2)


def digital_costa_distortion(P, sigma2, sigma_a2, sigma_v2):
    """Threshold model for separation-based coding.

    The index decodes (and gives no gain) while ``sigma_a2 <= sigma2``;
    beyond that nothing is recovered.
    """
    return np.where(np.asarray(sigma_a2) <= sigma2, matched_optimum(P, sigma2, sigma_v2), sigma_v2)[()]


def digital_wz_distortion(P, sigma2, sigma_a2, sigma_z2):
    """Threshold model for digital Wyner-Ziv: side information only when undecodable."""
    return np.where(np.asarray(sigma_a2) <= sigma2, sigma_z2 * sigma2 / (P + sigma2), sigma_z2)[()]


def exponent_estimate(curve: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                      n: int = EXPONENT_GRID_POINTS) -> float:
    """Least-squares slope of ``log D`` against ``log sigma_a2`` on a geometric grid.

    Parameters
    ----------
    curve : callable
        Maps ``sigma_a2`` to distortion; array input is tried first.
    lo, hi : float
        Grid endpoints, ``0 < lo < hi``.
    n : int
        Number of grid points.
    """
    if not (0 < lo < hi):
        raise InvalidParameterError(f"need 0 < lo < hi, got {lo}, {hi}")
    grid = np.geomspace(lo, hi, n)
    try:
        d = np.asarray(curve(grid), dtype=float)
    except TypeError:
        d = None
    if d is None or d.shape != grid.shape:
        # Scalar-only curve: evaluate point by point.
        d = np.array([float(curve(float(x))) for x in grid])
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise InvalidParameterError("distortion must be positive and finite on the grid")
    slope, _ = np.polyfit(np.log(grid), np.log(d), 1)
    return float(slope)
