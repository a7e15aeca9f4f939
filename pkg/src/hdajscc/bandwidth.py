"""Bandwidth compression and the two-user broadcast scheme.

A unit-variance source of ``K`` samples is sent over ``N = lambda K``
channel uses at unit power.  The first ``N`` samples go out uncoded with
power ``a``; the remaining ``K - N`` samples are quantized and carried
digitally in the leftover power, either superimposed on the analog part or
Costa-coded against it.

The broadcast scheme adds a third layer: an HDA layer of power ``b`` aimed
at the weak user and a digital Wyner-Ziv layer of power ``c = 1 - a - b``
that only the strong user decodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import broadcast_grid
from .core import CovariancePair, lmmse_solve
from .errors import InvalidParameterError, UnsupportedConfigurationError

__all__ = [
    "BcAllocation",
    "BroadcastPowers",
    "RegionPoint",
    "BC_MODES",
    "MISMATCH_MODES",
    "superposition_objective",
    "costa_objective",
    "bc_optimal_power",
    "bc_mismatch_distortion",
    "broadcast_point",
    "broadcast_region",
]

BC_MODES = ("superposition", "costa")
MISMATCH_MODES = ("superposition", "digital-costa", "hda-costa")


@dataclass(frozen=True)
class BcAllocation:
    a_star: float
    d_star: float
    mode: str


@dataclass(frozen=True)
class BroadcastPowers:
    a: float
    b: float
    c: float
    alpha1: float
    alpha2: float
    kappa_c: float


@dataclass(frozen=True)
class RegionPoint:
    d1: float
    d2: float
    powers: BroadcastPowers


def _check_lambda(lam: float) -> None:
    if not 0 < lam <= 1:
        raise InvalidParameterError(f"bandwidth ratio must be in (0, 1], got {lam}")


def _digital_term(snr: float, lam: float) -> float:
    """MSE of the digitally sent fraction, ``(1 - lam)(1 + snr)^(-lam/(1-lam))``."""
    if lam == 1:
        return 0.0
    return (1.0 - lam) * (1.0 + snr) ** (-lam / (1.0 - lam))


def superposition_objective(a: float, noise: float, lam: float) -> float:
    """Matched distortion when the digital stream is superimposed on the analog one."""
    return lam / (1.0 + a / noise) + _digital_term((1.0 - a) / (a + noise), lam)


def costa_objective(a: float, noise: float, lam: float) -> float:
    """Matched distortion when the digital stream is Costa-coded against the analog one."""
    return lam / (1.0 + a / (1.0 - a + noise)) + _digital_term((1.0 - a) / noise, lam)


def bc_optimal_power(noise: float, lam: float, mode: str) -> BcAllocation:
    """Closed-form analog power fraction and the resulting distortion ``(1 + 1/noise)^(-lam)``."""
    _check_lambda(lam)
    if noise <= 0:
        raise InvalidParameterError("noise must be > 0")
    growth = (1.0 + 1.0 / noise) ** lam
    if mode == "superposition":
        a = noise * (growth - 1.0)
    elif mode == "costa":
        a = (1.0 + noise) * (1.0 - 1.0 / growth)
    else:
        raise InvalidParameterError(f"mode must be one of {BC_MODES}, got {mode!r}")
    return BcAllocation(a_star=a, d_star=1.0 / growth, mode=mode)


def _costa_analog_mmse(a, noise, actual_noise, kappa_sq):
    """Observation covariance of ``(y, u)`` for the Costa-coded analog stream, and its weights."""
    alpha = (1.0 - a) / (1.0 - a + noise)
    cross = 1.0 - a + alpha * a
    lam_mat = np.array([[1.0 + actual_noise, cross],
                        [cross, 1.0 - a + alpha * alpha * a + kappa_sq]])
    sa = np.sqrt(a)
    return lam_mat, np.array([sa, alpha * sa])


def bc_mismatch_distortion(mode: str, noise: float, actual_noise: float, lam: float,
                           a: float | None = None) -> float:
    """Distortion of a bandwidth-compression scheme designed for ``noise`` and run at ``actual_noise``.

    Parameters
    ----------
    mode : {'superposition', 'digital-costa', 'hda-costa'}
        ``hda-costa`` replaces the digital Costa stream by an HDA one and is
        only defined for ``lam = 0.5``.
    a : float, optional
        Analog power fraction; defaults to the matched optimum of the mode
        (the Costa optimum for both Costa modes).

    When ``actual_noise > noise`` the digital part is lost and contributes its
    full variance; the analog part then sees the digital signal as noise.
    """
    _check_lambda(lam)
    if mode not in MISMATCH_MODES:
        raise InvalidParameterError(f"mode must be one of {MISMATCH_MODES}, got {mode!r}")
    if mode == "hda-costa" and lam != 0.5:
        raise UnsupportedConfigurationError("hda-costa bandwidth compression is defined for lambda = 0.5 only")
    if noise <= 0 or actual_noise <= 0:
        raise InvalidParameterError("noise variances must be > 0")
    if a is None:
        a = bc_optimal_power(noise, lam, "superposition" if mode == "superposition" else "costa").a_star
    if not 0 <= a <= 1:
        raise InvalidParameterError(f"a must be in [0, 1], got {a}")

    if actual_noise > noise:
        return lam / (1.0 + a / (1.0 - a + actual_noise)) + (1.0 - lam)
    if mode == "superposition":
        return lam / (1.0 + a / actual_noise) + _digital_term((1.0 - a) / (a + noise), lam)

    kappa_sq = (1.0 - a) ** 2 / (1.0 - a + noise) if mode == "hda-costa" else 0.0
    lam_mat, gamma = _costa_analog_mmse(a, noise, actual_noise, kappa_sq)
    analog = lmmse_solve(CovariancePair(lam_mat, gamma), 1.0).mmse
    if mode == "digital-costa":
        return lam * analog + _digital_term((1.0 - a) / noise, lam)
    embedded = lmmse_solve(CovariancePair(lam_mat, [0.0, np.sqrt(kappa_sq)]), 1.0).mmse
    return lam * analog + (1.0 - lam) * embedded


def _powers(a: float, b: float, noise_weak: float, noise_strong: float) -> BroadcastPowers:
    c = max(1.0 - a - b, 0.0)
    return BroadcastPowers(
        a=a, b=b, c=c,
        alpha1=b / (b + c + noise_weak),
        alpha2=c / (c + noise_strong),
        kappa_c=float(np.sqrt(b * b / (b + c + noise_weak))),
    )


def broadcast_point(a: float, b: float, noise_weak: float, noise_strong: float) -> RegionPoint:
    """Weak- and strong-user distortions (bandwidth ratio 1/2) for layer powers ``a``, ``b``.

    The digital Wyner-Ziv layer has rate ``0.5 log2(1 + c / noise_strong)`` and
    refines the strong user's estimate of the second half by ``1/(1 + c/noise_strong)``.
    """
    if a < 0 or b < 0 or a + b > 1 + 1e-12:
        raise InvalidParameterError(f"need a, b >= 0 and a + b <= 1, got a={a}, b={b}")
    if noise_weak <= 0 or noise_strong <= 0:
        raise InvalidParameterError("noise variances must be > 0")
    pw = _powers(a, b, noise_weak, noise_strong)
    c = pw.c
    d1 = 0.5 / (1.0 + a / (b + c + noise_weak)) + 0.5 / (1.0 + b / (c + noise_weak))
    k2 = pw.kappa_c**2
    cross = b + pw.alpha1 * a
    lam_mat = np.array([[1.0 + noise_strong, cross],
                        [cross, b + pw.alpha1**2 * a + k2]])
    sa = np.sqrt(a)
    first = lmmse_solve(CovariancePair(lam_mat, [sa, pw.alpha1 * sa]), 1.0).mmse
    second = lmmse_solve(CovariancePair(lam_mat, [0.0, pw.kappa_c]), 1.0).mmse
    d2 = 0.5 * first + 0.5 * second / (1.0 + c / noise_strong)
    return RegionPoint(d1=float(d1), d2=float(d2), powers=pw)


def _simplex_grid(grid_n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.meshgrid(np.arange(grid_n), np.arange(grid_n), indexing="ij")
    keep = (i + j) <= grid_n - 1
    step = 1.0 / (grid_n - 1)
    return i[keep] * step, j[keep] * step


def broadcast_region(noise_weak: float, noise_strong: float, grid_n: int,
                     backend: str | None = None) -> list[RegionPoint]:
    """Pareto frontier of ``(d1, d2)`` over the simplex grid ``a, b in {0, 1/(n-1), ...}``.

    Returned points are sorted by ``d1`` ascending with ``d2`` strictly decreasing.
    """
    if grid_n < 2:
        raise InvalidParameterError("grid_n must be >= 2")
    if not noise_weak > noise_strong > 0:
        raise InvalidParameterError("user 1 must be the weak user (noise_weak > noise_strong > 0)")
    a, b = _simplex_grid(grid_n)
    d1, d2 = broadcast_grid(a, b, noise_weak, noise_strong, backend=backend)
    order = np.lexsort((d2, d1))
    frontier = []
    best_d2 = np.inf
    for k in order:
        if d2[k] < best_d2:
            best_d2 = d2[k]
            frontier.append(k)
    return [RegionPoint(d1=float(d1[k]), d2=float(d2[k]),
                        powers=_powers(float(a[k]), float(b[k]), noise_weak, noise_strong))
            for k in frontier]
