"""Closed-form design of the HDA coding schemes.

Each ``*_design`` function returns the coefficients of one scheme for a
:class:`~hdajscc.core.SchemeParams`.  Embedding gains follow the rule

    kappa^2 = P_layer^2 / ((P_layer + noise) * var(target)) - eps / var(target)

applied to whichever layer/target pair the scheme encodes.  Rates are in bits.
Estimator gains are reported in the ``eps -> 0`` form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import SchemeParams
from .errors import InfeasibleDesignError, InvalidParameterError

__all__ = [
    "CostaDesign",
    "WzDesign",
    "GenHdaDesign",
    "SuperpositionCostaDesign",
    "SuperimposedWzDesign",
    "ModifiedDesign",
    "matched_optimum",
    "hda_costa_design",
    "combined_design",
    "hda_wz_design",
    "gen_hda_design",
    "superposition_costa_design",
    "superimposed_wz_design",
    "modified_exponent_design",
    "default_design",
]

# Rounding tolerance for rate arguments at the capacity endpoint.
RATE_TOL = 1e-12


def _half_log2(x: float) -> float:
    return 0.5 * math.log2(x)


def matched_optimum(P: float, noise: float, src_var: float) -> float:
    """Optimal MSE ``src_var / (1 + P/noise)`` for a matched AWGN channel."""
    if P < 0 or noise <= 0 or src_var < 0:
        raise InvalidParameterError("need P >= 0, noise > 0, src_var >= 0")
    return src_var / (1.0 + P / noise)


@dataclass(frozen=True)
class CostaDesign:
    alpha: float
    kappa: float
    rate_lower: float
    rate_upper: float
    estimator_gain: float

    @property
    def rate_window(self) -> float:
        return self.rate_upper - self.rate_lower


@dataclass(frozen=True)
class WzDesign:
    kappa: float
    alpha: float
    rate_lower: float
    rate_upper: float
    estimator_offset_gain: float

    @property
    def rate_window(self) -> float:
        return self.rate_upper - self.rate_lower


@dataclass(frozen=True)
class GenHdaDesign:
    alpha: float
    kappa1: float
    digital_rate: float
    rate_margin: float


@dataclass(frozen=True)
class SuperpositionCostaDesign:
    """Digital Costa stream of power ``power_c`` plus an HDA Costa stream on the quantization error."""

    rate: float
    power_c: float
    power_hc: float
    alpha_c: float
    alpha_hc: float
    kappa: float
    distortion: float


@dataclass(frozen=True)
class SuperimposedWzDesign:
    """Digital Wyner-Ziv stream of power ``power_wz`` plus an HDA Wyner-Ziv stream."""

    rate: float
    power_wz: float
    power_hwz: float
    alpha: float
    kappa1: float
    distortion: float


@dataclass(frozen=True)
class ModifiedDesign:
    """``alpha = 1`` variant whose embedding gain ``kappa_e`` keeps exponent 1 under interference."""

    kappa_e_sq: float
    feasible: bool

    @property
    def kappa_e(self) -> float | None:
        return math.sqrt(self.kappa_e_sq) if self.feasible else None


def _embedding_gain(layer_power: float, noise: float, target_var: float, eps: float) -> float:
    if target_var <= 0:
        raise InfeasibleDesignError("embedded variable has zero variance")
    k2 = layer_power**2 / ((layer_power + noise) * target_var) - eps / target_var
    if k2 < 0:
        raise InfeasibleDesignError(f"kappa^2 = {k2:.6g} < 0 (epsilon too large)")
    return math.sqrt(k2)


def _check_eps(params: SchemeParams) -> None:
    if params.epsilon >= params.power_P:
        raise InfeasibleDesignError(
            f"epsilon = {params.epsilon} must be below P = {params.power_P}"
        )


def hda_costa_design(params: SchemeParams) -> CostaDesign:
    """HDA Costa coding, ``U = X + alpha S + kappa V``."""
    _check_eps(params)
    P, Q, s2, sv2 = params.power_P, params.interference_Q, params.design_noise, params.source_var
    alpha = P / (P + s2)
    kappa = _embedding_gain(P, s2, sv2, params.epsilon)
    var_u = P + alpha**2 * Q + kappa**2 * sv2
    return CostaDesign(
        alpha=alpha,
        kappa=kappa,
        rate_lower=_half_log2(var_u / P),
        rate_upper=_half_log2(var_u / (P - params.epsilon)),
        estimator_gain=kappa * sv2 / P,
    )


def combined_design(params: SchemeParams) -> CostaDesign:
    """Interference at the transmitter and side information at the receiver.

    Same auxiliary variable as HDA Costa, but ``kappa`` is sized for the
    innovation ``Z``.  The decodability window is ``(I(U;S,V), I(U;Y,V'))``
    and the estimator is ``v' + estimator_gain * (u - kappa v' - alpha y)``.
    """
    _check_eps(params)
    P, Q, s2 = params.power_P, params.interference_Q, params.design_noise
    sv2, sz2 = params.source_var, params.innovation_var
    alpha = P / (P + s2)
    kappa = _embedding_gain(P, s2, sz2, params.epsilon)
    var_u = P + alpha**2 * Q + kappa**2 * sv2
    return CostaDesign(
        alpha=alpha,
        kappa=kappa,
        rate_lower=_half_log2(var_u / P),
        rate_upper=_half_log2(var_u / (P - params.epsilon)),
        estimator_gain=kappa * sz2 / P,
    )


def hda_wz_design(params: SchemeParams) -> WzDesign:
    """HDA Wyner-Ziv coding, ``U = X + kappa V`` with side information ``V'`` at the decoder.

    The digital (separation) counterpart uses ``U = sqrt(alpha) V + B`` with
    ``B ~ N(0, D)``; only its distortion enters the mismatch comparisons.
    """
    _check_eps(params)
    P, s2 = params.power_P, params.design_noise
    sv2, sz2 = params.source_var, params.innovation_var
    if sz2 <= 0:
        raise InfeasibleDesignError("innovation_var must be > 0 for HDA Wyner-Ziv")
    alpha = P / (P + s2)
    kappa = _embedding_gain(P, s2, sz2, params.epsilon)
    residual = kappa**2 * sz2 + (1 - alpha) ** 2 * P + alpha**2 * s2
    var_u = P + kappa**2 * sv2
    return WzDesign(
        kappa=kappa,
        alpha=alpha,
        rate_lower=_half_log2(var_u / P),
        rate_upper=_half_log2(var_u / residual),
        estimator_offset_gain=kappa * sz2 / P,
    )


def _check_rate(R: float, C: float, *, strict: bool) -> None:
    if R < 0:
        raise InvalidParameterError(f"rate must be >= 0, got {R}")
    if (strict and R >= C * (1 - RATE_TOL)) or R > C * (1 + RATE_TOL):
        op = ">=" if strict else ">"
        raise InfeasibleDesignError(f"rate {R:.6g} {op} capacity {C:.6g} bits")


def gen_hda_design(params: SchemeParams, R: float) -> GenHdaDesign:
    """Generalized hybrid Costa coding with a digital layer of rate ``R``.

    ``R = 0`` gives HDA Costa, ``R = C`` gives digital Costa (``kappa1 = 0``).
    """
    P, s2, sv2, eps = params.power_P, params.design_noise, params.source_var, params.epsilon
    C = params.capacity_bits
    _check_rate(R, C, strict=False)
    R = min(R, C)
    alpha = P / (P + s2)
    head = (P + s2) - s2 * 2.0 ** (2.0 * R)
    if abs(head) < RATE_TOL * (P + s2):
        head = 0.0
    k1_sq = alpha * head / sv2 - eps * head / (P * sv2)
    if k1_sq < 0:
        raise InfeasibleDesignError(f"kappa1^2 = {k1_sq:.6g} < 0")
    se2 = sv2 * 2.0 ** (-2.0 * R)
    residual = k1_sq * se2 + (1 - alpha) ** 2 * P + alpha**2 * s2
    margin = _half_log2(P / residual) - R
    if -1e-12 < margin < 0:
        margin = 0.0
    return GenHdaDesign(alpha=alpha, kappa1=math.sqrt(k1_sq), digital_rate=R, rate_margin=margin)


def superposition_costa_design(params: SchemeParams, R: float) -> SuperpositionCostaDesign:
    P, s2, sv2 = params.power_P, params.design_noise, params.source_var
    _check_rate(R, params.capacity_bits, strict=True)
    p_c = (P + s2) * (1.0 - 2.0 ** (-2.0 * R))
    p_hc = (P + s2) * 2.0 ** (-2.0 * R) - s2
    if p_hc <= 0:
        raise InfeasibleDesignError("HDA stream power is not positive")
    p_c = P - p_hc
    se2 = sv2 * 2.0 ** (-2.0 * R)
    kappa = _embedding_gain(p_hc, s2, se2, params.epsilon)
    return SuperpositionCostaDesign(
        rate=R,
        power_c=p_c,
        power_hc=p_hc,
        alpha_c=p_c / (p_c + p_hc + s2),
        alpha_hc=p_hc / (p_hc + s2),
        kappa=kappa,
        distortion=se2 / (1.0 + p_hc / s2),
    )


def superimposed_wz_design(params: SchemeParams, R: float) -> SuperimposedWzDesign:
    P, s2, sz2 = params.power_P, params.design_noise, params.innovation_var
    _check_rate(R, params.capacity_bits, strict=True)
    p_hwz = (P + s2) * 2.0 ** (-2.0 * R) - s2
    if p_hwz <= 0:
        raise InfeasibleDesignError("HDA Wyner-Ziv stream power is not positive")
    se2 = sz2 * 2.0 ** (-2.0 * R)
    kappa1 = _embedding_gain(p_hwz, s2, se2, params.epsilon)
    return SuperimposedWzDesign(
        rate=R,
        power_wz=P - p_hwz,
        power_hwz=p_hwz,
        alpha=p_hwz / (p_hwz + s2),
        kappa1=kappa1,
        distortion=se2 * s2 / (p_hwz + s2),
    )


def modified_exponent_design(P: float, Q: float, noise: float, innovation_var: float) -> ModifiedDesign:
    """Largest ``kappa_e^2`` keeping ``I(U;Y,V') > I(U;S,V)`` for ``U = X + S + kappa_e V``.

    Infeasible (``feasible=False``) when ``P(P+Q) <= Q·noise``.
    """
    if innovation_var <= 0:
        raise InvalidParameterError("innovation_var must be > 0")
    num = P * P + P * Q - Q * noise
    k2 = num / ((P + Q + noise) * innovation_var)
    return ModifiedDesign(kappa_e_sq=k2, feasible=num > 0)


def default_design(scheme_id: str, params: SchemeParams, rate: float | None = None):
    """Design object for ``scheme_id``; layered schemes need ``rate`` in bits."""
    if scheme_id == "hda-costa":
        return hda_costa_design(params)
    if scheme_id == "combined":
        return combined_design(params)
    if scheme_id == "hda-wz":
        return hda_wz_design(params)
    if scheme_id == "modified":
        d = modified_exponent_design(params.power_P, params.interference_Q,
                                     params.design_noise, params.innovation_var)
        if not d.feasible:
            raise InfeasibleDesignError("modified scheme infeasible: P(P+Q) <= Q sigma^2")
        return d
    if scheme_id == "naive":
        return None
    if rate is None:
        raise InvalidParameterError(f"scheme {scheme_id!r} needs a digital rate")
    if scheme_id == "gen-hda":
        return gen_hda_design(params, rate)
    if scheme_id == "superposition-costa":
        return superposition_costa_design(params, rate)
    if scheme_id == "superimposed-wz":
        return superimposed_wz_design(params, rate)
    raise InvalidParameterError(f"unknown scheme {scheme_id!r}")
