"""Scenario parameters, jointly Gaussian scheme models and the LMMSE engine.

Every scheme in the package is a set of zero-mean jointly Gaussian variables
built as linear combinations of independent *primitive* variables (source
innovation, interference, channel input, noise, ...).  The covariance of the
derived variables (auxiliary codeword ``U``, channel output ``Y``, ...) then
follows exactly from the mixing coefficients, and any distortion the package
reports reduces to a linear MMSE solve over a sub-block of that covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ContractViolationError,
    InfeasibleDesignError,
    InvalidCovarianceError,
    InvalidParameterError,
)

__all__ = [
    "SchemeParams",
    "JointModel",
    "CovariancePair",
    "LmmseResult",
    "SCHEMES",
    "OBSERVATIONS",
    "lmmse_solve",
    "build_joint_model",
    "gaussian_mutual_information",
]

# Relative singular-value cutoff for the pseudo-inverse.
PINV_RCOND = 1e-12
# Rounding slack for the mmse clamp.
MMSE_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class SchemeParams:
    """Scalar physical parameters of one scenario.

    Parameters
    ----------
    power_P : float
        Transmit power constraint ``P``.
    design_noise : float
        Channel noise variance the scheme is designed for.
    interference_Q : float
        Variance of the interference known at the transmitter.
    source_var : float
        Source variance.
    innovation_var : float, optional
        Variance of ``Z`` in ``V = V' + Z`` (side information at the receiver).
        Defaults to ``source_var``, i.e. no side information.
    actual_noise : float, optional
        Noise variance actually seen on the channel.  Defaults to
        ``design_noise`` (matched operation).
    epsilon : float
        Rate-window slack.  Only the rate-window calculators use it.
    bandwidth_ratio : float
        Channel uses per source sample.
    """

    power_P: float
    design_noise: float
    interference_Q: float = 0.0
    source_var: float = 1.0
    innovation_var: float | None = None
    actual_noise: float | None = None
    epsilon: float = 0.0
    bandwidth_ratio: float = 1.0

    def __post_init__(self):
        if self.innovation_var is None:
            object.__setattr__(self, "innovation_var", self.source_var)
        if self.actual_noise is None:
            object.__setattr__(self, "actual_noise", self.design_noise)
        for name in ("power_P", "design_noise", "interference_Q", "source_var",
                     "innovation_var", "actual_noise", "epsilon", "bandwidth_ratio"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        if self.power_P <= 0:
            raise InvalidParameterError(f"power_P must be > 0, got {self.power_P}")
        if self.design_noise <= 0 or self.actual_noise <= 0:
            raise InvalidParameterError("noise variances must be > 0")
        if min(self.interference_Q, self.source_var, self.innovation_var, self.epsilon) < 0:
            raise InvalidParameterError("variances and epsilon must be >= 0")
        if self.innovation_var > self.source_var:
            raise InvalidParameterError(
                "innovation_var must not exceed source_var (V' would have negative variance)"
            )
        if self.bandwidth_ratio <= 0:
            raise InvalidParameterError("bandwidth_ratio must be > 0")

    @property
    def side_info_var(self) -> float:
        """Variance of the decoder side information ``V'``."""
        return self.source_var - self.innovation_var

    @property
    def capacity_bits(self) -> float:
        """AWGN capacity at the design noise, bits per channel use."""
        return 0.5 * math.log2(1.0 + self.power_P / self.design_noise)

    def with_actual_noise(self, actual_noise: float) -> SchemeParams:
        return replace(self, actual_noise=actual_noise)


@dataclass(frozen=True)
class CovariancePair:
    """Observation covariance ``lambda_mat`` and target cross-correlation ``gamma_vec``."""

    lambda_mat: np.ndarray
    gamma_vec: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lambda_mat, dtype=float)
        gam = np.array(self.gamma_vec, dtype=float).reshape(-1)
        if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
            raise ContractViolationError(f"lambda_mat must be square, got shape {lam.shape}")
        if gam.shape[0] != lam.shape[0]:
            raise ContractViolationError(
                f"gamma_vec length {gam.shape[0]} does not match lambda_mat dimension {lam.shape[0]}"
            )
        lam.setflags(write=False)
        gam.setflags(write=False)
        object.__setattr__(self, "lambda_mat", lam)
        object.__setattr__(self, "gamma_vec", gam)


@dataclass(frozen=True)
class LmmseResult:
    coefficients: np.ndarray
    mmse: float


def lmmse_solve(pair: CovariancePair, target_var: float) -> LmmseResult:
    """Linear MMSE estimate of a scalar target from correlated observations.

    Returns the weights ``Λ⁺Γ`` and the residual ``target_var − ΓᵀΛ⁺Γ``.
    A pseudo-inverse (cutoff ``1e-12·σ_max``) handles rank-deficient
    observation sets, e.g. an observation that is identically zero.

    Raises
    ------
    InvalidCovarianceError
        If ``Λ`` is not symmetric or has an eigenvalue below ``-1e-8·trace``,
        or if the residual comes out clearly negative (inconsistent ``Γ``).
    """
    lam = pair.lambda_mat
    gam = pair.gamma_vec
    if not np.all(np.isfinite(lam)) or not np.all(np.isfinite(gam)):
        raise ContractViolationError("covariance entries must be finite")
    scale = max(float(np.max(np.abs(lam))) if lam.size else 0.0, 1.0)
    if not np.allclose(lam, lam.T, rtol=0.0, atol=1e-12 * scale):
        raise InvalidCovarianceError("lambda_mat is not symmetric")
    if lam.size == 0:
        return LmmseResult(np.zeros(0), float(target_var))
    eig = np.linalg.eigvalsh(lam)
    trace = float(np.trace(lam))
    if eig[0] < -1e-8 * max(trace, 0.0) or (trace <= 0 and eig[0] < 0):
        raise InvalidCovarianceError(f"lambda_mat is indefinite (min eigenvalue {eig[0]:.3e})")

    weights = np.linalg.pinv(lam, rcond=PINV_RCOND, hermitian=True) @ gam
    mmse = float(target_var - gam @ weights)
    tol = MMSE_CLAMP_TOL * max(1.0, abs(float(target_var)))
    if mmse < 0.0:
        if mmse < -tol:
            raise InvalidCovarianceError(
                f"negative residual {mmse:.3e}: gamma_vec inconsistent with lambda_mat"
            )
        mmse = 0.0
    elif mmse > target_var:
        if mmse > target_var + tol:
            raise InvalidCovarianceError("residual exceeds target variance")
        mmse = float(target_var)
    weights.setflags(write=False)
    return LmmseResult(weights, mmse)


@dataclass(frozen=True)
class JointModel:
    """Jointly Gaussian variables as linear images of independent primitives.

    ``derivations[role]`` maps primitive names to mixing coefficients; the
    covariance is ``A · diag(primitive_var) · Aᵀ`` over ``roles``.
    """

    scheme_id: str
    roles: tuple[str, ...]
    primitive_var: Mapping[str, float]
    derivations: Mapping[str, Mapping[str, float]]
    cov: np.ndarray = field(repr=False)

    def index(self, role: str) -> int:
        try:
            return self.roles.index(role)
        except ValueError:
            raise ContractViolationError(
                f"role {role!r} not in model {self.scheme_id!r} (roles: {', '.join(self.roles)})"
            ) from None

    def covariance(self, a: str, b: str) -> float:
        return float(self.cov[self.index(a), self.index(b)])

    def variance(self, role: str) -> float:
        return self.covariance(role, role)

    def pair(self, target: str, observations: Sequence[str]) -> tuple[CovariancePair, float]:
        """Extract ``(Λ, Γ)`` for estimating ``target`` and the target variance."""
        idx = [self.index(r) for r in observations]
        t = self.index(target)
        lam = self.cov[np.ix_(idx, idx)]
        gam = self.cov[idx, t]
        return CovariancePair(lam, gam), float(self.cov[t, t])

    def mmse(self, target: str, observations: Sequence[str]) -> LmmseResult:
        pair, var = self.pair(target, observations)
        return lmmse_solve(pair, var)

    def mutual_information(self, a: Sequence[str], b: Sequence[str]) -> float:
        """Gaussian mutual information ``I(a; b)`` in bits from log-determinants."""
        return gaussian_mutual_information(self.cov, [self.index(r) for r in a],
                                           [self.index(r) for r in b])

    def mixing_matrix(self) -> tuple[tuple[str, ...], np.ndarray]:
        prims = tuple(self.primitive_var)
        mat = np.array([[self.derivations[r].get(p, 0.0) for p in prims] for r in self.roles])
        return prims, mat


def gaussian_mutual_information(cov: np.ndarray, a: Sequence[int], b: Sequence[int]) -> float:
    cov = np.asarray(cov, dtype=float)
    a = list(a)
    b = list(b)

    def logdet(ix):
        sign, val = np.linalg.slogdet(cov[np.ix_(ix, ix)])
        if sign <= 0:
            raise InvalidCovarianceError("singular block in mutual information")
        return val

    return float((logdet(a) + logdet(b) - logdet(a + b)) / (2.0 * math.log(2.0)))


# Estimation observations for the source V in each scheme.
OBSERVATIONS: Mapping[str, tuple[str, ...]] = MappingProxyType({
    "hda-costa": ("U", "Y"),
    "hda-wz": ("V'", "U", "Y"),
    "combined": ("V'", "U", "Y"),
    "modified": ("V'", "U", "Y"),
    "gen-hda": ("V*", "U", "Y"),
    "superposition-costa": ("V*", "U", "Y"),
    "superimposed-wz": ("Vt", "U", "Y2"),
    "naive": ("V'", "Y"),
})

SCHEMES = tuple(OBSERVATIONS)


def _sqrt_nonneg(value: float, what: str) -> float:
    if value < 0:
        raise InfeasibleDesignError(f"{what} = {value:.6g} < 0: infeasible design")
    return math.sqrt(value)


def _coef(design, *names, default=None):
    for name in names:
        if design is not None and hasattr(design, name):
            return getattr(design, name)
    if default is None:
        raise ContractViolationError(f"design lacks any of {names}")
    return default


def build_joint_model(scheme_id: str, params: SchemeParams, design=None) -> JointModel:
    """Covariance model of one scheme with noise variance ``params.actual_noise``.

    ``design`` supplies the coefficients (``alpha``, ``kappa``, ...); when it
    is ``None`` the default design from :mod:`hdajscc.designs` is used.  A
    design exposing ``kappa_sq`` that is negative raises
    :class:`InfeasibleDesignError`.
    """
    if scheme_id not in OBSERVATIONS:
        raise ContractViolationError(f"unknown scheme {scheme_id!r}; choose from {', '.join(SCHEMES)}")
    if design is None:
        from .designs import default_design

        design = default_design(scheme_id, params)
    for sq in ("kappa_sq", "kappa1_sq", "kappa_e_sq"):
        if hasattr(design, sq) and getattr(design, sq) < 0:
            raise InfeasibleDesignError(f"{sq} = {getattr(design, sq):.6g} < 0")

    P = params.power_P
    Q = params.interference_Q
    sv2 = params.source_var
    sz2 = params.innovation_var
    wa = params.actual_noise
    prim: dict[str, float] = {}
    rows: dict[str, dict[str, float]] = {}

    if scheme_id in ("hda-costa", "hda-wz", "combined", "modified", "naive"):
        if scheme_id == "hda-costa":
            sz2 = sv2
        prim = {"V'": sv2 - sz2, "Z": sz2, "S": Q, "X": P, "W": wa}
        rows["V"] = {"V'": 1.0, "Z": 1.0}
        if scheme_id == "naive":
            gain = math.sqrt(P / sv2) if sv2 > 0 else 0.0
            del prim["X"]
            rows["X"] = {"V'": gain, "Z": gain}
            rows["Y"] = {"V'": gain, "Z": gain, "W": 1.0}
        else:
            if scheme_id == "modified":
                alpha = 1.0
                kappa = _coef(design, "kappa_e")
            else:
                alpha = 0.0 if scheme_id == "hda-wz" else _coef(design, "alpha")
                kappa = _coef(design, "kappa")
            rows["U"] = {"X": 1.0, "S": alpha, "V'": kappa, "Z": kappa}
            rows["Y"] = {"X": 1.0, "W": 1.0} if scheme_id == "hda-wz" else {"X": 1.0, "S": 1.0, "W": 1.0}
        order = ["V", "V'", "Z", "S", "X", "W", "U", "Y"]
    elif scheme_id == "gen-hda":
        se2 = sv2 * 2.0 ** (-2.0 * _coef(design, "digital_rate"))
        prim = {"V*": sv2 - se2, "E": se2, "S": Q, "X": P, "W": wa}
        rows["V"] = {"V*": 1.0, "E": 1.0}
        rows["U"] = {"X": 1.0, "S": _coef(design, "alpha"), "E": _coef(design, "kappa1")}
        rows["Y"] = {"X": 1.0, "S": 1.0, "W": 1.0}
        order = ["V", "V*", "E", "S", "X", "W", "U", "Y"]
    elif scheme_id == "superposition-costa":
        se2 = sv2 * 2.0 ** (-2.0 * design.rate)
        prim = {"V*": sv2 - se2, "E": se2, "S": Q, "Xc": design.power_c,
                "Xh": design.power_hc, "W": wa}
        rows["V"] = {"V*": 1.0, "E": 1.0}
        rows["X"] = {"Xc": 1.0, "Xh": 1.0}
        rows["Uc"] = {"Xc": 1.0, "S": design.alpha_c}
        rows["U"] = {"Xh": 1.0, "Xc": design.alpha_hc, "S": design.alpha_hc, "E": design.kappa}
        rows["Y"] = {"Xc": 1.0, "Xh": 1.0, "S": 1.0, "W": 1.0}
        order = ["V", "V*", "E", "S", "Xc", "Xh", "X", "W", "Uc", "U", "Y"]
    else:  # superimposed-wz
        se2 = sz2 * 2.0 ** (-2.0 * design.rate)
        prim = {"V'": sv2 - sz2, "Zq": sz2 - se2, "Zt": se2, "X1": design.power_wz,
                "X2": design.power_hwz, "W": wa}
        rows["Z"] = {"Zq": 1.0, "Zt": 1.0}
        rows["V"] = {"V'": 1.0, "Zq": 1.0, "Zt": 1.0}
        rows["Vt"] = {"V'": 1.0, "Zq": 1.0}
        rows["X"] = {"X1": 1.0, "X2": 1.0}
        k1 = design.kappa1
        rows["U"] = {"X2": 1.0, "V'": k1, "Zq": k1, "Zt": k1}
        rows["Y"] = {"X1": 1.0, "X2": 1.0, "W": 1.0}
        rows["Y2"] = {"X2": 1.0, "W": 1.0}
        order = ["V", "V'", "Z", "Vt", "X1", "X2", "X", "W", "U", "Y", "Y2"]

    for name, var in prim.items():
        if var < -1e-15:
            raise InfeasibleDesignError(f"primitive {name} has negative variance {var:.6g}")
        prim[name] = max(var, 0.0)
        rows.setdefault(name, {name: 1.0})

    roles = tuple(r for r in order if r in rows)
    prims = tuple(prim)
    mix = np.array([[rows[r].get(p, 0.0) for p in prims] for r in roles])
    cov = (mix * np.array([prim[p] for p in prims])) @ mix.T
    cov = 0.5 * (cov + cov.T)
    cov.setflags(write=False)
    return JointModel(
        scheme_id=scheme_id,
        roles=roles,
        primitive_var=MappingProxyType(dict(prim)),
        derivations=MappingProxyType({r: MappingProxyType(dict(rows[r])) for r in roles}),
        cov=cov,
    )
