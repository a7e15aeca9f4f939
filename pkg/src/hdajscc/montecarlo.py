"""Monte Carlo check of the estimation stage of every scheme.

The decoder is assumed to recover the auxiliary codeword exactly, so each
trial draws the jointly Gaussian variables of one source/channel sample and
applies a linear estimator to the observations.  The sampler below builds
the variables directly from their defining equations; it does not read the
covariance model, which lets the two be checked against each other.

Reproducibility
---------------
Trials are grouped in fixed blocks of :data:`BLOCK_TRIALS`; block ``k``
draws from ``numpy.random.default_rng([seed, STREAM_TAG, k])``.  Per-block
sums are combined in block order, so the result does not depend on the
number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import OBSERVATIONS, SchemeParams, build_joint_model
from .designs import default_design
from .errors import ContractViolationError, HdaError, InvalidParameterError

__all__ = [
    "McConfig",
    "SimStats",
    "BLOCK_TRIALS",
    "ESTIMATORS",
    "estimator_weights",
    "analytic_distortion",
    "sample_observations",
    "mc_validate",
    "mc_sweep",
]

BLOCK_TRIALS = 65536
STREAM_TAG = 0x4D43  # separates these streams from the codebook simulator's
ESTIMATORS = ("published", "lmmse")


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo job.

    ``estimator="published"`` applies the scheme's fixed design-time
    estimator; ``"lmmse"`` uses the LMMSE weights for the actual noise.
    ``design=None`` selects the default design (not possible for layered
    schemes, which need a rate).
    """

    scheme_id: str
    params: SchemeParams
    design: object = None
    trials: int = 100_000
    seed: int = 0
    estimator: str = "published"

    def __post_init__(self):
        if self.scheme_id not in OBSERVATIONS:
            raise ContractViolationError(f"unknown scheme {self.scheme_id!r}")
        if int(self.trials) < 1:
            raise InvalidParameterError("trials must be >= 1")
        if self.estimator not in ESTIMATORS:
            raise InvalidParameterError(f"estimator must be one of {ESTIMATORS}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameterError("seed must fit in 64 unsigned bits")

    def resolved_design(self):
        if self.design is not None or self.scheme_id == "naive":
            return self.design
        return default_design(self.scheme_id, self.params)


@dataclass(frozen=True)
class SimStats:
    empirical_d: float
    stderr: float
    trials_run: int


def estimator_weights(scheme_id: str, params: SchemeParams, design, estimator: str = "published") -> np.ndarray:
    """Linear weights on ``OBSERVATIONS[scheme_id]`` defining the source estimate."""
    if estimator == "lmmse":
        return np.array(build_joint_model(scheme_id, params, design)
                        .mmse("V", OBSERVATIONS[scheme_id]).coefficients)
    P = params.power_P
    if scheme_id == "hda-costa":
        g = design.kappa * params.source_var / P
        return np.array([g, -g * design.alpha])
    if scheme_id in ("hda-wz", "combined"):
        g = design.kappa * params.innovation_var / P
        alpha = design.alpha
        return np.array([1.0 - g * design.kappa, g, -g * alpha])
    if scheme_id == "gen-hda":
        g = design.kappa1 * params.source_var / P
        return np.array([1.0, g, -g * design.alpha])
    if scheme_id == "naive":
        gain = math.sqrt(P / params.source_var)
        sz2 = params.innovation_var
        h = gain * sz2 / (gain * gain * sz2 + params.design_noise)
        return np.array([1.0 - h * gain, h])
    # No closed-form estimator: the LMMSE weights for the design noise.
    matched = params.with_actual_noise(params.design_noise)
    return np.array(build_joint_model(scheme_id, matched, design)
                    .mmse("V", OBSERVATIONS[scheme_id]).coefficients)


def analytic_distortion(config: McConfig) -> float:
    """Exact MSE of the configured estimator under the covariance model."""
    design = config.resolved_design()
    model = build_joint_model(config.scheme_id, config.params, design)
    w = estimator_weights(config.scheme_id, config.params, design, config.estimator)
    pair, var = model.pair("V", OBSERVATIONS[config.scheme_id])
    d = var - 2.0 * w @ pair.gamma_vec + w @ pair.lambda_mat @ w
    return max(float(d), 0.0)


def _normal(rng, var, n):
    return rng.standard_normal(n) * math.sqrt(max(var, 0.0))


def sample_observations(scheme_id: str, params: SchemeParams, design, rng, n: int):
    """Draw ``n`` trials; returns the source and the observation matrix (rows follow ``OBSERVATIONS``)."""
    P, Q, sv2, sz2 = params.power_P, params.interference_Q, params.source_var, params.innovation_var
    wa = params.actual_noise
    if scheme_id == "hda-costa":
        sz2 = sv2

    if scheme_id in ("hda-costa", "hda-wz", "combined", "modified", "naive"):
        vp = _normal(rng, sv2 - sz2, n)
        z = _normal(rng, sz2, n)
        s = _normal(rng, Q, n)
        w = _normal(rng, wa, n)
        v = vp + z
        if scheme_id == "naive":
            y = math.sqrt(P / sv2) * v + w
            return v, np.stack([vp, y])
        x = _normal(rng, P, n)
        if scheme_id == "hda-wz":
            u = x + design.kappa * v
            y = x + w
        else:
            alpha, kappa = (1.0, design.kappa_e) if scheme_id == "modified" else (design.alpha, design.kappa)
            u = x + alpha * s + kappa * v
            y = x + s + w
        obs = [u, y] if scheme_id == "hda-costa" else [vp, u, y]
        return v, np.stack(obs)

    if scheme_id in ("gen-hda", "superposition-costa"):
        rate = design.digital_rate if scheme_id == "gen-hda" else design.rate
        se2 = sv2 * 2.0 ** (-2.0 * rate)
        v_star = _normal(rng, sv2 - se2, n)
        e = _normal(rng, se2, n)
        s = _normal(rng, Q, n)
        w = _normal(rng, wa, n)
        v = v_star + e
        if scheme_id == "gen-hda":
            x = _normal(rng, P, n)
            u = x + design.alpha * s + design.kappa1 * e
        else:
            xc = _normal(rng, design.power_c, n)
            xh = _normal(rng, design.power_hc, n)
            x = xc + xh
            u = xh + design.alpha_hc * (xc + s) + design.kappa * e
        y = x + s + w
        return v, np.stack([v_star, u, y])

    if scheme_id == "superimposed-wz":
        se2 = sz2 * 2.0 ** (-2.0 * design.rate)
        vp = _normal(rng, sv2 - sz2, n)
        zq = _normal(rng, sz2 - se2, n)
        zt = _normal(rng, se2, n)
        x2 = _normal(rng, design.power_hwz, n)
        w = _normal(rng, wa, n)
        v = vp + zq + zt
        u = x2 + design.kappa1 * v
        # The digital layer is decoded and stripped from y before estimation.
        y2 = x2 + w
        return v, np.stack([vp + zq, u, y2])

    raise ContractViolationError(f"unknown scheme {scheme_id!r}")


def _block_sums(config: McConfig, design, weights, block: int, n: int):
    rng = np.random.default_rng([int(config.seed), STREAM_TAG, block])
    v, obs = sample_observations(config.scheme_id, config.params, design, rng, n)
    err = (v - weights @ obs) ** 2
    return float(np.sum(err)), float(np.sum(err * err))


def mc_validate(config: McConfig, workers: int | None = None) -> SimStats:
    """Empirical MSE and its standard error for one configuration.

    Parameters
    ----------
    workers : int, optional
        Thread count for the trial blocks; the result is the same for any value.
    """
    design = config.resolved_design()
    build_joint_model(config.scheme_id, config.params, design)  # feasibility check
    weights = estimator_weights(config.scheme_id, config.params, design, config.estimator)
    trials = int(config.trials)
    sizes = [min(BLOCK_TRIALS, trials - k) for k in range(0, trials, BLOCK_TRIALS)]

    def job(k):
        return _block_sums(config, design, weights, k, sizes[k])

    if workers is None or workers <= 1 or len(sizes) == 1:
        sums = [job(k) for k in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(job, range(len(sizes))))

    total = 0.0
    total_sq = 0.0
    for s, s2 in sums:
        total += s
        total_sq += s2
    mean = total / trials
    if trials > 1:
        var = max(total_sq / trials - mean * mean, 0.0) * trials / (trials - 1)
        stderr = math.sqrt(var / trials)
    else:
        stderr = 0.0
    return SimStats(empirical_d=mean, stderr=stderr, trials_run=trials)


def mc_sweep(configs: Sequence[McConfig], workers: int | None = None) -> list:
    """Run several configurations; a failing entry holds its exception instead of stats."""

    def run(cfg):
        try:
            return mc_validate(cfg)
        except HdaError as exc:
            return exc

    if workers is None or workers <= 1:
        return [run(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, configs))
