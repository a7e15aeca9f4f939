"""Finite-blocklength HDA Costa coding with an explicit random Gaussian codebook.

The encoder picks the codeword whose residual ``x = u - alpha s - kappa v``
has empirical power closest to ``P``; the decoder picks the codeword nearest
to ``rho y`` with ``rho = E[UY] / E[Y^2]``.  The source estimate is
``(kappa sigma_v^2 / P)(u_hat - alpha y)``.

Trials run in blocks of :data:`BLOCK_TRIALS`; block ``k`` draws from
``numpy.random.default_rng([seed, STREAM_TAG, k])``, so results do not depend
on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import nearest_scaled_search, power_match_search
from .core import SchemeParams, build_joint_model
from .designs import CostaDesign
from .errors import CodebookTooLargeError, InvalidParameterError

__all__ = [
    "CodebookConfig",
    "CodebookSimStats",
    "EncodeResult",
    "MAX_CODEWORDS",
    "BLOCK_TRIALS",
    "codebook_config_for",
    "build_codebook",
    "decoder_scale",
    "encode",
    "decode",
    "simulate",
]

MAX_CODEWORDS = 2**24
BLOCK_TRIALS = 1024
STREAM_TAG = 0x4342
_CODEBOOK_TAG = 0x4342_0001
# Slack so that N * R1 landing on an integer up to rounding gives that integer.
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class CodebookConfig:
    block_n: int
    rate_r1: float
    codeword_var: float
    seed: int = 0

    def __post_init__(self):
        if int(self.block_n) < 1:
            raise InvalidParameterError("block_n must be >= 1")
        if not (self.rate_r1 >= 0 and math.isfinite(self.rate_r1)):
            raise InvalidParameterError("rate_r1 must be finite and >= 0")
        if not self.codeword_var > 0:
            raise InvalidParameterError("codeword_var must be > 0")

    @property
    def log2_codewords(self) -> int:
        return max(math.ceil(self.block_n * self.rate_r1 - _CEIL_SLACK), 0)

    @property
    def num_codewords(self) -> int:
        return 2**self.log2_codewords


@dataclass(frozen=True)
class CodebookSimStats:
    decode_error_rate: float
    empirical_mse: float
    mean_tx_power: float
    trials: int
    error_stderr: float
    mse_stderr: float
    power_stderr: float


@dataclass(frozen=True)
class EncodeResult:
    index: np.ndarray | int
    x: np.ndarray
    tx_power: np.ndarray | float


def codebook_config_for(params: SchemeParams, design: CostaDesign, block_n: int,
                        rate_r1: float, seed: int = 0) -> CodebookConfig:
    """Config whose codeword variance is ``P + alpha^2 Q + kappa^2 sigma_v^2``."""
    var = (params.power_P + design.alpha**2 * params.interference_Q
           + design.kappa**2 * params.source_var)
    return CodebookConfig(block_n=block_n, rate_r1=rate_r1, codeword_var=var, seed=seed)


def build_codebook(config: CodebookConfig) -> np.ndarray:
    """``M x N`` matrix of i.i.d. ``N(0, codeword_var)`` entries, deterministic per seed."""
    if config.log2_codewords > 24:
        raise CodebookTooLargeError(
            f"codebook needs 2^{config.log2_codewords} codewords, cap is 2^24"
        )
    rng = np.random.default_rng([int(config.seed), _CODEBOOK_TAG])
    m, n = config.num_codewords, int(config.block_n)
    return rng.standard_normal((m, n)) * math.sqrt(config.codeword_var)


def decoder_scale(params: SchemeParams, design: CostaDesign) -> float:
    """``E[UY] / E[Y^2]`` under the HDA Costa model at the actual noise."""
    model = build_joint_model("hda-costa", params, design)
    return model.covariance("U", "Y") / model.variance("Y")


def encode(v, s, codebook, alpha: float, kappa: float, P: float, backend=None) -> EncodeResult:
    """Pick the codeword whose residual power is closest to ``P``.

    ``v`` and ``s`` are single blocks of length ``N`` or ``(trials, N)``
    batches; outputs follow the same shape.
    """
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    target = alpha * np.asarray(s, dtype=float) + kappa * v
    idx = power_match_search(codebook, np.atleast_2d(target), P, backend=backend)
    x = codebook[idx] - np.atleast_2d(target)
    power = np.mean(x * x, axis=1)
    if single:
        return EncodeResult(index=int(idx[0]), x=x[0], tx_power=float(power[0]))
    return EncodeResult(index=idx, x=x, tx_power=power)


def decode(y, codebook, rho: float, backend=None):
    """Index of the codeword nearest to ``rho * y`` (a single block or a batch)."""
    y = np.asarray(y, dtype=float)
    idx = nearest_scaled_search(codebook, rho * np.atleast_2d(y), backend=backend)
    return int(idx[0]) if y.ndim == 1 else idx


def _run_block(codebook, params, design, rho, seed, block, n, zero_on_failure, backend):
    rng = np.random.default_rng([int(seed), STREAM_TAG, block])
    N = codebook.shape[1]
    shape = (n, N)
    v = rng.standard_normal(shape) * math.sqrt(params.source_var)
    s = rng.standard_normal(shape) * math.sqrt(params.interference_Q)
    w = rng.standard_normal(shape) * math.sqrt(params.actual_noise)
    enc = encode(v, s, codebook, design.alpha, design.kappa, params.power_P, backend=backend)
    y = enc.x + s + w
    dec = decode(y, codebook, rho, backend=backend)
    v_hat = design.estimator_gain * (codebook[dec] - design.alpha * y)
    failed = dec != enc.index
    if zero_on_failure:
        v_hat[failed] = 0.0
    mse = np.mean((v - v_hat) ** 2, axis=1)
    err = failed.astype(float)
    pw = enc.tx_power
    return np.array([np.sum(err), np.sum(mse), np.sum(mse * mse), np.sum(pw), np.sum(pw * pw)])


def _stderr(total, total_sq, n):
    if n < 2:
        return 0.0
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return math.sqrt(var / n)


def simulate(config: CodebookConfig, params: SchemeParams, design: CostaDesign, trials: int,
             seed: int, *, zero_on_failure: bool = False, workers: int | None = None,
             backend: str | None = None) -> CodebookSimStats:
    """Run ``trials`` blocks through encoder, channel, decoder and estimator.

    A wrongly decoded trial is still estimated from the decoded codeword;
    with ``zero_on_failure`` it is estimated as zero instead.
    """
    trials = int(trials)
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    codebook = build_codebook(config)
    rho = decoder_scale(params, design)
    sizes = [min(BLOCK_TRIALS, trials - k) for k in range(0, trials, BLOCK_TRIALS)]

    def job(k):
        return _run_block(codebook, params, design, rho, seed, k, sizes[k], zero_on_failure, backend)

    if workers is None or workers <= 1 or len(sizes) == 1:
        parts = [job(k) for k in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    acc = np.zeros(5)
    for p in parts:
        acc += p
    n_err, s_mse, s_mse2, s_pw, s_pw2 = (float(t) for t in acc)
    rate = n_err / trials
    return CodebookSimStats(
        decode_error_rate=rate,
        empirical_mse=s_mse / trials,
        mean_tx_power=s_pw / trials,
        trials=trials,
        error_stderr=math.sqrt(rate * (1 - rate) / trials),
        mse_stderr=_stderr(s_mse, s_mse2, trials),
        power_stderr=_stderr(s_pw, s_pw2, trials),
    )
