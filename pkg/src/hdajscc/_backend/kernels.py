"""Codebook search and broadcast-grid kernels.

Each kernel has a numba version and a numpy version with the same
signature.  Numba is used when it is importable unless the environment
variable ``HDAJSCC_DISABLE_NUMBA`` is set to a non-empty value other than
``0``.  Pass ``backend="numpy"`` or ``backend="numba"`` to force one.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

NUMBA_AVAILABLE = numba is not None
_DISABLED = os.environ.get("HDAJSCC_DISABLE_NUMBA", "") not in ("", "0")

# Codewords per chunk in the numpy codebook searches (bounds the temporary
# distance matrix to trials x chunk).
_CHUNK = 4096
# Relative determinant below which a 2x2 covariance is treated as rank one.
_RANK_TOL = 1e-12


def default_backend() -> str:
    return "numba" if NUMBA_AVAILABLE and not _DISABLED else "numpy"


def _resolve(backend: str | None) -> str:
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {backend!r}")
    if backend == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


# ---------------------------------------------------------------- numpy


def _power_match_numpy(codebook, targets, power):
    n = codebook.shape[1]
    t_sq = np.einsum("ij,ij->i", targets, targets)
    best = np.full(targets.shape[0], np.inf)
    idx = np.zeros(targets.shape[0], dtype=np.int64)
    for start in range(0, codebook.shape[0], _CHUNK):
        block = codebook[start:start + _CHUNK]
        c_sq = np.einsum("ij,ij->i", block, block)
        dist = c_sq[None, :] - 2.0 * (targets @ block.T) + t_sq[:, None]
        err = np.abs(dist / n - power)
        j = np.argmin(err, axis=1)
        e = err[np.arange(err.shape[0]), j]
        better = e < best
        best[better] = e[better]
        idx[better] = j[better] + start
    return idx


def _nearest_numpy(codebook, points):
    best = np.full(points.shape[0], np.inf)
    idx = np.zeros(points.shape[0], dtype=np.int64)
    for start in range(0, codebook.shape[0], _CHUNK):
        block = codebook[start:start + _CHUNK]
        c_sq = np.einsum("ij,ij->i", block, block)
        # ||p||^2 is common to every codeword and does not affect the argmin.
        dist = c_sq[None, :] - 2.0 * (points @ block.T)
        j = np.argmin(dist, axis=1)
        e = dist[np.arange(dist.shape[0]), j]
        better = e < best
        best[better] = e[better]
        idx[better] = j[better] + start
    return idx


def _quad_form_2x2_numpy(p, q, r, g1, g2):
    """``g^T L^+ g`` for symmetric PSD ``L = [[p, q], [q, r]]``, elementwise."""
    det = p * r - q * q
    tr = p + r
    full = det > _RANK_TOL * tr * tr
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_form = (r * g1 * g1 - 2.0 * q * g1 * g2 + p * g2 * g2) / det
        rank1 = (p * g1 * g1 + 2.0 * q * g1 * g2 + r * g2 * g2) / (tr * tr)
    rank1 = np.where(tr > 0, rank1, 0.0)
    return np.where(full, inv_form, rank1)


def _broadcast_numpy(a, b, noise_weak, noise_strong):
    c = np.maximum(1.0 - a - b, 0.0)
    d1 = 0.5 / (1.0 + a / (b + c + noise_weak)) + 0.5 / (1.0 + b / (c + noise_weak))
    alpha1 = b / (b + c + noise_weak)
    k2 = b * b / (b + c + noise_weak)
    p = 1.0 + noise_strong
    q = b + alpha1 * a
    r = b + alpha1 * alpha1 * a + k2
    sa = np.sqrt(a)
    first = 1.0 - _quad_form_2x2_numpy(p, q, r, sa, alpha1 * sa)
    second = 1.0 - _quad_form_2x2_numpy(p, q, r, np.zeros_like(a), np.sqrt(k2))
    d2 = 0.5 * first + 0.5 * second / (1.0 + c / noise_strong)
    return d1, d2


# ---------------------------------------------------------------- numba

if NUMBA_AVAILABLE:

    @numba.njit(cache=True)
    def _power_match_numba(codebook, targets, power):
        m, n = codebook.shape
        out = np.empty(targets.shape[0], dtype=np.int64)
        for t in range(targets.shape[0]):
            best = np.inf
            bi = 0
            for j in range(m):
                s = 0.0
                for k in range(n):
                    d = codebook[j, k] - targets[t, k]
                    s += d * d
                e = abs(s / n - power)
                if e < best:
                    best = e
                    bi = j
            out[t] = bi
        return out

    @numba.njit(cache=True)
    def _nearest_numba(codebook, points):
        m, n = codebook.shape
        out = np.empty(points.shape[0], dtype=np.int64)
        for t in range(points.shape[0]):
            best = np.inf
            bi = 0
            for j in range(m):
                s = 0.0
                for k in range(n):
                    d = codebook[j, k] - points[t, k]
                    s += d * d
                if s < best:
                    best = s
                    bi = j
            out[t] = bi
        return out

    @numba.njit(cache=True)
    def _quad_2x2(p, q, r, g1, g2):
        det = p * r - q * q
        tr = p + r
        if det > _RANK_TOL * tr * tr:
            return (r * g1 * g1 - 2.0 * q * g1 * g2 + p * g2 * g2) / det
        if tr > 0.0:
            return (p * g1 * g1 + 2.0 * q * g1 * g2 + r * g2 * g2) / (tr * tr)
        return 0.0

    @numba.njit(cache=True)
    def _broadcast_numba(a, b, noise_weak, noise_strong):
        d1 = np.empty(a.shape[0])
        d2 = np.empty(a.shape[0])
        for i in range(a.shape[0]):
            ai = a[i]
            bi = b[i]
            ci = max(1.0 - ai - bi, 0.0)
            d1[i] = 0.5 / (1.0 + ai / (bi + ci + noise_weak)) + 0.5 / (1.0 + bi / (ci + noise_weak))
            alpha1 = bi / (bi + ci + noise_weak)
            k2 = bi * bi / (bi + ci + noise_weak)
            p = 1.0 + noise_strong
            q = bi + alpha1 * ai
            r = bi + alpha1 * alpha1 * ai + k2
            sa = np.sqrt(ai)
            first = 1.0 - _quad_2x2(p, q, r, sa, alpha1 * sa)
            second = 1.0 - _quad_2x2(p, q, r, 0.0, np.sqrt(k2))
            d2[i] = 0.5 * first + 0.5 * second / (1.0 + ci / noise_strong)
        return d1, d2


# ---------------------------------------------------------------- dispatch


def power_match_search(codebook, targets, power, backend=None):
    """Per row of ``targets``, the codeword index minimizing ``| ||c - t||^2 / N - power |``.

    Ties resolve to the lowest index.
    """
    codebook = np.ascontiguousarray(codebook, dtype=np.float64)
    targets = np.ascontiguousarray(np.atleast_2d(targets), dtype=np.float64)
    if _resolve(backend) == "numba":
        return _power_match_numba(codebook, targets, float(power))
    return _power_match_numpy(codebook, targets, float(power))


def nearest_scaled_search(codebook, points, backend=None):
    """Per row of ``points``, the index of the nearest codeword in Euclidean distance."""
    codebook = np.ascontiguousarray(codebook, dtype=np.float64)
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    if _resolve(backend) == "numba":
        return _nearest_numba(codebook, points)
    return _nearest_numpy(codebook, points)


def broadcast_grid(a, b, noise_weak, noise_strong, backend=None):
    """Weak- and strong-user distortions for arrays of layer powers ``a`` and ``b``.

    The third-layer power is ``max(1 - a - b, 0)``.
    """
    a = np.ascontiguousarray(a, dtype=np.float64).reshape(-1)
    b = np.ascontiguousarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError("a and b must have the same length")
    if _resolve(backend) == "numba":
        return _broadcast_numba(a, b, float(noise_weak), float(noise_strong))
    return _broadcast_numpy(a, b, float(noise_weak), float(noise_strong))
