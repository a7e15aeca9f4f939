"""Compiled and pure-numpy implementations of the hot loops."""

from .kernels import (
    NUMBA_AVAILABLE,
    broadcast_grid,
    default_backend,
    nearest_scaled_search,
    power_match_search,
)

__all__ = [
    "NUMBA_AVAILABLE",
    "broadcast_grid",
    "default_backend",
    "nearest_scaled_search",
    "power_match_search",
]
