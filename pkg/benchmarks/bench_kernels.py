"""Time the numba kernels against their numpy fallbacks.

Run with ``python benchmarks/bench_kernels.py``.  Each kernel is warmed up
once (numba compiles on first call), then timed over several repeats; the
two backends must return identical indices and matching distortions.
"""

import argparse
import time

import numpy as np

from hdajscc._backend import NUMBA_AVAILABLE, broadcast_grid, nearest_scaled_search, power_match_search
from hdajscc.bandwidth import _simplex_grid


def best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(codewords, block_n, batch, grid_n):
    rng = np.random.default_rng(0)
    book = rng.standard_normal((codewords, block_n)) * 1.5
    pts = rng.standard_normal((batch, block_n))
    a, b = _simplex_grid(grid_n)
    return {
        "power_match_search": lambda be: power_match_search(book, pts, 1.0, backend=be),
        "nearest_scaled_search": lambda be: nearest_scaled_search(book, pts, backend=be),
        "broadcast_grid": lambda be: broadcast_grid(a, b, 1.0, 10 ** -0.5, backend=be),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--codewords", type=int, default=4096)
    ap.add_argument("--block-n", type=int, default=16)
    ap.add_argument("--batch", type=int, default=1024)
    ap.add_argument("--grid-n", type=int, default=400)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':<24}{'numpy s':>12}{'numba s':>12}{'speedup':>10}  agree")
    for name, fn in cases(args.codewords, args.block_n, args.batch, args.grid_n).items():
        fn("numba")  # compile
        t_np, out_np = best_time(lambda: fn("numpy"), args.repeats)
        t_nb, out_nb = best_time(lambda: fn("numba"), args.repeats)
        if isinstance(out_np, tuple):
            agree = all(np.allclose(x, y, rtol=0, atol=1e-12) for x, y in zip(out_np, out_nb))
        else:
            agree = bool(np.array_equal(out_np, out_nb))
        print(f"{name:<24}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}  {agree}")


if __name__ == "__main__":
    main()
