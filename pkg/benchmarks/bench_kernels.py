"""Times the dispatched kernels against the pure-numpy fallback.

The dispatcher binds its backend at import, so run this twice to see both
sides from the dispatch column:

    python benchmarks/bench_kernels.py
    NCLAYER_BACKEND=numpy python benchmarks/bench_kernels.py

The numpy column always calls the fallback directly, so a single run under
the default (numba) backend already gives the interesting comparison.
"""

import argparse
import time

import numpy as np

from nclayer.kernels import (
    BACKEND,
    expected_layers_batch,
    expected_layers_batch_numpy,
    gf_matmul,
    gf_rref,
    matmul_numpy,
    rref_numpy,
)
from nclayer.spt import _pmf_rows, enumerate_strategies


def best_of(fn, repeat):
    fn()  # warm-up also triggers jit compilation
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--payload", type=int, default=256)
    parser.add_argument("--rows", type=int, default=128)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rows = []

    coeffs = rng.integers(0, 256, (args.rows, args.rows), dtype=np.uint8)
    data = rng.integers(0, 256, (args.rows, args.payload), dtype=np.uint8)
    rows.append((
        f"gf_matmul {coeffs.shape}x{data.shape}",
        best_of(lambda: gf_matmul(coeffs, data), args.repeat),
        best_of(lambda: matmul_numpy(coeffs, data), args.repeat),
    ))

    aug = rng.integers(0, 256, (64, 32 + args.payload), dtype=np.uint8)
    rows.append((
        f"gf_rref {aug.shape}",
        best_of(lambda: gf_rref(aug.copy(), 32), args.repeat),
        best_of(lambda: rref_numpy(aug.copy(), 32), args.repeat),
    ))

    strategies = np.asarray(enumerate_strategies(64, 4, 4), dtype=np.int64)
    pmf = _pmf_rows(64, 0.7)
    rows.append((
        f"expected_layers_batch {strategies.shape[0]} strategies",
        best_of(lambda: expected_layers_batch(strategies, pmf, 8), args.repeat),
        best_of(lambda: expected_layers_batch_numpy(strategies, pmf, 8), args.repeat),
    ))

    width = max(len(name) for name, _, _ in rows)
    print(f"dispatch backend: {BACKEND}")
    print(f"{'kernel':<{width}}  {'dispatch':>10}  {'numpy':>10}  {'ratio':>6}")
    for name, fast, slow in rows:
        print(f"{name:<{width}}  {fast * 1e3:>8.2f}ms  {slow * 1e3:>8.2f}ms  {slow / fast:>5.1f}x")


if __name__ == "__main__":
    main()
