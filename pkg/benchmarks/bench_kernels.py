"""Compiled kernels vs the numpy fallback on the three hot loops.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]
"""
import argparse
import time

import numpy as np

from circapprox import _fallback
from circapprox.gf2k import find_irreducible, power_tables, iota_mask

try:
    from circapprox import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(scale, rng):
    n, size = 16, int(100_000 * scale)
    ops = rng.integers(0, 16, size=size).astype(np.uint8)
    hi = n + 2 + np.arange(size)
    left = (rng.random(size) * hi).astype(np.int64)
    right = (rng.random(size) * hi).astype(np.int64)
    yield "eval_circuit_words", f"n={n}, {size} gates", (n, ops, left, right, n + 1 + size)

    k, count = 20, int(1_000_000 * scale)
    ctx = find_irreducible(k)
    a = rng.integers(0, 1 << k, size=count, dtype=np.uint64)
    b = rng.integers(0, 1 << k, size=count, dtype=np.uint64)
    yield "gf_mul_array", f"k={k}, {count} products", (a, b, k, ctx.modulus)

    ctx = find_irreducible(20)
    _, x2, x3 = power_tables(ctx)
    f = rng.integers(0, 2, size=1 << 20).astype(np.uint8)
    w = np.full(1 << 20, 2.0 ** -20)
    masks = [iota_mask(ctx, int(v)) for v in rng.integers(1, 1 << 20, size=3)]
    yield "quad_block_sums", "n=20, ell=2, one seed", (f, w, x2, x3, 1, *masks, 2)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--scale", type=float, default=1.0, help="multiplies the workload sizes")
    p.add_argument("--rng", type=int, default=0)
    args = p.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':<20} {'workload':<26} {'cython s':>10} {'python s':>10} {'speedup':>8} match")
    for name, label, inputs in workloads(args.scale, np.random.default_rng(args.rng)):
        tp, out_p = best_time(lambda: getattr(_fallback, name)(*inputs), args.repeat)
        if _kernels is None:
            print(f"{name:<20} {label:<26} {'-':>10} {tp:>10.4f} {'-':>8} -")
            continue
        tc, out_c = best_time(lambda: getattr(_kernels, name)(*inputs), args.repeat)
        same = np.allclose(out_c, out_p, rtol=1e-12, atol=0) if out_c.dtype.kind == "f" else np.array_equal(out_c, out_p)
        print(f"{name:<20} {label:<26} {tc:>10.4f} {tp:>10.4f} {tp / tc:>7.1f}x {'yes' if same else 'NO'}")


if __name__ == "__main__":
    main()
