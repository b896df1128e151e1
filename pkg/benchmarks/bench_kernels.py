"""Benchmark the compiled core against the NumPy fallback on the hot kernels.

Run from the repository root:

    python benchmarks/bench_kernels.py

Both implementations are imported directly (no subprocesses), so one run
covers both backends regardless of which one the package selected.
"""
import time

import numpy as np

from gpplab import _fallback, backend
from gpplab.dnorm import uniform_grid

try:
    from gpplab import _native
except ImportError:
    _native = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def row(label, nat, fal):
    speedup = f"{fal / nat:5.1f}x" if nat else "   --"
    nat_s = f"{nat * 1e3:9.2f}" if nat else "       --"
    print(f"{label:<44} {nat_s} {fal * 1e3:9.2f} {speedup}")


def main():
    rng = np.random.default_rng(0)
    t1024 = uniform_grid(1024)
    print(f"selected backend: {backend.BACKEND}")
    if _native is None:
        print("compiled core not built; timing the fallback only\n")
    print(f"{'kernel operation':<44} {'native ms':>9} {'numpy ms':>9} {'speedup':>7}")

    # streaming exceedance statistics: 2^20 draws, constant threshold
    s = rng.normal(0.5, 2.0, 1 << 20)
    args = (0, s, t1024, 1.0)
    nat = timeit(_native.sup_inf_const, *args) if _native else None
    row("sup/inf, constant weights, 2^20 draws", nat, timeit(_fallback.sup_inf_const, *args))

    # general threshold function: 2^14 draws x 1025 grid points
    s_small = s[: 1 << 14]
    fabs = np.exp(-t1024)
    args = (0, s_small, fabs, t1024, 1.0)
    nat = timeit(_native.sup_inf_grid, *args) if _native else None
    row("sup/inf, weighted grid, 2^14 x 1025", nat, timeit(_fallback.sup_inf_grid, *args))

    # path materialization: 4096 paths x 1025 grid points
    s_paths = s[:4096]
    inv_g = rng.uniform(0.5, 2.0, len(s_paths))
    args = (0, s_paths, t1024, 1.0, inv_g)
    nat = timeit(_native.paths_matrix, *args) if _native else None
    row("path matrix, 4096 x 1025", nat, timeit(_fallback.paths_matrix, *args))

    # end-to-end: exceedance scan of 10^6 GPP paths
    from gpplab import build_generator, laplace_kernel
    from gpplab.processes import exceedance_scan

    gen = build_generator(laplace_kernel(), 1.0, 0.5)

    def scan():
        exceedance_scan(gen, -0.01, 1_000_000, np.random.default_rng(1), keep_positions=False)

    t_scan = timeit(scan, repeat=3)
    print(f"\nend-to-end scan of 1e6 paths ({backend.BACKEND} backend): {t_scan * 1e3:.0f} ms")
    print(f"  ({1e6 / t_scan / 1e6:.1f} M paths/s; rerun with GPPLAB_FORCE_FALLBACK=1 to compare)")


if __name__ == "__main__":
    main()
