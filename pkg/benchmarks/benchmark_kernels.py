"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot paths of a solver step (per-cell closure + wave speeds,
HLL update) on Riemann-problem grids at several closure orders, plus a few
full solver runs through each backend.  Run as:

    python benchmarks/benchmark_kernels.py [--cells 4000] [--orders 2,4,10]

The packaged backend is chosen at import time (HYQMOM_PURE_NUMPY=1 forces
the fallback); this script imports both implementations directly so a single
invocation covers both.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import hyqmom.kernels_numpy as knp
from hyqmom.solver import SolverConfig

try:
    import hyqmom.kernels_numba as knb
except ImportError:
    knb = None


def time_fn(fn, *args, repeat: int = 5, warmup: int = 1) -> float:
    for _ in range(warmup):
        fn(*args)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def perturbed_grid(n: int, cells: int) -> np.ndarray:
    """Strictly realizable per-cell states, no two alike.

    Perturbing raw moments directly would leave moment space at high order,
    flagging cells and letting the kernels skip work; perturbing the
    recurrence coefficients keeps every state strictly interior.
    """
    from hyqmom.orthopoly import RecurrenceCoefficients, reverse_chebyshev

    rng = np.random.default_rng(0)
    states = np.empty((cells, 2 * n + 1))
    for i in range(cells):
        mean = 1.0 if i < cells // 2 else -1.0
        a = mean + 0.05 * rng.standard_normal(n)
        b = np.concatenate(([1.0], (np.arange(1, n + 1) / 3.0) * rng.uniform(0.9, 1.1, n)))
        states[i] = reverse_chebyshev(RecurrenceCoefficients(a, b), 2 * n)
    return states


def bench_closure(cells: int, orders: list[int]) -> None:
    print(f"\nclosure + wave speeds, {cells} cells (best of 5, seconds)")
    header = f"{'n':>4} {'numpy':>12} {'numba':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in orders:
        states = perturbed_grid(n, cells)
        assert np.all(knp.closure_speeds_batch(states, n)[3] == 0), "cells must stay interior"
        t_np = time_fn(knp.closure_speeds_batch, states, n)
        if knb is not None:
            t_nb = time_fn(knb.closure_speeds_batch, states, n)
            print(f"{n:>4} {t_np:>12.5f} {t_nb:>12.5f} {t_np / t_nb:>8.1f}x")
        else:
            print(f"{n:>4} {t_np:>12.5f} {'-':>12} {'-':>9}")


def bench_hll(cells: int, orders: list[int]) -> None:
    print(f"\nHLL update, {cells} cells (best of 5, seconds)")
    header = f"{'n':>4} {'numpy':>12} {'numba':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in orders:
        states = perturbed_grid(n, cells)
        top, lo, hi, _ = knp.closure_speeds_batch(states, n)
        args = (states, top, float(lo.min()), float(hi.max()), 0.3)
        t_np = time_fn(knp.hll_update, *args)
        if knb is not None:
            t_nb = time_fn(knb.hll_update, *args)
            print(f"{n:>4} {t_np:>12.5f} {t_nb:>12.5f} {t_np / t_nb:>8.1f}x")
        else:
            print(f"{n:>4} {t_np:>12.5f} {'-':>12} {'-':>9}")


def bench_full_run(cells: int) -> None:
    """Short end-to-end runs through the backend dispatcher (one per backend)."""
    import hyqmom.backend as backend
    from hyqmom.solver import run

    saved = (backend.closure_speeds_batch, backend.hll_update)
    print(f"\nfull solver runs, n=2, {cells} cells, t_end=0.02")
    try:
        for impl, name in [(knp, "numpy")] + ([(knb, "numba")] if knb else []):
            backend.closure_speeds_batch = impl.closure_speeds_batch
            backend.hll_update = impl.hll_update
            t0 = time.perf_counter()
            _, stats = run(SolverConfig(n=2, cells=cells, t_end=0.02))
            print(f"  {name:>6}: {time.perf_counter() - t0:8.3f}s  ({stats['steps']} steps)")
    finally:
        backend.closure_speeds_batch, backend.hll_update = saved


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cells", type=int, default=4000)
    parser.add_argument("--orders", type=str, default="1,2,4,10")
    args = parser.parse_args()
    orders = [int(v) for v in args.orders.split(",")]

    if knb is None:
        print("numba not importable: benchmarking the numpy fallback only")
    bench_closure(args.cells, orders)
    bench_hll(args.cells, orders)
    bench_full_run(args.cells)


if __name__ == "__main__":
    main()
