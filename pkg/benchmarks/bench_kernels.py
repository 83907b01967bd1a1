"""Benchmark the transport kernels: compiled path against plain numpy.

Times the two workloads the hot path actually runs: batched fourth order
transport shaped like a full frame field integration, and the pointwise
Maurer-Cartan residual reduction shaped like one flatness scan.

Run `python benchmarks/bench_kernels.py`; sizes and repeats are flags.
When the compiled backend is unavailable (or disabled through the
DEMOULIN_NO_NUMBA environment variable) only the plain path is timed.
"""

import argparse
import time

import numpy as np

from demoulin._kernels import (HAVE_NUMBA, USING_NUMBA, _mc_residual_max_numpy,
                               _rk4_flow_numpy, mc_residual_max, rk4_flow,
                               warmup)


def time_callable(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def transport_problem(columns, steps, seed=0):
    rng = np.random.default_rng(seed)
    F0 = np.broadcast_to(np.eye(4), (columns, 4, 4)).copy()
    A = 0.25 * rng.normal(size=(columns, 2 * steps + 1, 4, 4))
    h = 1.0 / steps
    return F0, A, h


def residual_problem(points, seed=1):
    rng = np.random.default_rng(seed)
    mats = rng.normal(size=(6, points, 4, 4))
    return [np.ascontiguousarray(m) for m in mats]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--columns", type=int, default=33,
                    help="transport batch width (default 33)")
    ap.add_argument("--steps", type=int, default=128,
                    help="transport steps per column (default 128)")
    ap.add_argument("--points", type=int, default=961,
                    help="residual batch size (default 961)")
    ap.add_argument("--repeat", type=int, default=20,
                    help="repeats per measurement, best is kept (default 20)")
    args = ap.parse_args()

    print(f"numba available: {HAVE_NUMBA}   compiled path active: {USING_NUMBA}")
    warmup()

    F0, A, h = transport_problem(args.columns, args.steps)
    mats = residual_problem(args.points)

    rows = []
    t_np = time_callable(lambda: _rk4_flow_numpy(F0, A, h, 4), args.repeat)
    rows.append(("transport", "numpy", t_np))
    if USING_NUMBA:
        t_nb = time_callable(lambda: rk4_flow(F0, A, h, 4), args.repeat)
        rows.append(("transport", "numba", t_nb))
        rows.append(("transport", "speedup", t_np / t_nb))

    t_np = time_callable(lambda: _mc_residual_max_numpy(*mats, 1e-4),
                         args.repeat)
    rows.append(("residual", "numpy", t_np))
    if USING_NUMBA:
        t_nb = time_callable(lambda: mc_residual_max(*mats, 1e-4), args.repeat)
        rows.append(("residual", "numba", t_nb))
        rows.append(("residual", "speedup", t_np / t_nb))

    print(f"{'workload':<12}{'backend':<10}{'result':>12}")
    for workload, backend, value in rows:
        if backend == "speedup":
            print(f"{workload:<12}{backend:<10}{value:>11.1f}x")
        else:
            print(f"{workload:<12}{backend:<10}{value * 1e3:>10.3f}ms")


if __name__ == "__main__":
    main()
