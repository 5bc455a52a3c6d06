"""Benchmark the compiled Frank-Wolfe kernel against the pure-numpy fallback.

Runs the identical solve through both backends on a grid of instance sizes
and reports wall time per call, speedup, and the worst value disagreement.

Usage:
    python benchmarks/bench_kernels.py [--repeats 5] [--max-iter 2000]
"""

import argparse
import time

import numpy as np

import convexprofit as cp
from convexprofit import _kernels
from convexprofit.matroids import FOPT_TOL


def prepare_call(inst, tol, max_iter):
    """Bind fw_maximize arguments for one instance, mirroring fopt()."""
    n = len(inst.items)
    active = np.ones(n, dtype=np.uint8)
    order_ids = [e.id for e in inst.items]
    mat_code, rank, block_of, caps = inst.matroid.kernel_spec(order_ids)
    code, ca, cb, Q = inst.cost.kernel_spec()
    empty = np.zeros(0)
    args = (
        np.ascontiguousarray(inst.values),
        np.ascontiguousarray(inst.sizes),
        code,
        np.ascontiguousarray(empty if ca is None else ca, dtype=float),
        np.ascontiguousarray(empty if cb is None else cb, dtype=float),
        np.ascontiguousarray(np.zeros((0, 0)) if Q is None else Q,
                             dtype=float),
        mat_code, rank, block_of, caps, active, tol, max_iter,
    )
    return args


def time_backend(fn, args, repeats):
    best = float("inf")
    value = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        x, value, gap, its = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, value


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per cell (best-of is reported)")
    parser.add_argument("--max-iter", type=int, default=2000)
    parser.add_argument("--tol", type=float, default=FOPT_TOL)
    args = parser.parse_args()

    if _kernels.fw_maximize_compiled is None:
        raise SystemExit("compiled kernel unavailable; build the extension "
                         "first (pip install -e . --no-build-isolation)")

    cells = []
    for n in (20, 50, 100, 200):
        for d in (1, 3):
            for cost_kind in ("separable_power", "supermodular_quadratic"):
                cells.append((n, d, cost_kind))

    header = (f"{'n':>4} {'d':>2} {'cost':>22} {'python':>10} "
              f"{'compiled':>10} {'speedup':>8} {'|dvalue|':>10}")
    print(header)
    print("-" * len(header))
    worst = 0.0
    for idx, (n, d, cost_kind) in enumerate(cells):
        cfg = cp.GeneratorConfig(n=n, d=d, cost_kind=cost_kind,
                                 matroid_kind="uniform",
                                 matroid_rank=max(2, n // 5))
        inst = cp.generate(cfg, seed=100 + idx)
        call = prepare_call(inst, args.tol, args.max_iter)
        t_py, v_py = time_backend(_kernels.fw_maximize_python, call,
                                  args.repeats)
        t_c, v_c = time_backend(_kernels.fw_maximize_compiled, call,
                                args.repeats)
        dv = abs(v_py - v_c)
        worst = max(worst, dv)
        print(f"{n:>4} {d:>2} {cost_kind:>22} {t_py * 1e3:>8.2f}ms "
              f"{t_c * 1e3:>8.2f}ms {t_py / t_c:>7.1f}x {dv:>10.2e}")
    print(f"\nworst value disagreement: {worst:.2e}")


if __name__ == "__main__":
    main()
