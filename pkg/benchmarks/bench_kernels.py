"""Time the numba and numpy RK4 kernels against each other.

    python3 benchmarks/bench_kernels.py [--m 256 512] [--repeat 200]

The numpy path is also what runs when HYPFLOW_DISABLE_NUMBA=1 is set.
"""

import argparse
import time

import numpy as np

from hypflow import kernels
from hypflow._accel import HAVE_NUMBA
from hypflow.grid import make_grid


def _time(fn, repeat):
    fn()  # warm-up (and JIT compile)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, nargs="+", default=[64, 256, 1024])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'m':>6} {'kind':>8} {'numpy [us]':>12} {'numba [us]':>12} {'speedup':>8} {'max diff':>10}")
    for m in args.m:
        g = make_grid(args.n, m)
        u = 1.0 + 0.05 * np.cos(2 * g.phi)
        for kind, dt in ((kernels.IMCF, 1e-4), (kernels.BRENDLE, 1e-4)):
            ref = kernels.rk4_step_np(u, dt, kind, g.h_step, g.n, g.cot)
            t_np = _time(lambda: kernels.rk4_step_np(u, dt, kind, g.h_step, g.n, g.cot), args.repeat)
            if HAVE_NUMBA:
                got = kernels.rk4_step_nb(u, dt, kind, g.h_step, g.n, g.cot)
                t_nb = _time(lambda: kernels.rk4_step_nb(u, dt, kind, g.h_step, g.n, g.cot), args.repeat)
                diff = float(np.max(np.abs(got - ref)))
                print(f"{m:6d} {('imcf', 'brendle')[kind]:>8} {t_np * 1e6:12.1f} {t_nb * 1e6:12.1f} "
                      f"{t_np / t_nb:8.1f} {diff:10.2e}")
            else:
                print(f"{m:6d} {('imcf', 'brendle')[kind]:>8} {t_np * 1e6:12.1f} {'-':>12} {'-':>8} {'-':>10}")


if __name__ == "__main__":
    main()
