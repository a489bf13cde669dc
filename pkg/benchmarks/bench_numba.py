"""Time the numba kernels against their numpy twins.

Usage: python benchmarks/bench_numba.py [--sizes 16,24,32] [--repeats 5]
"""
import argparse
import time

import numpy as np

from nlch import _kernels
from nlch.grid import GridSpec


def best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(N, rng):
    g = GridSpec.square(N)
    x = -g.Lx + g.hx * np.arange(N + 1)
    y = -g.Ly + g.hy * np.arange(N + 1)
    phi = rng.standard_normal(g.shape)
    delta = 0.3
    nimg = _kernels.n_images(g.Lx, delta)
    yield "direct_trapezoid", (phi, x, y, g.Lx, g.Ly, delta, 1.0, nimg, nimg)
    big = rng.uniform(-1.0, 1.0, (16 * N, 16 * N))
    yield "dwell_sum", (big, 2.0)
    yield "dwell_deriv", (big, 2.0)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="16,24,32")
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args(argv)
    if not _kernels.NUMBA_IMPLS:
        raise SystemExit("numba is not available (or NLCH_PURE_NUMPY is set)")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'N':>5}{'numpy [s]':>13}{'numba [s]':>13}{'speedup':>10}")
    for N in (int(s) for s in args.sizes.split(",")):
        for name, a in cases(N, rng):
            _kernels.NUMBA_IMPLS[name](*a)  # compile outside the timed region
            t_np = best_of(_kernels.NUMPY_IMPLS[name], a, args.repeats)
            t_nb = best_of(_kernels.NUMBA_IMPLS[name], a, args.repeats)
            print(f"{name:<18}{N:>5}{t_np:>13.5f}{t_nb:>13.5f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
