"""Compare the numba and pure-numpy kernels on identical inputs.

Usage::

    python benchmarks/bench_kernels.py [--shots 1500000] [--repeat 5]

Each kernel pair is checked for equal output before timing. The end-to-end
row times one full-scale experiment with the default backend; run it again
with ``JOINTMEAS_DISABLE_NUMBA=1`` to time the numpy path.
"""

import argparse
import math
import time

import numpy as np

from jointmeas import kernels
from jointmeas._accel import HAVE_NUMBA
from jointmeas.experiment import build_reference_experiments, run_experiment


def best_of(fn, repeat):
    fn()  # warm-up (includes JIT compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=1_500_000)
    ap.add_argument("--grid", type=int, default=401)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    bu, ou = rng.random(args.shots), rng.random(args.shots)
    u = rng.random(args.shots)
    grid = np.linspace(0.01, 1.0, args.grid)
    a = np.array([0.0, 0.0, 1.0])
    t = math.radians(26.0)
    b = np.array([math.sin(t), 0.0, math.cos(t)])

    cases = [
        ("tally_joint", lambda impl: impl(bu, ou, 0.67, 0.81, 0.12), "tally_joint"),
        ("tally_sharp", lambda impl: impl(u, 0.81), "tally_sharp"),
        ("norm_residual_grid", lambda impl: impl(grid, grid, a, b, 0.67), "norm_residual_grid"),
    ]

    print(f"numba available: {HAVE_NUMBA}; default backend: {kernels.BACKEND}")
    print(f"{'kernel':<20} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}")
    for label, call, stem in cases:
        np_impl = getattr(kernels, f"{stem}_numpy")
        t_np = best_of(lambda: call(np_impl), args.repeat)
        if HAVE_NUMBA:
            nb_impl = getattr(kernels, f"{stem}_numba")
            ref, got = call(np_impl), call(nb_impl)
            if ref.dtype.kind == "i":
                assert np.array_equal(ref, got), label
            else:
                np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-14)
            t_nb = best_of(lambda: call(nb_impl), args.repeat)
            print(f"{label:<20} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:7.1f}x")
        else:
            print(f"{label:<20} {1e3 * t_np:11.2f} {'n/a':>11} {'n/a':>8}")

    cfg = build_reference_experiments()[0]
    t0 = time.perf_counter()
    run_experiment(cfg)
    print(f"one full-scale experiment ({kernels.BACKEND}): {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
