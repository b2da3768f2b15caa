"""Time the numba and numpy kernels side by side.

    python benchmarks/bench_kernels.py [--repeat N]

The first numba call includes compilation (cached on disk afterwards) and
is reported separately.
"""

import argparse
import time

import numpy as np

from k3sw import _accel, kernels
from k3sw.lattice import E8_CARTAN
from k3sw.sphere_grid import icosphere


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    v6, f6 = icosphere(6)
    rot = np.linalg.qr(np.random.default_rng(0).normal(size=(3, 3)))[0]
    img = v6 @ rot
    target = np.array([0.2317, -0.6482, 0.7253])
    target /= np.linalg.norm(target)
    return {
        "short_vectors E8 |x|^2<=8": lambda nb: kernels.short_vectors(E8_CARTAN, 8, 10**6, use_numba=nb),
        "short_vectors E8 |x|^2<=14": lambda nb: kernels.short_vectors(E8_CARTAN, 14, 10**6, use_numba=nb),
        "solid_angle_sum level 6": lambda nb: kernels.solid_angle_sum(img, f6, use_numba=nb),
        "triangles_containing level 6": lambda nb: kernels.triangles_containing(img, f6, target, use_numba=nb),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"numba available: {_accel.NUMBA_AVAILABLE}; default backend: {_accel.backend_name()}")
    print(f"{'kernel':32s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'first call':>12s} {'speedup':>8s}")
    for name, fn in cases().items():
        t_np = best_of(lambda: fn(False), args.repeat)
        if _accel.NUMBA_AVAILABLE:
            t0 = time.perf_counter()
            fn(True)
            first = time.perf_counter() - t0
            t_nb = best_of(lambda: fn(True), args.repeat)
            print(f"{name:32s} {1e3 * t_np:12.2f} {1e3 * t_nb:12.2f} {1e3 * first:12.1f} {t_np / t_nb:7.1f}x")
        else:
            print(f"{name:32s} {1e3 * t_np:12.2f} {'-':>12s} {'-':>12s} {'-':>8s}")


if __name__ == "__main__":
    main()
