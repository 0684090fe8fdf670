"""Time each kernel on the numba and numpy backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Numba timings exclude the first (compiling) call. Results from both backends
are checked for agreement before timing.
"""
import argparse
import time

import numpy as np

from playervectors import _accel, kernels
from playervectors.heatmap import gaussian_weights


def cases(rng):
    counts = np.zeros((50, 34))
    idx = rng.integers(0, 50 * 34, 40)
    np.add.at(counts.ravel(), idx, 1.0)
    points = rng.random((3000, 2)) * 100
    centroids = rng.random((8, 2)) * 100
    labels = rng.integers(0, 8, 3000)
    W = rng.random((1700, 5))
    X = rng.random((1700, 400))
    gram, wtx = W.T @ W, W.T @ X
    init = np.full((5, 400), 0.1)
    w = gaussian_weights(1.5)
    return {
        "scatter_smooth (50x34, 40 events)": lambda: kernels.scatter_smooth(counts, w),
        "kmeans_assign (3000 pts, k=8)": lambda: kernels.kmeans_assign(points, centroids),
        "silhouette_samples (3000 pts, k=8)": lambda: kernels.silhouette_samples(points, labels, 8),
        "nmf_transform_columns (k=5, 400 cols)":
            lambda: kernels.nmf_transform_columns(gram, wtx, init, 5000, 1e-9, 1e-12),
    }


def _first(result):
    return result[0] if isinstance(result, tuple) else result


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is not installed")
    table = cases(np.random.default_rng(0))
    print(f"{'kernel':<40} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    old = _accel.get_backend()
    try:
        for name, fn in table.items():
            _accel.set_backend("numpy")
            ref = _first(fn())
            t_np = timeit(fn, args.repeat)
            _accel.set_backend("numba")
            got = _first(fn())  # compiles on first use
            np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-12)
            t_nb = timeit(fn, args.repeat)
            print(f"{name:<40} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} {t_np / t_nb:>7.1f}x")
    finally:
        _accel.set_backend(old)


if __name__ == "__main__":
    main()
