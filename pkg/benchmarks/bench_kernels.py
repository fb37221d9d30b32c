"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot kernels (leaf histogram build, split scan) in-process,
then an end-to-end training run per backend in subprocesses so the env
flag takes effect at import. Usage: python3 benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from depdetect.gbdt import kernels  # noqa: E402


def time_fn(fn, *args, repeat=5):
    fn(*args)  # warmup / compile
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n_rows=20000, n_features=2000, n_bins=64):
    rng = np.random.default_rng(0)
    binned = rng.integers(0, n_bins, size=(n_rows, n_features)).astype(np.int32)
    rows = np.arange(n_rows, dtype=np.int64)
    grad = rng.normal(size=n_rows)
    hess = rng.uniform(0.01, 1, size=n_rows)

    try:
        from numba import njit
    except ImportError:
        print("numba unavailable; only the numpy path can be benchmarked")
        return
    hist_nb = njit(cache=True)(kernels._leaf_histograms_loops)
    scan_nb = njit(cache=True)(kernels._scan_splits_loops)

    print(f"leaf_histograms  ({n_rows} rows x {n_features} features, {n_bins} bins)")
    t_nb = time_fn(hist_nb, binned, rows, grad, hess, n_bins)
    t_np = time_fn(kernels._leaf_histograms_numpy, binned, rows, grad, hess, n_bins)
    print(f"  numba: {t_nb * 1e3:8.2f} ms   numpy: {t_np * 1e3:8.2f} ms   "
          f"speedup: {t_np / t_nb:5.2f}x")

    hg, hh, hc = hist_nb(binned, rows, grad, hess, n_bins)
    m = np.full(n_features, n_bins - 1, dtype=np.int64)
    print(f"scan_splits      ({n_features} features x {n_bins} bins)")
    t_nb = time_fn(scan_nb, hg, hh, hc, m, 20, 1.0)
    t_np = time_fn(kernels._scan_splits_numpy, hg, hh, hc, m, 20, 1.0)
    print(f"  numba: {t_nb * 1e3:8.2f} ms   numpy: {t_np * 1e3:8.2f} ms   "
          f"speedup: {t_np / t_nb:5.2f}x")


TRAIN_SNIPPET = """
import time
import numpy as np
from depdetect import gbdt

rng = np.random.default_rng(0)
n, f = 2000, 500
X = rng.uniform(0, 1, size=(n, f))
X[rng.random((n, f)) < 0.8] = 0.0
y = (X[:, 0] > 0.4).astype(int)
hp = gbdt.Hyperparams(num_rounds=5)
gbdt.train(X, y, ["a", "b"], hp)  # warmup / compile
t0 = time.perf_counter()
gbdt.train(X, y, ["a", "b"], gbdt.Hyperparams(num_rounds=50))
print(f"{time.perf_counter() - t0:.3f}")
"""


def bench_train():
    print("end-to-end train (2000 rows x 500 features, 50 rounds, binary)")
    times = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, DEPDETECT_NO_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, "-c", TRAIN_SNIPPET],
            capture_output=True, text=True, env=env, check=True,
        )
        times[label] = float(out.stdout.strip())
        print(f"  {label}: {times[label]:.3f} s")
    print(f"  speedup: {times['numpy'] / times['numba']:.2f}x")


if __name__ == "__main__":
    bench_kernels()
    bench_train()
