"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the selection env var is irrelevant
here.  Outputs are compared for equality before timing.
"""
import argparse
import time

import numpy as np

from scenerylab import _kernels_py
from scenerylab.groups import GroupSpec

try:
    from scenerylab import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(rng):
    g8 = GroupSpec.cycle(8)
    dense = np.ones(8, dtype=np.uint8)
    sparse = np.array([1, 1, 0, 1, 0, 0, 1, 0], dtype=np.uint8)
    steps = rng.integers(0, 7, size=(1_000_000, 1))
    probs, alias = np.array([0.6, 1.0, 0.9]), np.array([1, 1, 1])
    u1, u2 = rng.random(1_000_000), rng.random(1_000_000)
    obs = rng.integers(0, 2, 1_000_000).astype(np.uint8)
    return {
        "multispectrum_dfs (Z8, all ones)": ("multispectrum_dfs", (dense, g8.add_table, 7)),
        "multispectrum_dfs (Z8, 4 ones)": ("multispectrum_dfs", (sparse, g8.add_table, 7)),
        "walk_positions (1e6 steps)": ("walk_positions", (np.array([0]), steps, [7])),
        "alias_sample (1e6 draws)": ("alias_sample", (probs, alias, u1, u2)),
        "lag_batch_sums (1e6, L=10)": ("lag_batch_sums", (obs, 10, 50)),
    }


def best_time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':38s} {'python (s)':>11s} {'cython (s)':>11s} {'speedup':>8s}")
    for label, (name, kargs) in cases(rng).items():
        py, cy = getattr(_kernels_py, name), getattr(_kernels, name)
        if not same(py(*kargs), cy(*kargs)):
            raise SystemExit(f"backends disagree on {label}")
        tp = best_time(py, kargs, args.repeat)
        tc = best_time(cy, kargs, args.repeat)
        print(f"{label:38s} {tp:11.4f} {tc:11.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
