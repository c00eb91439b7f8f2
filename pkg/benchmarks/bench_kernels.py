#!/usr/bin/env python3
"""Benchmark the compiled residual kernel against the pure-numpy fallback.

The residual fill (every point against every hypothesis) is the pipeline's
hot loop; this script times both backends on synthetic workloads and checks
they agree bit-for-bit.

Usage: python benchmarks/bench_kernels.py [--points N] [--repeats R]
"""

import argparse
import time

import numpy as np

from moseg import _kernels_py, kernels


def workload(rng, num_points, num_frames, num_hyp):
    positions = rng.uniform(0, 1000, (num_points, num_frames, 2))
    visibility = rng.random((num_points, num_frames)) > 0.1
    positions = positions.copy()
    positions[~visibility] = np.nan
    mats = rng.normal(size=(num_hyp, 3, 3))
    f1 = rng.integers(0, num_frames - 1, num_hyp)
    offset = rng.integers(1, num_frames, num_hyp)
    f2 = np.minimum(f1 + offset, num_frames - 1)
    f2 = np.maximum(f2, f1 + 1)
    pairs = np.column_stack([f1, f2]).astype(np.int64)
    return mats, pairs, positions, visibility


def time_backend(impl, code, args, repeats):
    best = np.inf
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = kernels.fill_residual_matrix(code, *args, impl=impl)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = [
        ("small  (F=10, K=1k)", 10, 1_000),
        ("medium (F=10, K=5k)", 10, 5_000),
        ("large  (F=30, K=15k)", 30, 15_000),
    ]
    backends = [("python", _kernels_py)]
    if kernels.HAVE_NATIVE:
        backends.append(("native", kernels.native_impl))
    else:
        print("note: compiled extension not available; timing fallback only")

    header = f"{'case':<22}{'code':<10}" + "".join(f"{name:>12}" for name, _ in backends)
    if kernels.HAVE_NATIVE:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, num_frames, num_hyp in cases:
        work = workload(rng, args.points, num_frames, num_hyp)
        for code, code_name in ((kernels.TRANSFER, "transfer"), (kernels.EPIPOLAR, "epipolar")):
            times = {}
            results = {}
            for name, impl in backends:
                times[name], results[name] = time_backend(impl, code, work, args.repeats)
            row = f"{label:<22}{code_name:<10}"
            for name, _ in backends:
                row += f"{times[name] * 1e3:>10.1f}ms"
            if kernels.HAVE_NATIVE:
                row += f"{times['python'] / times['native']:>9.1f}x"
                same = np.array_equal(
                    results["python"][0][~results["python"][1]],
                    results["native"][0][~results["native"][1]],
                )
                row += "  (bit-identical)" if same else "  (MISMATCH!)"
            print(row)


if __name__ == "__main__":
    main()
