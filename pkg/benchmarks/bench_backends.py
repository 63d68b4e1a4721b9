"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_backends.py [--sizes 200,400,800] [--reps 3]

Prints one CSV row per (kernel, size) with both timings and the speedup.
"""
import argparse
import sys
import time

import numpy as np

from bscmatch import _fallback
from bscmatch.baseline import bench_pair
from bscmatch.descriptor import ShapeContextParams, compute_descriptors, cost_matrix

try:
    from bscmatch import _kernels
except ImportError:
    sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")


def best_of(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="200,400,800")
    ap.add_argument("--reps", type=int, default=3)
    args = ap.parse_args(argv)

    params = ShapeContextParams()
    print("kernel,size,cython_s,python_s,speedup")
    for n in (int(s) for s in args.sizes.split(",")):
        p, q = bench_pair(n)
        dp, dq = compute_descriptors(p, params), compute_descriptors(q, params)
        pts = np.ascontiguousarray(p.points)
        e = params.radial_edges(dp.mean_distance)[1:-1]
        e2 = np.ascontiguousarray(e * e)
        hp, hq = dp.normalized(), dq.normalized()
        M = np.ascontiguousarray(cost_matrix(dp, dq).values)
        cases = {
            "sc_histograms": lambda k: k.sc_histograms(pts, e2, params.angular_bins, np.empty(0)),
            "chi2_matrix": lambda k: k.chi2_matrix(hp, hq),
            "row_col_argmin": lambda k: (k.row_argmin(M), k.col_argmin(M)),
            "hungarian": lambda k: k.hungarian(M),
        }
        for name, fn in cases.items():
            tc = best_of(lambda: fn(_kernels), args.reps)
            tp = best_of(lambda: fn(_fallback), args.reps)
            print(f"{name},{n},{tc:.6f},{tp:.6f},{tp / tc:.1f}", flush=True)


if __name__ == "__main__":
    main()
