"""Time the numba and numpy backends of the momentum-sum kernels.

    python3 benchmarks/bench_kernels.py [--M 2 4] [--repeat 3] [--threads N]

Prints one CSV row per (kernel, M) with the best wall time of each backend,
the speedup and the max relative difference between the two results.
"""
import argparse
import csv
import math
import sys
import time

import numpy as np

from qflat import kernels
from qflat._accel import USE_NUMBA, set_threads

SEPARATION = (2, 1, 0, -1)

KERNELS = {
    "scalar_direct": (kernels.scalar_direct_sum, 1.0),
    "scalar_accel": (kernels.scalar_accel_sum, 1.0),
    "dirac_direct": (kernels.dirac_direct_sum, 1.0),
    # the closed-form time sum needs mt * delta < 1
    "dirac_accel": (kernels.dirac_accel_sum, 0.9),
}


def best_time(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, nargs="+", default=[2, 4])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--skip-direct-above", type=int, default=4,
                    help="skip the (2L)^4 direct sums on the numpy path above this M")
    args = ap.parse_args(argv)
    if not USE_NUMBA:
        print("numba backend disabled (QFLAT_NUMBA=0 or numba missing); nothing to compare", file=sys.stderr)
        return 1
    set_threads(args.threads)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["kernel", "M", "N", "terms", "numba_s", "numpy_s", "speedup", "max_rel_diff"])
    for M in args.M:
        L, delta = M * M, math.sqrt(math.pi) / M
        for name, (fn, mass) in KERNELS.items():
            direct = name.endswith("direct")
            terms = (2 * L) ** (4 if direct else 3)
            call = lambda b: fn(L, delta, mass, SEPARATION, b)  # noqa: E731
            call("numba")  # compile outside the timing
            t_nb, a = best_time(lambda: call("numba"), args.repeat)
            if direct and M > args.skip_direct_above:
                w.writerow([name, M, M, terms, f"{t_nb:.4g}", "", "", ""])
                continue
            t_np, b = best_time(lambda: call("numpy"), args.repeat)
            diff = float(np.max(np.abs(a - b)) / np.max(np.abs(a)))
            w.writerow([name, M, M, terms, f"{t_nb:.4g}", f"{t_np:.4g}", f"{t_np / t_nb:.3g}", f"{diff:.2e}"])
            sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
