"""Benchmark the compiled eigensolver kernel against the pure-Python twin.

Usage:  python benchmarks/bench_eig.py [--sizes 50,100,200,400] [--repeats 3]

Prints wall time per decomposition for each backend, the speedup, and the
worst eigenvalue disagreement between the two (they implement the same
algorithm, so this is a cross-validation as much as a timing).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from szlab import _eigen_py

try:
    from szlab import _kernels
except ImportError:
    _kernels = None


def _time(impl, a, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = impl.eigh_symmetric(a)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="50,100,200,400")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)
    if _kernels is None:
        print("compiled kernel not built; showing the pure-Python twin only")
    header = f"{'n':>6} {'python (s)':>12} {'compiled (s)':>13} {'speedup':>9} {'max |dlam|':>12}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        a = rng.standard_normal((n, n))
        a = 0.5 * (a + a.T)
        t_py, (d_py, _) = _time(_eigen_py, a, args.repeats)
        if _kernels is not None:
            t_c, (d_c, _) = _time(_kernels, a, args.repeats)
            gap = float(np.max(np.abs(np.sort(d_py) - np.sort(d_c))))
            print(f"{n:>6} {t_py:>12.4f} {t_c:>13.4f} {t_py / t_c:>8.1f}x {gap:>12.2e}")
        else:
            print(f"{n:>6} {t_py:>12.4f} {'-':>13} {'-':>9} {'-':>12}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
