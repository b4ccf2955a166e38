"""Timing comparison of the numba and pure-numpy kernel paths.

Run as:

    python3 benchmarks/bench_kernels.py [--n 128] [--repeats 20]

The package selects the backend at import time from ``HMHD_NUMBA``;
this script imports both implementations directly so one process can
time the two paths side by side.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hallmhd import kernels


def _time(fn, *args, repeats: int) -> float:
    fn(*args)  # warm-up (and JIT compile for numba paths)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    n = args.n

    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, n, n, n))
    b = rng.standard_normal((3, n, n, n))
    grad = rng.standard_normal((3, 3, n, n, n))
    coef = (rng.standard_normal((3, n, n, n))
            + 1j * rng.standard_normal((3, n, n, n)))
    weight = rng.random((n, n, n))

    pairs = [
        ("cross3", kernels.cross3_numpy, (a, b)),
        ("advect", kernels.advect_numpy, (a, grad)),
        ("weighted_l2sq", kernels.weighted_l2sq_numpy, (coef, weight)),
    ]
    numba_fns = {}
    if kernels.BACKEND == "numba":
        numba_fns = {"cross3": kernels.cross3_numba,
                     "advect": kernels.advect_numba,
                     "weighted_l2sq": kernels.weighted_l2sq_numba}

    print(f"grid {n}^3, best of {args.repeats} runs, "
          f"selected backend: {kernels.BACKEND}")
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, np_fn, fn_args in pairs:
        t_np = _time(np_fn, *fn_args, repeats=args.repeats) * 1e3
        if name in numba_fns:
            t_nb = _time(numba_fns[name], *fn_args,
                         repeats=args.repeats) * 1e3
            print(f"{name:<16}{t_np:>12.3f}{t_nb:>12.3f}"
                  f"{t_np / t_nb:>10.2f}x")
        else:
            print(f"{name:<16}{t_np:>12.3f}{'n/a':>12}{'':>10}")


if __name__ == "__main__":
    main()
