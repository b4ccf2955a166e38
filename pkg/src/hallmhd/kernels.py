"""Hot physical-space kernels with optional numba acceleration.

The FFTs themselves run through numpy/pocketfft; what is left on the hot
path are large elementwise contractions on (3, n, n, n) real arrays
(cross products, advection contractions) and weighted spectral
reductions.  Each kernel has a pure-numpy implementation and a numba
``@njit(parallel=True)`` twin compiled on flattened views.

Backend selection: numba is used when importable unless the environment
variable ``HMHD_NUMBA`` is set to ``0``/``off``/``false``.  See
``benchmarks/bench_kernels.py`` for a timing comparison of both paths.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_enabled() -> bool:
    flag = os.environ.get("HMHD_NUMBA", "1").strip().lower()
    return flag not in ("0", "off", "false", "no")


# ---------------------------------------------------------------------------
# pure-numpy reference implementations
# ---------------------------------------------------------------------------

def cross3_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise cross product of two (3, ...) real vector fields."""
    out = np.empty_like(a)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


def advect_numpy(v: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """(v . grad) contraction: grad has shape (3, 3, ...) = d_i w_j."""
    return np.einsum("i...,ij...->j...", v, grad)


def weighted_l2sq_numpy(coef: np.ndarray, weight: np.ndarray) -> float:
    """Sum over modes of weight * |coef|^2, coef shape (c, n, n, n)."""
    return float(np.sum(weight * (coef.real**2 + coef.imag**2)))


cross3 = cross3_numpy
advect = advect_numpy
weighted_l2sq = weighted_l2sq_numpy
BACKEND = "numpy"

# ---------------------------------------------------------------------------
# numba twins (flattened loops, parallel over the grid)
# ---------------------------------------------------------------------------

if _numba_enabled():
    try:
        from numba import njit, prange

        @njit(parallel=True, fastmath=True, cache=True)
        def _cross3_flat(a, b, out):
            m = a.shape[1]
            for i in prange(m):
                out[0, i] = a[1, i] * b[2, i] - a[2, i] * b[1, i]
                out[1, i] = a[2, i] * b[0, i] - a[0, i] * b[2, i]
                out[2, i] = a[0, i] * b[1, i] - a[1, i] * b[0, i]

        @njit(parallel=True, fastmath=True, cache=True)
        def _advect_flat(v, grad, out):
            m = v.shape[1]
            for i in prange(m):
                for j in range(3):
                    out[j, i] = (v[0, i] * grad[0, j, i]
                                 + v[1, i] * grad[1, j, i]
                                 + v[2, i] * grad[2, j, i])

# serial on purpose: reduction order must be deterministic for
        # byte-identical reruns of diagnostic streams
        @njit(cache=True)
        def _weighted_l2sq_flat(re, im, w):
            m = re.shape[0]
            acc = 0.0
            for i in range(m):
                acc += w[i] * (re[i] * re[i] + im[i] * im[i])
            return acc

        def cross3_numba(a, b):
            out = np.empty_like(a)
            m = a[0].size
            _cross3_flat(a.reshape(3, m), b.reshape(3, m), out.reshape(3, m))
            return out

        def advect_numba(v, grad):
            out = np.empty_like(v)
            m = v[0].size
            _advect_flat(v.reshape(3, m), grad.reshape(3, 3, m),
                         out.reshape(3, m))
            return out

        def weighted_l2sq_numba(coef, weight):
            c = np.ascontiguousarray(coef).reshape(-1)
            w = np.broadcast_to(weight, coef.shape).reshape(-1)
            return float(_weighted_l2sq_flat(
                np.ascontiguousarray(c.real), np.ascontiguousarray(c.imag),
                np.ascontiguousarray(w)))

        cross3 = cross3_numba
        advect = advect_numba
        weighted_l2sq = weighted_l2sq_numba
        BACKEND = "numba"
    except ImportError:
        pass
