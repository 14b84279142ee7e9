"""Matrix products with a fixed summation order.

``ordered_matmul(u, b)`` accumulates ``u[i, k] * b[k, j]`` for ``k``
ascending, one multiply and one add per term, starting from ``+0.0``.
Dropping an all-zero row of ``b`` (and the matching column of ``u``) then
leaves every partial sum unchanged, which BLAS blocking does not promise.
"""

import numpy as np

from ._backend import BACKEND


def ordered_matmul_numpy(u: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((u.shape[0], b.shape[1]))
    tmp = np.empty_like(out)
    for k in range(u.shape[1]):
        np.multiply(u[:, k:k + 1], b[k:k + 1, :], out=tmp)
        out += tmp
    return out


try:
    from numba import njit
except ImportError:  # pragma: no cover
    ordered_matmul_numba = None
else:
    @njit(cache=True)
    def ordered_matmul_numba(u, b):
        m, kk = u.shape
        cols = b.shape[1]
        out = np.zeros((m, cols))
        for i in range(m):
            for k in range(kk):
                a = u[i, k]
                for j in range(cols):
                    out[i, j] += a * b[k, j]
        return out


if BACKEND == "numba":
    def ordered_matmul(u, b):
        return ordered_matmul_numba(np.ascontiguousarray(u, dtype=np.float64),
                                    np.ascontiguousarray(b, dtype=np.float64))
else:
    ordered_matmul = ordered_matmul_numpy
