"""Dense N-dimensional tensors and the multilinear primitives built on them.

Tensors are plain C-ordered ``float64`` numpy arrays; modes are numpy axes
(0-based).  The mode-``n`` unfolding places the ``n``-th index on the rows
and enumerates the remaining indices in their original order, rightmost
fastest, along the columns.
"""

from __future__ import annotations

import numpy as np

from ._contract import ordered_matmul

MAX_NDIM = 32


def as_tensor(data) -> np.ndarray:
    """Return ``data`` as a C-contiguous float64 array, validating its shape."""
    t = np.asarray(data, dtype=np.float64)
    if t.ndim < 1:
        raise ValueError("tensors need at least one dimension")
    if t.ndim > MAX_NDIM:
        raise ValueError(f"at most {MAX_NDIM} dimensions are supported, got {t.ndim}")
    if any(s < 1 for s in t.shape):
        raise ValueError(f"every extent must be positive, got {t.shape}")
    if any(s >= 2**32 for s in t.shape):
        raise ValueError("extents must fit in 32 bits")
    return np.ascontiguousarray(t)


def _check_mode(ndim: int, n: int) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"mode must be an integer, got {n!r}")
    if not 0 <= n < ndim:
        raise ValueError(f"mode {n} out of range for a {ndim}-dimensional tensor")
    return int(n)


def unfold(t: np.ndarray, n: int) -> np.ndarray:
    """Mode-``n`` unfolding: an ``I_n x (C / I_n)`` row-major matrix."""
    t = np.asarray(t)
    n = _check_mode(t.ndim, n)
    return np.ascontiguousarray(np.moveaxis(t, n, 0)).reshape(t.shape[n], -1)


def fold(m: np.ndarray, n: int, dims) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of shape ``dims``."""
    dims = tuple(int(d) for d in dims)
    n = _check_mode(len(dims), n)
    m = np.asarray(m)
    size = int(np.prod(dims, dtype=np.int64))
    if m.ndim != 2 or m.shape[0] != dims[n] or m.size != size:
        raise ValueError(f"matrix of shape {m.shape} cannot be folded along mode {n} into {dims}")
    moved = (dims[n],) + dims[:n] + dims[n + 1:]
    return np.ascontiguousarray(np.moveaxis(m.reshape(moved), 0, n))


def ttm(t: np.ndarray, u: np.ndarray, n: int, transpose: bool = False) -> np.ndarray:
    """Tensor-times-matrix product along mode ``n``.

    Computes ``fold(u @ unfold(t, n))`` (or with ``u.T`` when ``transpose`` is
    set).  ``u`` may be rectangular as long as its contracted side matches
    ``t.shape[n]``; the result takes the other side as its new extent.
    """
    t = np.asarray(t)
    n = _check_mode(t.ndim, n)
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError("ttm needs a matrix")
    if transpose:
        u = u.T
    if u.shape[1] != t.shape[n]:
        raise ValueError(f"matrix of shape {u.shape} does not match extent {t.shape[n]} of mode {n}")
    out = np.tensordot(u, t, axes=(1, n))
    return np.ascontiguousarray(np.moveaxis(out, 0, n))


def ttm_ordered(t: np.ndarray, u: np.ndarray, n: int) -> np.ndarray:
    """Like :func:`ttm` but summing over the contracted index in a fixed order."""
    t = np.asarray(t, dtype=np.float64)
    n = _check_mode(t.ndim, n)
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != t.shape[n]:
        raise ValueError(f"matrix of shape {u.shape} does not match extent {t.shape[n]} of mode {n}")
    dims = list(t.shape)
    dims[n] = u.shape[0]
    return fold(ordered_matmul(u, unfold(t, n)), n, dims)


def frobenius_norm_sq(t: np.ndarray) -> float:
    t = np.asarray(t, dtype=np.float64).ravel()
    return float(np.dot(t, t))


def slice_norms(t: np.ndarray, n: int) -> np.ndarray:
    """Frobenius norm of every hyperslice of ``t`` along mode ``n``."""
    m = unfold(np.asarray(t, dtype=np.float64), n)
    return np.sqrt(np.einsum("ij,ij->i", m, m))
