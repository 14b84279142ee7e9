"""Full (non-truncated) HOSVD and its inverse."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import gram, psd_eig
from .tensor import as_tensor, fold, slice_norms, ttm_ordered, unfold


@dataclass
class TuckerDecomposition:
    core: np.ndarray
    factors: list = field(default_factory=list)
    slice_norm_table: list = field(default_factory=list)

    @property
    def ndim(self) -> int:
        return self.core.ndim

    @property
    def shape(self) -> tuple:
        """Shape of the tensor this decomposition reconstructs."""
        return tuple(u.shape[0] for u in self.factors)


def hosvd_forward(t) -> TuckerDecomposition:
    """Decompose ``t`` into a full core and square orthogonal factors.

    Modes are processed in ascending order; each Gram matrix is taken from
    the partially projected tensor of the previous step.
    """
    t = as_tensor(t)
    dims = t.shape
    if not t.any():
        core = np.zeros(dims)
        return TuckerDecomposition(core, [np.eye(i) for i in dims], [np.zeros(i) for i in dims])
    b = t.copy()
    factors = []
    for n, size in enumerate(dims):
        bn = unfold(b, n)
        u = psd_eig(gram(bn)).eigenvectors
        factors.append(u)
        b = fold(u.T @ bn, n, dims)
    norms = [slice_norms(b, n) for n in range(b.ndim)]
    return TuckerDecomposition(b, factors, norms)


def nonzero_slices(core: np.ndarray, n: int) -> np.ndarray:
    """Indices of the core slices along mode ``n`` holding any nonzero entry."""
    axes = tuple(a for a in range(core.ndim) if a != n)
    return np.flatnonzero(np.any(core != 0, axis=axes) if axes else core != 0)


def hosvd_inverse(d: TuckerDecomposition, skip_zero_slices: bool = True) -> np.ndarray:
    """Reconstruct ``core x_1 U1 x_2 ... x_N UN``.

    With ``skip_zero_slices`` the all-zero core slices (and the matching
    factor columns) are dropped before the products.
    """
    core = np.asarray(d.core, dtype=np.float64)
    if len(d.factors) != core.ndim:
        raise ValueError(f"{len(d.factors)} factors for a {core.ndim}-dimensional core")
    factors = [np.asarray(u, dtype=np.float64) for u in d.factors]
    for n, u in enumerate(factors):
        if u.ndim != 2 or u.shape[1] != core.shape[n]:
            raise ValueError(f"factor {n} of shape {u.shape} does not match core extent {core.shape[n]}")
    if skip_zero_slices:
        keep = [nonzero_slices(core, n) for n in range(core.ndim)]
        if any(k.size == 0 for k in keep):
            return np.zeros(tuple(u.shape[0] for u in factors))
        if any(k.size < s for k, s in zip(keep, core.shape)):
            core = core[np.ix_(*keep)]
            factors = [u[:, k] for u, k in zip(factors, keep)]
    out = core
    for n, u in enumerate(factors):
        out = ttm_ordered(out, u, n)
    return out
