"""Gram matrices and a sign-normalized symmetric eigendecomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenConvergenceError

RECONSTRUCTION_TOL = 1e-9


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray   # non-increasing
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]


def symmetrize(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {g.shape}")
    return 0.5 * (g + g.T)


def gram(m: np.ndarray) -> np.ndarray:
    """``m @ m.T``, made exactly symmetric."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("gram needs a matrix")
    return symmetrize(m @ m.T)


def normalize_signs(v: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive.

    Ties go to the lowest row index (``argmax`` semantics).
    """
    v = np.array(v, dtype=np.float64, copy=True)
    if v.size == 0:
        return v
    lead = np.argmax(np.abs(v), axis=0)
    flip = v[lead, np.arange(v.shape[1])] < 0
    v[:, flip] *= -1.0
    return v


def sym_eig(g: np.ndarray) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    Eigenvalues come back in non-increasing order and eigenvectors are
    sign-normalized, so identical input bytes give identical output bytes.
    The all-zero matrix maps to the identity basis.  Raises
    :class:`EigenConvergenceError` if LAPACK fails or the reconstruction
    misses ``1e-9 * max(1, ||g||_F)``.
    """
    g = symmetrize(g)
    order = g.shape[0]
    if not np.isfinite(g).all():
        raise ValueError("matrix has non-finite entries")
    if not g.any():
        return EigenDecomposition(np.zeros(order), np.eye(order))
    try:
        w, v = np.linalg.eigh(g)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"eigensolver did not converge: {exc}") from exc
    w = w[::-1].copy()
    v = normalize_signs(v[:, ::-1])
    scale = max(1.0, float(np.linalg.norm(g)))
    residual = float(np.linalg.norm((v * w) @ v.T - g))
    if not residual <= RECONSTRUCTION_TOL * scale:
        raise EigenConvergenceError(
            f"eigendecomposition residual {residual:.3e} exceeds tolerance", residual)
    return EigenDecomposition(w, v)


def psd_eig(g: np.ndarray) -> EigenDecomposition:
    """:func:`sym_eig` for Gram matrices: slightly negative eigenvalues clamp to zero."""
    dec = sym_eig(g)
    w = dec.eigenvalues
    tol = RECONSTRUCTION_TOL * max(1.0, float(np.linalg.norm(g)))
    if (w < -tol).any():
        raise EigenConvergenceError("Gram matrix has a significantly negative eigenvalue",
                                    float(-w.min()))
    return EigenDecomposition(np.maximum(w, 0.0), dec.eigenvectors)
