"""Filtering and decimation in the compressed domain.

Every operation here is a linear map applied to the rows of one factor
matrix; the core is never touched.  Reconstructing the modified
decomposition gives the same field as reconstructing first and then
applying the map along that mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hosvd import TuckerDecomposition


@dataclass(frozen=True)
class Keep:
    pass


@dataclass(frozen=True)
class Select:
    """Rows ``range(start, stop, stride)``, optionally in reverse order."""

    start: int
    stop: int
    stride: int = 1
    reversed: bool = False

    def indices(self, size: int) -> np.ndarray:
        if self.stride < 1:
            raise ValueError(f"stride must be at least 1, got {self.stride}")
        if not 0 <= self.start < self.stop <= size:
            raise ValueError(f"range {self.start}:{self.stop} is empty or outside extent {size}")
        idx = np.arange(self.start, self.stop, self.stride)
        return idx[::-1] if self.reversed else idx


DOWNSAMPLE, BOX, LANCZOS2 = "downsample", "box", "lanczos2"


@dataclass(frozen=True)
class Decimate:
    factor: int
    method: str = DOWNSAMPLE

    def __post_init__(self):
        if int(self.factor) != self.factor or self.factor < 2:
            raise ValueError(f"decimation factor must be an integer >= 2, got {self.factor}")
        if self.method not in (DOWNSAMPLE, BOX, LANCZOS2):
            raise ValueError(f"unknown decimation method {self.method!r}")


def lanczos2_window(x) -> np.ndarray:
    """Two-lobe Lanczos window ``sinc(x) sinc(x/2)`` on ``|x| < 2``, zero elsewhere."""
    x = np.asarray(x, dtype=np.float64)
    out = np.where(np.abs(x) < 2, np.sinc(x) * np.sinc(x / 2), 0.0)
    # np.sinc leaves rounding noise at the nonzero integers
    out[(x != 0) & (x == np.round(x))] = 0.0
    return out


def lanczos2_kernel(stretch: int) -> np.ndarray:
    """Taps ``w(x / stretch)`` for integer ``x`` in ``(-2 stretch, 2 stretch)``, unit sum."""
    if int(stretch) != stretch or stretch < 1:
        raise ValueError(f"stretch must be a positive integer, got {stretch}")
    k = int(stretch)
    taps = lanczos2_window(np.arange(-2 * k + 1, 2 * k) / k)
    while taps.size > 1 and taps[0] == 0 and taps[-1] == 0:
        taps = taps[1:-1]
    return taps / taps.sum()


def convolve_factor_columns(u: np.ndarray, kernel) -> np.ndarray:
    """Convolve every column of ``u`` with a centred odd-length kernel, clamping at the edges."""
    u = np.asarray(u, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 1 or kernel.size == 0:
        raise ValueError("kernel must be a nonempty vector")
    if kernel.size % 2 == 0:
        raise ValueError("kernel length must be odd")
    half = kernel.size // 2
    rows = np.arange(u.shape[0])
    out = np.zeros_like(u)
    for j, w in enumerate(kernel):
        if w != 0:
            out += w * u[np.clip(rows + half - j, 0, u.shape[0] - 1)]
    return out


def box_matrix(size: int, k: int) -> np.ndarray:
    """Averaging operator over consecutive groups of ``k``; the last group may be short."""
    groups = math.ceil(size / k)
    m = np.zeros((groups, size))
    for g in range(groups):
        lo, hi = g * k, min(size, (g + 1) * k)
        m[g, lo:hi] = 1.0 / (hi - lo)
    return m


def resample_rows(u: np.ndarray, entry) -> np.ndarray:
    """Apply one spec entry to the rows of ``u`` (works for factors and for plain arrays)."""
    size = u.shape[0]
    if isinstance(entry, Keep):
        return u
    if isinstance(entry, Select):
        return u[entry.indices(size)]
    if isinstance(entry, Decimate):
        k = int(entry.factor)
        if entry.method == DOWNSAMPLE:
            return u[::k]
        if entry.method == BOX:
            return np.tensordot(box_matrix(size, k), u, axes=(1, 0))
        flat = u.reshape(size, -1)
        return convolve_factor_columns(flat, lanczos2_kernel(k))[::k].reshape((-1,) + u.shape[1:])
    raise TypeError(f"not a resample entry: {entry!r}")


def _check_spec(spec, ndim: int):
    spec = tuple(spec)
    if len(spec) != ndim:
        raise ValueError(f"resample spec has {len(spec)} entries for {ndim} modes")
    return spec


def apply_resample(d: TuckerDecomposition, spec) -> TuckerDecomposition:
    """Resample the field ``d`` represents by rewriting factor rows only."""
    spec = _check_spec(spec, d.ndim)
    factors = [resample_rows(u, e) for u, e in zip(d.factors, spec)]
    return TuckerDecomposition(d.core, factors, d.slice_norm_table)


def resample_array(x: np.ndarray, spec) -> np.ndarray:
    """Apply the same spec directly to a reconstructed array, one mode at a time."""
    spec = _check_spec(spec, x.ndim)
    for n, e in enumerate(spec):
        x = np.moveaxis(resample_rows(np.moveaxis(x, n, 0), e), 0, n)
    return np.ascontiguousarray(x)


def _parse_entry(text: str, size: int):
    t = text.strip().lower()
    if t in ("-", ""):
        return Keep()
    for prefix, method in (("lanczos2x", LANCZOS2), ("box", BOX), ("down", DOWNSAMPLE)):
        if t.startswith(prefix):
            return Decimate(int(t[len(prefix):]), method)
    if ":" in t:
        parts = t.split(":")
        if len(parts) > 3:
            raise ValueError(f"bad range {text!r}")
        start, stop, step = (int(p) if p.strip() else None for p in parts + [""] * (3 - len(parts)))
        if step == 0:
            raise ValueError("range step cannot be 0")
        idx = np.arange(size)[slice(start, stop, step)]
        if idx.size == 0:
            raise ValueError(f"range {text!r} selects nothing from extent {size}")
        lo, hi = int(idx.min()), int(idx.max())
        return Select(lo, hi + 1, abs(step or 1), step is not None and step < 0)
    i = int(t)
    if i < 0:
        i += size
    if not 0 <= i < size:
        raise ValueError(f"index {text!r} outside extent {size}")
    return Select(i, i + 1)


def parse_resample_spec(text: str, dims) -> tuple:
    """Parse ``"-,10:50,::2,box2,lanczos2x2"`` style specs (one entry per mode)."""
    parts = text.split(",")
    if len(parts) != len(dims):
        raise ValueError(f"resample spec {text!r} has {len(parts)} entries for {len(dims)} modes")
    try:
        return tuple(_parse_entry(p, int(s)) for p, s in zip(parts, dims))
    except ValueError as exc:
        raise ValueError(f"bad resample spec {text!r}: {exc}") from None
