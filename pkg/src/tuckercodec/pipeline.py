"""Compression and decompression drivers."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .coder.bitplane import CoreSse, FactorAlpha, decode_block, encode_block, scale_block
from .container import SAMPLE_DTYPES, CompressedContainer, sample_type_of
from .errors import DegenerateInputError
from .hosvd import TuckerDecomposition, hosvd_forward, hosvd_inverse
from .tensor import as_tensor, frobenius_norm_sq


@dataclass(frozen=True)
class ErrorTarget:
    """Requested accuracy: ``kind`` is ``"eps"`` (relative), ``"rmse"`` or ``"psnr"``."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("eps", "rmse", "psnr"):
            raise ValueError(f"unknown error target kind {self.kind!r}")
        v = float(self.value)
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"{self.kind} target must be a positive number, got {self.value!r}")
        if self.kind == "eps" and v >= 1:
            raise ValueError("relative error target must lie in (0, 1)")

    @classmethod
    def relative(cls, eps):
        return cls("eps", eps)

    @classmethod
    def rmse(cls, value):
        return cls("rmse", value)

    @classmethod
    def psnr(cls, db):
        return cls("psnr", db)

    @classmethod
    def parse(cls, text: str) -> "ErrorTarget":
        """Parse the short form used on the command line: ``e0.01``, ``r0.5``, ``p40``."""
        kinds = {"e": "eps", "r": "rmse", "p": "psnr"}
        text = text.strip()
        if len(text) < 2 or text[0] not in kinds:
            raise ValueError(f"cannot parse error target {text!r}")
        try:
            value = float(text[1:])
        except ValueError:
            raise ValueError(f"cannot parse error target {text!r}") from None
        return cls(kinds[text[0]], value)

    def __str__(self):
        return {"eps": "e", "rmse": "r", "psnr": "p"}[self.kind] + f"{self.value:g}"


def target_to_sse(target: ErrorTarget, norm_sq: float, count: int, value_range: float) -> float:
    """Convert an error target to a sum-of-squared-errors budget."""
    if norm_sq < 0 or count < 1 or value_range < 0:
        raise ValueError("norm_sq and value_range must be nonnegative, count positive")
    if target.kind == "eps":
        return target.value ** 2 * norm_sq
    if target.kind == "rmse":
        return target.value ** 2 * count
    if value_range == 0:
        raise DegenerateInputError("a PSNR target needs data with a nonzero value range")
    return (value_range / (2.0 * 10.0 ** (target.value / 20.0))) ** 2 * count


@dataclass(frozen=True)
class ErrorMetrics:
    eps: float
    rmse: float
    psnr: float
    maxerr: float


def metrics(original, reconstructed) -> ErrorMetrics:
    """Relative error, RMSE, PSNR (range of ``original``) and max abs error."""
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(reconstructed, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = (a - b).ravel()
    sse = float(np.dot(diff, diff))
    norm = math.sqrt(frobenius_norm_sq(a))
    err = math.sqrt(sse)
    if err == 0:
        return ErrorMetrics(0.0, 0.0, math.inf, 0.0)
    eps = err / norm if norm > 0 else math.inf
    rmse = err / math.sqrt(a.size)
    value_range = float(a.max() - a.min())
    psnr = 20.0 * math.log10(value_range / (2.0 * rmse)) if value_range > 0 else -math.inf
    return ErrorMetrics(eps, rmse, psnr, float(np.abs(diff).max()))


@dataclass(frozen=True)
class CompressReport:
    sse_target: float
    core_alpha: float
    t_transform: float
    t_coding: float

    @property
    def t_total(self) -> float:
        return self.t_transform + self.t_coding


def encode_core(core: np.ndarray, sse: float):
    """Bit-plane code the flattened core down to ``sse`` (real units).

    Returns ``(block, alpha)`` where ``alpha`` is the final SSE reduction per
    compressed bit in real units, the budget handed to the factors.
    """
    scaled = scale_block(core.ravel())
    s_int = math.ldexp(sse, 2 * (63 - scaled.scale_exponent))
    block, _, alpha_int = encode_block(scaled, CoreSse(s_int))
    return block, math.ldexp(alpha_int, 2 * (scaled.scale_exponent - 63))


def encode_factor(u: np.ndarray, norms: np.ndarray, alpha: float):
    """Code ``u`` with column ``j`` weighted by ``norms[j]``, stopping at ``alpha``."""
    scaled = scale_block((u * norms[None, :]).ravel())
    thr = math.ldexp(alpha, 2 * (63 - scaled.scale_exponent)) if math.isfinite(alpha) else alpha
    block, _, _ = encode_block(scaled, FactorAlpha(thr))
    return block


def decode_factor(block, norms: np.ndarray) -> np.ndarray:
    size = norms.size
    w = decode_block(block).reshape(size, size)
    u = np.zeros_like(w)
    nz = norms > 0
    u[:, nz] = w[:, nz] / norms[nz]
    return u


def compress_report(t, target: ErrorTarget, sample_type: str | None = None):
    """Compress ``t`` to meet ``target``; returns ``(container, report)``."""
    raw = np.asarray(t)
    if sample_type is None:
        sample_type = sample_type_of(raw.dtype)
    if sample_type not in SAMPLE_DTYPES:
        raise ValueError(f"unknown sample type {sample_type!r}")
    x = as_tensor(raw)
    if not np.isfinite(x).all():
        raise ValueError("input contains NaN or infinite values")
    lo, hi = float(x.min()), float(x.max())
    sse = target_to_sse(target, frobenius_norm_sq(x), x.size, hi - lo)

    t0 = time.perf_counter()
    d = hosvd_forward(x)
    t1 = time.perf_counter()
    core_block, alpha = encode_core(d.core, sse)
    factor_blocks = [encode_factor(u, s, alpha) for u, s in zip(d.factors, d.slice_norm_table)]
    t2 = time.perf_counter()

    container = CompressedContainer(x.shape, sample_type, lo, hi, core_block,
                                    [s.copy() for s in d.slice_norm_table], factor_blocks)
    return container, CompressReport(sse, alpha, t1 - t0, t2 - t1)


def compress(t, target: ErrorTarget, sample_type: str | None = None) -> CompressedContainer:
    return compress_report(t, target, sample_type)[0]


def decode_decomposition(c: CompressedContainer) -> TuckerDecomposition:
    """Decode the core and the unweighted factors without reconstructing."""
    factors = [decode_factor(b, s) for b, s in zip(c.factors, c.slice_norms)]
    core = decode_block(c.core).reshape(c.dims)
    return TuckerDecomposition(core, factors, [np.asarray(s) for s in c.slice_norms])


def cast_samples(x: np.ndarray, sample_type: str) -> np.ndarray:
    """Convert reconstructed values to ``sample_type``.

    Integer types round half away from zero and clamp to the type's range.
    """
    dtype = SAMPLE_DTYPES[sample_type]
    if dtype.kind == "f":
        return x.astype(dtype)
    info = np.iinfo(dtype)
    r = np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))
    return np.clip(r, info.min, info.max).astype(dtype)


def decompress(c: CompressedContainer, resample=None, cast: bool = True) -> np.ndarray:
    """Reconstruct the tensor, optionally resampled in the compressed domain."""
    d = decode_decomposition(c)
    if resample is not None:
        from .resample import apply_resample
        d = apply_resample(d, resample)
    x = hosvd_inverse(d, skip_zero_slices=True)
    return cast_samples(x, c.sample_type) if cast else x
