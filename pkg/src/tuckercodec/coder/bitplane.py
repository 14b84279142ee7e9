"""Greedy bit-plane coding of a flat block of real coefficients.

Magnitudes are scaled so the largest lands in ``[2**63, 2**64)`` and are
sent plane by plane from the most significant bit, coefficients in index
order.  Leading bits (a coefficient's first 1 and the zeros before it) are
run-length coded and arithmetic coded; trailing bits and signs go to a
verbatim bit stream.  Coding stops at the first (plane, coefficient) where
the stop rule fires, and that breakpoint is stored with the block.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import CorruptStreamError
from . import kernels
from .entropy import LOG2_TABLE

PLANES = 64


@dataclass(frozen=True)
class ScaledBlock:
    magnitudes: np.ndarray  # uint64
    negative: np.ndarray    # bool
    scale_exponent: int

    @property
    def count(self) -> int:
        return self.magnitudes.size

    @property
    def empty(self) -> bool:
        return not self.magnitudes.any()

    def sse_units(self) -> float:
        """Size of one squared integer step in the real domain."""
        return math.ldexp(1.0, 2 * (self.scale_exponent - 63))


@dataclass(frozen=True)
class CoreSse:
    """Stop once the running SSE (scaled-integer units) is at most ``sse``."""
    sse: float


@dataclass(frozen=True)
class FactorAlpha:
    """Code whole planes until one yields at most ``alpha_threshold`` SSE reduction per bit.

    The ratio is taken over the complete plane; partial-plane estimates are
    dominated by the first few coefficients and stop far too early.  Planes
    without any 1-bit are skipped rather than read as a zero ratio.
    """
    alpha_threshold: float


def scale_block(values) -> ScaledBlock:
    v = np.asarray(values, dtype=np.float64).ravel()
    if not np.isfinite(v).all():
        raise ValueError("block contains NaN or infinite values")
    a = np.abs(v)
    m = float(a.max()) if a.size else 0.0
    if m == 0.0:
        return ScaledBlock(np.zeros(v.size, np.uint64), np.zeros(v.size, bool), 0)
    e = math.frexp(m)[1] - 1
    mags = np.ldexp(a, 63 - e).astype(np.uint64)
    return ScaledBlock(mags, np.signbit(v) & (mags > 0), e)


@dataclass(frozen=True)
class EncodedBlock:
    scale_exponent: int
    count: int
    ac_payload: bytes
    verbatim: bytes
    verbatim_bits: int
    plane: int        # breakpoint plane P
    coefficient: int  # coefficients coded within plane P
    total_coded_bits: int

    @property
    def nothing_coded(self) -> bool:
        return self.plane == 63 and self.coefficient == 0

    _HEAD = struct.Struct("<hQBQ")

    def to_bytes(self) -> bytes:
        return b"".join([
            self._HEAD.pack(self.scale_exponent, self.count, self.plane, self.coefficient),
            struct.pack("<Q", len(self.ac_payload)), self.ac_payload,
            struct.pack("<Q", self.verbatim_bits), self.verbatim,
            struct.pack("<Q", self.total_coded_bits),
        ])

    @classmethod
    def from_bytes(cls, buf, offset: int = 0):
        """Parse one block at ``offset``; returns ``(block, next_offset)``."""
        buf = memoryview(buf)

        def take(n):
            nonlocal offset
            if offset + n > len(buf):
                raise CorruptStreamError("block is truncated")
            out = bytes(buf[offset:offset + n])
            offset += n
            return out

        e, count, plane, coef = cls._HEAD.unpack(take(cls._HEAD.size))
        (nac,) = struct.unpack("<Q", take(8))
        ac = take(nac)
        (nbits,) = struct.unpack("<Q", take(8))
        verb = take((nbits + 7) // 8)
        (total,) = struct.unpack("<Q", take(8))
        if plane >= PLANES or coef > count or (coef == 0 and plane != 63):
            raise CorruptStreamError(f"invalid breakpoint ({plane}, {coef}) for {count} coefficients")
        if total != coded_positions(count, plane, coef):
            raise CorruptStreamError("coded bit count disagrees with the breakpoint")
        return cls(e, count, ac, verb, nbits, plane, coef, total), offset


def coded_positions(count: int, plane: int, coefficient: int) -> int:
    return (63 - plane) * count + coefficient


def encode_block(block: ScaledBlock, stop):
    """Encode ``block`` until ``stop`` fires.

    Returns ``(encoded, achieved_sse, final_alpha)``; both figures are in
    scaled-integer units and ``achieved_sse`` is measured before the
    decoder's rounding correction.
    """
    C = block.count
    if block.empty:
        enc = EncodedBlock(0, C, b"", b"", 0, 63, 0, 0)
        return enc, 0.0, math.inf
    if isinstance(stop, CoreSse):
        is_core, thr = True, float(stop.sse)
    elif isinstance(stop, FactorAlpha):
        is_core, thr = False, float(stop.alpha_threshold)
    else:
        raise TypeError(f"unknown stop rule {stop!r}")
    if math.isnan(thr) or thr < 0:
        raise ValueError("stop threshold must be a nonnegative number")
    if is_core and thr == 0:
        # a zero residual still gets the midpoint correction, so only
        # coding through plane 0 is exact
        thr = -math.inf
    payload, verb, plane, coef, sse, alpha, _ = kernels.encode_planes(
        block.magnitudes, block.negative, is_core, thr, LOG2_TABLE)
    enc = EncodedBlock(
        scale_exponent=block.scale_exponent,
        count=C,
        ac_payload=payload.tobytes(),
        verbatim=np.packbits(verb).tobytes(),
        verbatim_bits=int(verb.size),
        plane=int(plane),
        coefficient=int(coef),
        total_coded_bits=coded_positions(C, int(plane), int(coef)),
    )
    return enc, float(sse), float(alpha)


def decode_magnitudes(enc: EncodedBlock):
    """Replay the plane schedule: ``(magnitudes, negative, significant, digest)``."""
    verb = np.unpackbits(np.frombuffer(enc.verbatim, dtype=np.uint8), count=enc.verbatim_bits)
    data = np.frombuffer(enc.ac_payload, dtype=np.uint8)
    try:
        return kernels.decode_planes(data, verb, enc.count, enc.plane, enc.coefficient)
    except CorruptStreamError:
        raise
    except (ValueError, IndexError) as exc:
        raise CorruptStreamError(str(exc)) from exc


def rounding_offsets(count: int, plane: int, coefficient: int) -> np.ndarray:
    """Midpoint correction ``2**(q-1)`` for a coefficient last coded at plane ``q``."""
    q = np.full(count, plane + 1, dtype=np.int64)
    q[:coefficient] = plane
    out = np.zeros(count, dtype=np.uint64)
    pos = (q > 0) & (q < PLANES)
    out[pos] = np.left_shift(np.uint64(1), (q[pos] - 1).astype(np.uint64))
    return out


def decode_block(enc: EncodedBlock) -> np.ndarray:
    if enc.nothing_coded:
        if enc.ac_payload or enc.verbatim_bits:
            raise CorruptStreamError("payload present in a block with nothing coded")
        return np.zeros(enc.count)
    mag, negative, sig, _ = decode_magnitudes(enc)
    mag = mag + np.where(sig, rounding_offsets(enc.count, enc.plane, enc.coefficient), np.uint64(0))
    out = np.ldexp(mag.astype(np.float64), enc.scale_exponent - 63)
    out[negative] *= -1.0
    return out
