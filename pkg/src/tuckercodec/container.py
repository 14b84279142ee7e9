"""On-disk container: header, core block, then slice norms and factor block per mode.

All fields little-endian::

    "HCT1" | version u8 | sample type u8 | N u8 | dims N x u32
    | data_min f64 | data_max f64 | core block
    | for each mode: I_n x f64 slice norms, factor block
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .coder.bitplane import EncodedBlock
from .errors import CorruptStreamError, FormatVersionError

MAGIC = b"HCT1"
VERSION = 1

SAMPLE_TYPES = {"u8": 0, "u16": 1, "i32": 2, "f32": 3, "f64": 4}
SAMPLE_DTYPES = {
    "u8": np.dtype("u1"),
    "u16": np.dtype("<u2"),
    "i32": np.dtype("<i4"),
    "f32": np.dtype("<f4"),
    "f64": np.dtype("<f8"),
}
_CODE_TO_TYPE = {v: k for k, v in SAMPLE_TYPES.items()}


def sample_type_of(dtype) -> str:
    dtype = np.dtype(dtype)
    for name, dt in SAMPLE_DTYPES.items():
        if dt.kind == dtype.kind and dt.itemsize == dtype.itemsize:
            return name
    return "f64"


@dataclass
class CompressedContainer:
    dims: tuple
    sample_type: str
    data_min: float
    data_max: float
    core: EncodedBlock
    slice_norms: list = field(default_factory=list)
    factors: list = field(default_factory=list)
    version: int = VERSION

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if self.sample_type not in SAMPLE_TYPES:
            raise ValueError(f"unknown sample type {self.sample_type!r}")
        if not 1 <= len(self.dims) <= 255:
            raise ValueError("container supports 1 to 255 dimensions")
        if self.core.count != int(np.prod(self.dims, dtype=np.int64)):
            raise ValueError("core block size does not match the dimensions")
        if len(self.slice_norms) != len(self.dims) or len(self.factors) != len(self.dims):
            raise ValueError("need one slice-norm vector and one factor block per mode")
        for n, (size, norms, fac) in enumerate(zip(self.dims, self.slice_norms, self.factors)):
            if np.asarray(norms).shape != (size,) or fac.count != size * size:
                raise ValueError(f"mode {n}: slice norms or factor block have the wrong size")

    def to_bytes(self) -> bytes:
        parts = [
            MAGIC,
            struct.pack("<BBB", self.version, SAMPLE_TYPES[self.sample_type], len(self.dims)),
            struct.pack(f"<{len(self.dims)}I", *self.dims),
            struct.pack("<dd", self.data_min, self.data_max),
            self.core.to_bytes(),
        ]
        for norms, fac in zip(self.slice_norms, self.factors):
            parts.append(np.asarray(norms, dtype="<f8").tobytes())
            parts.append(fac.to_bytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data) -> "CompressedContainer":
        buf = memoryview(data)
        if len(buf) < 7 or bytes(buf[:4]) != MAGIC:
            raise CorruptStreamError("not a compressed container (bad magic)")
        version, code, ndim = struct.unpack_from("<BBB", buf, 4)
        if version != VERSION:
            raise FormatVersionError(f"unsupported container version {version}")
        if code not in _CODE_TO_TYPE:
            raise CorruptStreamError(f"unknown sample type code {code}")
        if ndim == 0:
            raise CorruptStreamError("container declares zero dimensions")
        off = 7
        need = off + 4 * ndim + 16
        if len(buf) < need:
            raise CorruptStreamError("container header is truncated")
        dims = struct.unpack_from(f"<{ndim}I", buf, off)
        off += 4 * ndim
        dmin, dmax = struct.unpack_from("<dd", buf, off)
        off += 16
        if any(d == 0 for d in dims):
            raise CorruptStreamError("container declares an empty dimension")
        core, off = EncodedBlock.from_bytes(buf, off)
        norms, factors = [], []
        for size in dims:
            nbytes = 8 * size
            if off + nbytes > len(buf):
                raise CorruptStreamError("slice norms are truncated")
            norms.append(np.frombuffer(buf[off:off + nbytes], dtype="<f8").astype(np.float64))
            off += nbytes
            fac, off = EncodedBlock.from_bytes(buf, off)
            factors.append(fac)
        if off != len(buf):
            raise CorruptStreamError(f"{len(buf) - off} trailing bytes after the container")
        try:
            return cls(dims, _CODE_TO_TYPE[code], dmin, dmax, core, norms, factors, version)
        except ValueError as exc:
            raise CorruptStreamError(str(exc)) from exc
