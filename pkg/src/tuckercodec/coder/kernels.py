"""Bit-plane kernels of the selected backend (see :mod:`tuckercodec._backend`)."""

from .._backend import BACKEND, DISABLE_ENV

if BACKEND == "numba":
    from ._jit import ac_decode_symbols, ac_encode_symbols, decode_planes, encode_planes
else:
    from ._numpy import ac_decode_symbols, ac_encode_symbols, decode_planes, encode_planes

__all__ = ["BACKEND", "DISABLE_ENV", "encode_planes", "decode_planes",
           "ac_encode_symbols", "ac_decode_symbols"]
