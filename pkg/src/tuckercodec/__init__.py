"""Lossy compression of N-dimensional gridded data.

A full-core HOSVD concentrates the signal in a few core coefficients; the
core and the factor matrices are then bit-plane coded until an error budget
is met.  See :func:`compress` and :func:`decompress`.
"""

from ._backend import BACKEND
from .container import CompressedContainer
from .errors import (
    CodecError,
    CorruptStreamError,
    DegenerateInputError,
    EigenConvergenceError,
    FormatVersionError,
)
from .hosvd import TuckerDecomposition, hosvd_forward, hosvd_inverse
from .pipeline import ErrorMetrics, ErrorTarget, compress, compress_report, decompress, metrics
from .resample import Decimate, Keep, Select, apply_resample, parse_resample_spec

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CompressedContainer", "CodecError", "CorruptStreamError", "DegenerateInputError",
    "EigenConvergenceError", "FormatVersionError", "TuckerDecomposition", "hosvd_forward",
    "hosvd_inverse", "ErrorMetrics", "ErrorTarget", "compress", "compress_report", "decompress",
    "metrics", "Decimate", "Keep", "Select", "apply_resample", "parse_resample_spec",
]
