from .bitplane import (
    CoreSse,
    EncodedBlock,
    FactorAlpha,
    ScaledBlock,
    decode_block,
    encode_block,
    scale_block,
)
from .entropy import ac_decode, ac_encode, empirical_entropy_bits, rle_expand, rle_zero_runs

__all__ = [
    "CoreSse", "EncodedBlock", "FactorAlpha", "ScaledBlock", "decode_block", "encode_block",
    "scale_block", "ac_decode", "ac_encode", "empirical_entropy_bits", "rle_expand", "rle_zero_runs",
]
