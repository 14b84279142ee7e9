import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import zero_runs
from tuckercodec.coder.entropy import (
    AdaptiveModel,
    RangeDecoder,
    RangeEncoder,
    ac_decode,
    ac_encode,
    empirical_entropy_bits,
    rle_expand,
    rle_zero_runs,
)
from tuckercodec.errors import CorruptStreamError


def _bits(s):
    return [int(ch) for ch in s]


@pytest.mark.parametrize("text,expect", [
    ("01110001", [1, 0, 0, 3]),
    ("0000", [4]),
    ("1111", [0, 0, 0, 0]),
    ("", []),
])
def test_rle_examples(text, expect):
    sig = np.zeros(len(text), bool)
    symbols, verbatim, new = rle_zero_runs(_bits(text), sig)
    assert symbols == expect
    assert verbatim == []
    assert new == [i for i, ch in enumerate(text) if ch == "1"]
    assert sig.sum() == text.count("1")


def test_rle_routes_significant_bits_verbatim():
    sig = np.array([True, False, False, True, False])
    symbols, verbatim, new = rle_zero_runs([1, 0, 1, 0, 0], sig)
    assert verbatim == [1, 0]
    assert symbols == [1, 1]
    assert new == [2]
    np.testing.assert_array_equal(sig, [True, False, True, True, False])


@given(st.lists(st.booleans(), max_size=200), st.lists(st.booleans(), max_size=200))
@settings(max_examples=200, deadline=None)
def test_rle_roundtrip_and_oracle(bits, mask):
    mask = (mask + [False] * len(bits))[:len(bits)]
    before = np.array(mask, dtype=bool)
    sig = before.copy()
    symbols, verbatim, new = rle_zero_runs(bits, sig)
    free_bits = [b for b, m in zip(bits, mask) if not m]
    assert symbols == zero_runs(free_bits)
    assert verbatim == [int(b) for b, m in zip(bits, mask) if m]
    assert rle_expand(symbols, before, len(bits)) == new


def test_rle_expand_rejects_bad_streams():
    with pytest.raises(CorruptStreamError):
        rle_expand([5], np.zeros(3, bool), 3)
    with pytest.raises(CorruptStreamError):
        rle_expand([0], np.zeros(3, bool), 3)
    with pytest.raises(CorruptStreamError):
        rle_expand([3, 0], np.zeros(3, bool), 3)


def test_ac_empty():
    assert ac_encode([]) == b""
    assert ac_decode(b"", 0, 10) == []
    with pytest.raises(CorruptStreamError):
        ac_decode(b"\x00", 0, 10)


def test_ac_constant_stream_is_tiny():
    data = ac_encode([5] * 1000, max_symbol=255)
    assert len(data) <= 100
    assert ac_decode(data, 1000, 255) == [5] * 1000


def test_ac_uniform_is_incompressible(rng):
    sym = rng.integers(0, 256, 1000)
    data = ac_encode(sym, max_symbol=255)
    assert len(data) >= 950
    assert ac_decode(data, 1000, 255) == list(sym)


@given(st.lists(st.integers(0, 5000), max_size=300), st.integers(0, 3000))
@settings(max_examples=150, deadline=None)
def test_ac_roundtrip(symbols, extra):
    top = max(symbols, default=0) + extra
    assert ac_decode(ac_encode(symbols, top), len(symbols), top) == symbols


def test_ac_halving_path(rng):
    # long, skewed stream forces several count halvings
    sym = np.minimum(rng.geometric(0.3, 40000) - 1, 60)
    data = ac_encode(sym, 100)
    assert ac_decode(data, len(sym), 100) == list(sym)


def test_ac_truncated_and_trailing(rng):
    sym = list(rng.integers(0, 40, 500))
    data = ac_encode(sym, 63)
    with pytest.raises(CorruptStreamError):
        ac_decode(data[:-8], 500, 63)
    with pytest.raises(CorruptStreamError):
        ac_decode(data + b"\x00", 500, 63)


def test_symbol_out_of_range():
    model = AdaptiveModel(10)
    with pytest.raises(ValueError):
        model.encode(RangeEncoder(), 11)
    with pytest.raises(ValueError):
        model.observe(-1)


def test_observe_matches_encode_cost(rng):
    sym = np.minimum(rng.geometric(0.05, 3000) - 1, 900)
    a, b = AdaptiveModel(1000), AdaptiveModel(1000)
    enc = RangeEncoder()
    for s in sym:
        assert a.observe(int(s)) == b.encode(enc, int(s))


def test_raw_bits_roundtrip(rng):
    enc = RangeEncoder()
    vals = [(int(rng.integers(0, 1 << 16)), 16) for _ in range(50)] + [(1, 1), (0, 3)]
    for v, n in vals:
        enc.encode_raw(v, n)
    dec = RangeDecoder(enc.finish())
    assert [dec.decode_raw(n) for _, n in vals] == [v for v, _ in vals]


def test_empirical_entropy():
    assert empirical_entropy_bits([1, 1, 1]) == 0
    assert empirical_entropy_bits([0, 1, 2, 3]) == pytest.approx(8.0)
    assert empirical_entropy_bits([]) == 0
