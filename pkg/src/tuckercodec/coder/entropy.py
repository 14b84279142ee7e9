"""Run-length coding of leading bits and the adaptive range coder behind it.

This is the pure-Python reference of the entropy layer.  The jitted kernels
in :mod:`tuckercodec.coder._jit` implement the same coder and model on
numpy state arrays and must stay byte-compatible with it.

Range coder: 32-bit range, 33-bit low with carry propagation through a
cached byte (LZMA style).  The decoder consumes exactly the bytes the
encoder produced.

Model: adaptive counts over symbols ``0..max_symbol`` plus an escape slot.
A symbol seen for the first time is sent as the escape, then its bit length
under a second adaptive model, then its bits below the leading one verbatim.  Counts are halved (dropping
symbols that reach zero) whenever the total exceeds ``MAX_TOTAL``.
"""

from __future__ import annotations

import numpy as np

from ..errors import CorruptStreamError

TOP = 1 << 24
MASK32 = 0xFFFFFFFF
MAX_TOTAL = 1 << 16
INCREMENT = 8
ESCAPE_INIT = 1
ESCAPE_INCREMENT = 4
RAW_CHUNK = 16
LENGTH_INIT = 1
LENGTH_INCREMENT = 16

# cost(freq, total) = LOG2_TABLE[total] - LOG2_TABLE[freq]; shared with the
# jitted path so both backends accumulate bit-identical costs.
LOG2_TABLE = np.log2(np.maximum(np.arange(2 * MAX_TOTAL + 4 * INCREMENT, dtype=np.float64), 1.0))


def raw_bits_for(max_symbol: int) -> int:
    return max(1, int(max_symbol).bit_length())


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = MASK32
        self.cache = 0
        self.cache_size = 1
        self.out = bytearray()
        self.used = False

    def encode(self, cum: int, freq: int, total: int) -> None:
        self.used = True
        r = self.range // total
        self.low += r * cum
        self.range = r * freq
        while self.range < TOP:
            self.range <<= 8
            self._shift_low()

    def encode_raw(self, value: int, nbits: int) -> None:
        while nbits > 0:
            take = min(RAW_CHUNK, nbits)
            nbits -= take
            self.encode((value >> nbits) & ((1 << take) - 1), 1, 1 << take)

    def _shift_low(self) -> None:
        if self.low < 0xFF000000 or self.low > MASK32:
            carry = self.low >> 32
            temp = self.cache
            while True:
                self.out.append((temp + carry) & 0xFF)
                temp = 0xFF
                self.cache_size -= 1
                if self.cache_size == 0:
                    break
            self.cache = (self.low >> 24) & 0xFF
        self.cache_size += 1
        self.low = (self.low & 0x00FFFFFF) << 8

    def finish(self) -> bytes:
        if not self.used:
            return b""
        for _ in range(5):
            self._shift_low()
        return bytes(self.out)


class RangeDecoder:
    def __init__(self, data: bytes):
        self.data = bytes(data)
        self.pos = 0
        self.range = MASK32
        self.code = 0
        self._r = 0
        for _ in range(5):
            self.code = (self.code << 8) | self._next_byte()
        if self.code > MASK32:
            raise CorruptStreamError("range coder stream has an invalid first byte")

    def _next_byte(self) -> int:
        if self.pos >= len(self.data):
            raise CorruptStreamError("arithmetic-coded payload is truncated")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def get_freq(self, total: int) -> int:
        self._r = self.range // total
        v = self.code // self._r
        if v >= total:
            raise CorruptStreamError("arithmetic-coded payload is inconsistent")
        return v

    def consume(self, cum: int, freq: int) -> None:
        self.code -= cum * self._r
        self.range = freq * self._r
        while self.range < TOP:
            self.code = (self.code << 8) | self._next_byte()
            self.range <<= 8

    def decode_raw(self, nbits: int) -> int:
        value = 0
        while nbits > 0:
            take = min(RAW_CHUNK, nbits)
            nbits -= take
            v = self.get_freq(1 << take)
            self.consume(v, 1)
            value = (value << take) | v
        return value

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.data)


class AdaptiveModel:
    """Escape-based adaptive frequency model over ``0..max_symbol``.

    Slot 0 is the escape; symbol ``v`` lives in slot ``v + 1``.  Cumulative
    counts come from a Fenwick tree so lookups stay logarithmic even when the
    alphabet is the full coefficient count of a block.
    """

    def __init__(self, max_symbol: int):
        if max_symbol < 0:
            raise ValueError("max_symbol must be nonnegative")
        self.max_symbol = int(max_symbol)
        self.raw_bits = raw_bits_for(max_symbol)
        self.nslots = self.max_symbol + 2
        self.tree = [0] * (self.nslots + 1)
        self.counts = {}
        self.total = 0
        self.reset()

    def reset(self) -> None:
        self.len_counts = [LENGTH_INIT] * (self.raw_bits + 1)
        self.len_total = LENGTH_INIT * (self.raw_bits + 1)
        for slot in self.counts:
            self._clear_path(slot)
        self.counts = {}
        self.total = 0
        self._add(0, ESCAPE_INIT)

    def _clear_path(self, slot: int) -> None:
        i = slot + 1
        tree, n = self.tree, self.nslots
        while i <= n:
            tree[i] = 0
            i += i & -i

    def _add(self, slot: int, delta: int) -> None:
        self.counts[slot] = self.counts.get(slot, 0) + delta
        self.total += delta
        i = slot + 1
        tree, n = self.tree, self.nslots
        while i <= n:
            tree[i] += delta
            i += i & -i

    def _prefix(self, slot: int) -> int:
        s = 0
        tree = self.tree
        while slot > 0:
            s += tree[slot]
            slot -= slot & -slot
        return s

    def _find(self, target: int) -> int:
        pos = 0
        tree, n = self.tree, self.nslots
        step = 1 << (n.bit_length() - 1)
        while step:
            nxt = pos + step
            if nxt <= n and tree[nxt] <= target:
                pos = nxt
                target -= tree[nxt]
            step >>= 1
        return pos

    def _halve(self) -> None:
        for slot in self.counts:
            self._clear_path(slot)
        old = self.counts
        self.counts = {}
        self.total = 0
        for slot, c in old.items():
            c >>= 1
            if slot == 0:
                c = max(c, 1)
            if c:
                self._add(slot, c)

    def _encode_escaped(self, enc: RangeEncoder, symbol: int) -> None:
        nb = symbol.bit_length()
        lc = self.len_counts
        enc.encode(sum(lc[:nb]), lc[nb], self.len_total)
        self._update_length(nb)
        if nb > 1:
            enc.encode_raw(symbol - (1 << (nb - 1)), nb - 1)

    def _decode_escaped(self, dec: RangeDecoder) -> int:
        lc = self.len_counts
        target = dec.get_freq(self.len_total)
        nb, cum = 0, 0
        while cum + lc[nb] <= target:
            cum += lc[nb]
            nb += 1
        dec.consume(cum, lc[nb])
        self._update_length(nb)
        if nb <= 1:
            return nb
        return (1 << (nb - 1)) + dec.decode_raw(nb - 1)

    def _update_length(self, nb: int) -> None:
        self.len_counts[nb] += LENGTH_INCREMENT
        self.len_total += LENGTH_INCREMENT
        if self.len_total > MAX_TOTAL:
            self.len_counts = [(c + 1) >> 1 for c in self.len_counts]
            self.len_total = sum(self.len_counts)

    def _update(self, slot: int, is_new: bool) -> None:
        self._add(slot, INCREMENT)
        if is_new:
            self._add(0, ESCAPE_INCREMENT)
        if self.total > MAX_TOTAL:
            self._halve()

    def _check(self, symbol: int) -> int:
        symbol = int(symbol)
        if not 0 <= symbol <= self.max_symbol:
            raise ValueError(f"symbol {symbol} outside 0..{self.max_symbol}")
        return symbol

    def cost(self, symbol: int) -> float:
        """Ideal code length in bits of ``symbol`` in the current state."""
        slot = self._check(symbol) + 1
        total = self.total
        if slot in self.counts:
            return float(LOG2_TABLE[total] - LOG2_TABLE[self.counts[slot]])
        nb = symbol.bit_length()
        mantissa = nb - 1 if nb > 1 else 0
        esc = LOG2_TABLE[total] - LOG2_TABLE[self.counts[0]]
        return float((esc + (LOG2_TABLE[self.len_total] - LOG2_TABLE[self.len_counts[nb]])) + mantissa)

    def observe(self, symbol: int) -> float:
        """Return the cost of ``symbol`` and update the model as the coder would."""
        symbol = self._check(symbol)
        c = self.cost(symbol)
        slot = symbol + 1
        if slot not in self.counts:
            self._update_length(symbol.bit_length())
            self._update(slot, True)
        else:
            self._update(slot, False)
        return c

    def encode(self, enc: RangeEncoder, symbol: int) -> float:
        symbol = self._check(symbol)
        c = self.cost(symbol)
        slot = symbol + 1
        total = self.total
        if slot in self.counts:
            enc.encode(self._prefix(slot), self.counts[slot], total)
            self._update(slot, False)
        else:
            enc.encode(0, self.counts[0], total)
            self._encode_escaped(enc, symbol)
            self._update(slot, True)
        return c

    def decode(self, dec: RangeDecoder) -> int:
        target = dec.get_freq(self.total)
        slot = self._find(target)
        freq = self.counts.get(slot, 0)
        if freq <= 0:
            raise CorruptStreamError("arithmetic-coded payload is inconsistent")
        dec.consume(self._prefix(slot), freq)
        if slot != 0:
            self._update(slot, False)
            return slot - 1
        symbol = self._decode_escaped(dec)
        if symbol > self.max_symbol or (symbol + 1) in self.counts:
            raise CorruptStreamError(f"escaped symbol {symbol} is invalid")
        self._update(symbol + 1, True)
        return symbol


def ac_encode(symbols, max_symbol: int | None = None) -> bytes:
    """Arithmetic-code ``symbols`` with a single adaptive model.

    ``max_symbol`` fixes the escape width; it defaults to the largest symbol
    and must then be passed to :func:`ac_decode` as well.
    """
    symbols = [int(s) for s in symbols]
    if max_symbol is None:
        max_symbol = max(symbols, default=0)
    model = AdaptiveModel(max_symbol)
    enc = RangeEncoder()
    for s in symbols:
        model.encode(enc, s)
    return enc.finish()


def ac_decode(data: bytes, n_symbols: int, max_symbol: int) -> list:
    if n_symbols == 0:
        if data:
            raise CorruptStreamError("payload present but no symbols expected")
        return []
    model = AdaptiveModel(max_symbol)
    dec = RangeDecoder(data)
    out = [model.decode(dec) for _ in range(n_symbols)]
    if not dec.exhausted:
        raise CorruptStreamError("trailing bytes after the last symbol")
    return out


def empirical_entropy_bits(symbols) -> float:
    """``sum_i f_i * log2(n / f_i)`` over the symbol histogram."""
    _, freq = np.unique(np.asarray(symbols), return_counts=True)
    n = freq.sum()
    return float(np.sum(freq * np.log2(n / freq))) if n else 0.0


def rle_zero_runs(column_bits, significant):
    """Split one bit-plane column into RLE symbols and verbatim bits.

    Bits of coefficients already in ``significant`` go to the verbatim list.
    The remaining bits form zero runs: a run of ``k`` zeros ended by a 1
    yields ``k``; a run reaching the column end yields its length (if
    nonzero).  A 1 makes its coefficient significant; ``significant`` is
    updated in place.  Returns ``(symbols, verbatim_bits, newly_significant)``.
    """
    symbols, verbatim, new = [], [], []
    run = 0
    for c, bit in enumerate(column_bits):
        bit = int(bit)
        if significant[c]:
            verbatim.append(bit)
        elif bit:
            symbols.append(run)
            run = 0
            new.append(c)
        else:
            run += 1
    if run:
        symbols.append(run)
    for c in new:
        significant[c] = True
    return symbols, verbatim, new


def rle_expand(symbols, significant_before, n_positions: int):
    """Inverse of :func:`rle_zero_runs` for the non-significant positions.

    Returns the indices (among ``0..n_positions-1``) whose bit is 1.
    """
    free = [c for c in range(n_positions) if not significant_before[c]]
    ones = []
    pos = 0
    it = iter(symbols)
    while pos < len(free):
        try:
            k = next(it)
        except StopIteration:
            raise CorruptStreamError("run-length stream ended early") from None
        if pos + k > len(free):
            raise CorruptStreamError("run length overruns the column")
        pos += k
        if pos < len(free):
            ones.append(free[pos])
            pos += 1
    if next(it, None) is not None:
        raise CorruptStreamError("unused run-length symbols")
    return ones
