"""Jitted bit-plane kernels.

Scalar-loop twins of :mod:`tuckercodec.coder._numpy`.  The range coder and
the adaptive model are re-expressed on int64 state arrays; they must stay
byte-compatible with :mod:`tuckercodec.coder.entropy`.  Every integer that
meets a ``uint64`` is kept ``uint64`` (numba promotes mixed int64/uint64
arithmetic to float).
"""

import math

import numpy as np
from numba import njit

from .entropy import (
    ESCAPE_INCREMENT,
    ESCAPE_INIT,
    INCREMENT,
    LENGTH_INCREMENT,
    LENGTH_INIT,
    MASK32,
    MAX_TOTAL,
    RAW_CHUNK,
    TOP,
)

# range-encoder state slots
_LOW, _RANGE, _CACHE, _CACHE_SIZE, _USED, _NOUT = 0, 1, 2, 3, 4, 5
# range-decoder state slots
_CODE, _DRANGE, _POS, _R = 0, 1, 2, 3
# model meta slots
_NTOUCH, _TOTAL, _LEN_TOTAL = 0, 1, 2


@njit(cache=True)
def _bit_length(v):
    n = 0
    while v > 0:
        n += 1
        v >>= 1
    return n


@njit(cache=True)
def _grow(buf, n):
    if n < buf.size:
        return buf
    out = np.empty(max(2 * buf.size, n + 1), np.uint8)
    out[: buf.size] = buf
    return out


# --- range encoder ---------------------------------------------------------

@njit(cache=True)
def _put(buf, rc, byte):
    n = rc[_NOUT]
    buf = _grow(buf, n)
    buf[n] = byte
    rc[_NOUT] = n + 1
    return buf


@njit(cache=True)
def _shift_low(buf, rc):
    low = rc[_LOW]
    if low < 0xFF000000 or low > MASK32:
        carry = low >> 32
        temp = rc[_CACHE]
        while True:
            buf = _put(buf, rc, (temp + carry) & 0xFF)
            temp = 0xFF
            rc[_CACHE_SIZE] -= 1
            if rc[_CACHE_SIZE] == 0:
                break
        rc[_CACHE] = (low >> 24) & 0xFF
    rc[_CACHE_SIZE] += 1
    rc[_LOW] = (low & 0x00FFFFFF) << 8
    return buf


@njit(cache=True)
def _rc_encode(buf, rc, cum, freq, total):
    rc[_USED] = 1
    r = rc[_RANGE] // total
    rc[_LOW] += r * cum
    rng = r * freq
    while rng < TOP:
        rng <<= 8
        buf = _shift_low(buf, rc)
    rc[_RANGE] = rng
    return buf


@njit(cache=True)
def _rc_encode_raw(buf, rc, value, nbits):
    while nbits > 0:
        take = min(RAW_CHUNK, nbits)
        nbits -= take
        buf = _rc_encode(buf, rc, (value >> nbits) & ((1 << take) - 1), 1, 1 << take)
    return buf


@njit(cache=True)
def _rc_finish(buf, rc):
    if rc[_USED] == 0:
        return np.empty(0, np.uint8)
    for _ in range(5):
        buf = _shift_low(buf, rc)
    return buf[: rc[_NOUT]].copy()


# --- range decoder ---------------------------------------------------------

@njit(cache=True)
def _rc_next(data, dc):
    pos = dc[_POS]
    if pos >= data.size:
        raise ValueError("arithmetic-coded payload is truncated")
    dc[_POS] = pos + 1
    return np.int64(data[pos])


@njit(cache=True)
def _rc_init(data, dc):
    dc[_DRANGE] = MASK32
    dc[_POS] = 0
    code = np.int64(0)
    for _ in range(5):
        code = (code << 8) | _rc_next(data, dc)
    if code > MASK32:
        raise ValueError("range coder stream has an invalid first byte")
    dc[_CODE] = code


@njit(cache=True)
def _rc_get_freq(dc, total):
    r = dc[_DRANGE] // total
    dc[_R] = r
    v = dc[_CODE] // r
    if v >= total:
        raise ValueError("arithmetic-coded payload is inconsistent")
    return v


@njit(cache=True)
def _rc_consume(data, dc, cum, freq):
    r = dc[_R]
    code = dc[_CODE] - cum * r
    rng = freq * r
    while rng < TOP:
        code = (code << 8) | _rc_next(data, dc)
        rng <<= 8
    dc[_CODE] = code
    dc[_DRANGE] = rng


@njit(cache=True)
def _rc_decode_raw(data, dc, nbits):
    value = np.int64(0)
    while nbits > 0:
        take = min(RAW_CHUNK, nbits)
        nbits -= take
        v = _rc_get_freq(dc, np.int64(1) << take)
        _rc_consume(data, dc, v, 1)
        value = (value << take) | v
    return value


# --- adaptive model --------------------------------------------------------

@njit(cache=True)
def _fw_add(tree, slot, delta):
    n = tree.size - 1
    i = slot + 1
    while i <= n:
        tree[i] += delta
        i += i & -i


@njit(cache=True)
def _fw_clear(tree, slot):
    n = tree.size - 1
    i = slot + 1
    while i <= n:
        tree[i] = 0
        i += i & -i


@njit(cache=True)
def _fw_prefix(tree, slot):
    s = np.int64(0)
    while slot > 0:
        s += tree[slot]
        slot -= slot & -slot
    return s


@njit(cache=True)
def _fw_find(tree, target):
    n = tree.size - 1
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        step //= 2
    return pos


@njit(cache=True)
def _m_add(cnt, tree, touched, meta, slot, delta):
    if cnt[slot] == 0:
        touched[meta[_NTOUCH]] = slot
        meta[_NTOUCH] += 1
    cnt[slot] += delta
    meta[_TOTAL] += delta
    _fw_add(tree, slot, delta)


@njit(cache=True)
def _m_reset(cnt, tree, touched, lc, meta):
    lc[:] = LENGTH_INIT
    meta[_LEN_TOTAL] = LENGTH_INIT * lc.size
    for j in range(meta[_NTOUCH]):
        s = touched[j]
        _fw_clear(tree, s)
        cnt[s] = 0
    meta[_NTOUCH] = 0
    meta[_TOTAL] = 0
    _m_add(cnt, tree, touched, meta, 0, ESCAPE_INIT)


@njit(cache=True)
def _m_halve(cnt, tree, touched, meta):
    n = meta[_NTOUCH]
    for j in range(n):
        _fw_clear(tree, touched[j])
    k = 0
    total = 0
    for j in range(n):
        s = touched[j]
        c = cnt[s] >> 1
        if s == 0 and c < 1:
            c = 1
        cnt[s] = c
        if c > 0:
            touched[k] = s
            k += 1
            total += c
            _fw_add(tree, s, c)
    meta[_NTOUCH] = k
    meta[_TOTAL] = total


@njit(cache=True)
def _m_update(cnt, tree, touched, meta, slot, is_new):
    _m_add(cnt, tree, touched, meta, slot, INCREMENT)
    if is_new:
        _m_add(cnt, tree, touched, meta, 0, ESCAPE_INCREMENT)
    if meta[_TOTAL] > MAX_TOTAL:
        _m_halve(cnt, tree, touched, meta)


@njit(cache=True)
def _len_update(lc, meta, nb):
    lc[nb] += LENGTH_INCREMENT
    meta[_LEN_TOTAL] += LENGTH_INCREMENT
    if meta[_LEN_TOTAL] > MAX_TOTAL:
        total = 0
        for i in range(lc.size):
            lc[i] = (lc[i] + 1) >> 1
            total += lc[i]
        meta[_LEN_TOTAL] = total


@njit(cache=True)
def _m_cost(cnt, lc, meta, tab, symbol):
    slot = symbol + 1
    total = meta[_TOTAL]
    if cnt[slot] > 0:
        return tab[total] - tab[cnt[slot]]
    nb = _bit_length(symbol)
    mantissa = nb - 1 if nb > 1 else 0
    esc = tab[total] - tab[cnt[0]]
    return (esc + (tab[meta[_LEN_TOTAL]] - tab[lc[nb]])) + mantissa


@njit(cache=True)
def _m_encode(buf, rc, cnt, tree, touched, lc, meta, tab, symbol):
    cost = _m_cost(cnt, lc, meta, tab, symbol)
    slot = symbol + 1
    total = meta[_TOTAL]
    if cnt[slot] > 0:
        buf = _rc_encode(buf, rc, _fw_prefix(tree, slot), cnt[slot], total)
        _m_update(cnt, tree, touched, meta, slot, False)
    else:
        buf = _rc_encode(buf, rc, 0, cnt[0], total)
        nb = _bit_length(symbol)
        cum = 0
        for i in range(nb):
            cum += lc[i]
        buf = _rc_encode(buf, rc, cum, lc[nb], meta[_LEN_TOTAL])
        _len_update(lc, meta, nb)
        if nb > 1:
            buf = _rc_encode_raw(buf, rc, symbol - (np.int64(1) << (nb - 1)), nb - 1)
        _m_update(cnt, tree, touched, meta, slot, True)
    return buf, cost


@njit(cache=True)
def _m_decode(data, dc, cnt, tree, touched, lc, meta, max_symbol):
    target = _rc_get_freq(dc, meta[_TOTAL])
    slot = _fw_find(tree, target)
    freq = cnt[slot]
    if freq <= 0:
        raise ValueError("arithmetic-coded payload is inconsistent")
    _rc_consume(data, dc, _fw_prefix(tree, slot), freq)
    if slot != 0:
        _m_update(cnt, tree, touched, meta, slot, False)
        return slot - 1
    target = _rc_get_freq(dc, meta[_LEN_TOTAL])
    nb = 0
    cum = 0
    while cum + lc[nb] <= target:
        cum += lc[nb]
        nb += 1
    _rc_consume(data, dc, cum, lc[nb])
    _len_update(lc, meta, nb)
    if nb <= 1:
        symbol = np.int64(nb)
    else:
        symbol = (np.int64(1) << (nb - 1)) + _rc_decode_raw(data, dc, nb - 1)
    if symbol > max_symbol or cnt[symbol + 1] > 0:
        raise ValueError("escaped symbol is invalid")
    _m_update(cnt, tree, touched, meta, symbol + 1, True)
    return symbol


@njit(cache=True)
def _model_arrays(max_symbol):
    nslots = max_symbol + 2
    raw_bits = max(1, _bit_length(max_symbol))
    cnt = np.zeros(nslots, np.int64)
    tree = np.zeros(nslots + 1, np.int64)
    touched = np.zeros(nslots, np.int64)
    lc = np.zeros(raw_bits + 1, np.int64)
    meta = np.zeros(3, np.int64)
    return cnt, tree, touched, lc, meta


# --- bit-plane schedule ----------------------------------------------------

@njit(cache=True)
def encode_planes(mag, negative, is_core, threshold, tab):
    C = mag.size
    cnt, tree, touched, lc, meta = _model_arrays(C)
    rc = np.zeros(6, np.int64)
    rc[_RANGE] = MASK32
    rc[_CACHE_SIZE] = 1
    buf = np.empty(4096, np.uint8)
    verb = np.empty(4096, np.uint8)
    nverb = 0
    sig = np.zeros(C, np.bool_)
    digest = np.uint64(0)
    seq = 0
    one = np.uint64(1)

    sse0 = 0.0
    for c in range(C):
        f = float(mag[c])
        sse0 += f * f
    s_tilde = sse0
    alpha = np.inf
    stop_plane = 63
    stop_count = 0
    stopped = False
    if is_core:
        stopped = sse0 <= threshold
    else:
        stopped = not (threshold < np.inf)

    if not stopped:
        red = 0.0
        bits = 0.0
        for p in range(63, -1, -1):
            pu = np.uint64(p)
            two_p = math.ldexp(1.0, p)
            if p == 63:
                start = sse0
            else:
                keep = (one << np.uint64(p + 1)) - one
                start = 0.0
                for c in range(C):
                    f = float(mag[c] & keep)
                    start += f * f
            lowmask = (one << pu) - one
            _m_reset(cnt, tree, touched, lc, meta)
            red = 0.0
            bits = 0.0
            run = 0
            for c in range(C):
                b = 1 if (mag[c] >> pu) & one else 0
                if sig[c]:
                    verb = _grow(verb, nverb)
                    verb[nverb] = b
                    nverb += 1
                    bits += 1.0
                elif b == 0:
                    run += 1
                else:
                    buf, cost = _m_encode(buf, rc, cnt, tree, touched, lc, meta, tab, run)
                    bits += cost + 1.0
                    verb = _grow(verb, nverb)
                    verb[nverb] = 1 if negative[c] else 0
                    nverb += 1
                    sig[c] = True
                    run = 0
                if b:
                    red += (2.0 * float(mag[c] & lowmask) + two_p) * two_p
                seq += 1
                digest += np.uint64(seq) * np.uint64((p * C + c) * 2 + b + 1)
                s_tilde = start - red
                hit = False
                if is_core:
                    hit = s_tilde <= threshold
                elif c == C - 1:
                    # a plane without 1-bits says nothing about the next one
                    hit = red > 0 and red / bits <= threshold
                if hit:
                    stop_plane = p
                    stop_count = c + 1
                    stopped = True
                    break
            if run > 0:
                buf, cost = _m_encode(buf, rc, cnt, tree, touched, lc, meta, tab, run)
            if stopped:
                break
        if not stopped:
            stop_plane = 0
            stop_count = C
        alpha = red / bits if bits > 0 else np.inf

    payload = _rc_finish(buf, rc)
    return payload, verb[:nverb].copy(), stop_plane, stop_count, s_tilde, alpha, digest


@njit(cache=True)
def decode_planes(data, verb, C, stop_plane, stop_count):
    mag = np.zeros(C, np.uint64)
    negative = np.zeros(C, np.bool_)
    sig = np.zeros(C, np.bool_)
    cnt, tree, touched, lc, meta = _model_arrays(C)
    dc = np.zeros(4, np.int64)
    started = False
    vpos = 0
    nsig = 0
    digest = np.uint64(0)
    seq = 0
    one = np.uint64(1)
    nothing = stop_plane == 63 and stop_count == 0

    if not nothing:
        for p in range(63, stop_plane - 1, -1):
            L = C if p > stop_plane else stop_count
            bitval = one << np.uint64(p)
            _m_reset(cnt, tree, touched, lc, meta)
            if L == C:
                n_free = C - nsig
            else:
                n_free = 0
                for c in range(L):
                    if not sig[c]:
                        n_free += 1
            free_pos = 0
            active = False
            run_left = 0
            for c in range(L):
                b = 0
                if sig[c]:
                    if vpos >= verb.size:
                        raise ValueError("verbatim payload is truncated")
                    b = 1 if verb[vpos] else 0
                    vpos += 1
                    if b:
                        mag[c] |= bitval
                else:
                    if not active:
                        if not started:
                            _rc_init(data, dc)
                            started = True
                        k = _m_decode(data, dc, cnt, tree, touched, lc, meta, C)
                        if k > n_free - free_pos:
                            raise ValueError("run length overruns the bit plane")
                        active = True
                        run_left = k
                    if run_left > 0:
                        run_left -= 1
                    else:
                        b = 1
                        active = False
                        mag[c] |= bitval
                        if vpos >= verb.size:
                            raise ValueError("verbatim payload is truncated")
                        negative[c] = verb[vpos] != 0
                        vpos += 1
                        sig[c] = True
                        nsig += 1
                    free_pos += 1
                seq += 1
                digest += np.uint64(seq) * np.uint64((p * C + c) * 2 + b + 1)
    if started:
        if dc[_POS] != data.size:
            raise ValueError("trailing bytes after the arithmetic-coded payload")
    elif data.size > 0:
        raise ValueError("unused arithmetic-coded payload")
    if vpos != verb.size:
        raise ValueError("unused verbatim bits")
    return mag, negative, sig, digest


@njit(cache=True)
def ac_encode_symbols(symbols, max_symbol, tab):
    cnt, tree, touched, lc, meta = _model_arrays(max_symbol)
    _m_reset(cnt, tree, touched, lc, meta)
    rc = np.zeros(6, np.int64)
    rc[_RANGE] = MASK32
    rc[_CACHE_SIZE] = 1
    buf = np.empty(4096, np.uint8)
    for i in range(symbols.size):
        buf, cost = _m_encode(buf, rc, cnt, tree, touched, lc, meta, tab, symbols[i])
    return _rc_finish(buf, rc)


@njit(cache=True)
def ac_decode_symbols(data, n_symbols, max_symbol):
    cnt, tree, touched, lc, meta = _model_arrays(max_symbol)
    _m_reset(cnt, tree, touched, lc, meta)
    out = np.empty(n_symbols, np.int64)
    if n_symbols == 0:
        if data.size:
            raise ValueError("payload present but no symbols expected")
        return out
    dc = np.zeros(4, np.int64)
    _rc_init(data, dc)
    for i in range(n_symbols):
        out[i] = _m_decode(data, dc, cnt, tree, touched, lc, meta, max_symbol)
    if dc[_POS] != data.size:
        raise ValueError("trailing bytes after the last symbol")
    return out
