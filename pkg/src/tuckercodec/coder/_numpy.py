"""Vectorized bit-plane kernels (no JIT).

Each plane is handled with whole-array operations; only the run-length
symbols go through the Python range coder.  Accumulations use
``np.cumsum`` (strictly sequential) in the same order as the jitted loops,
so both backends reach the same breakpoints and emit the same bytes.
"""

import math

import numpy as np

from ..errors import CorruptStreamError
from .entropy import AdaptiveModel, RangeDecoder, RangeEncoder

_ONE = np.uint64(1)


def _seq_sum(x: np.ndarray) -> float:
    return float(np.cumsum(x)[-1]) if x.size else 0.0


def _add(a: np.uint64, b: np.uint64) -> np.uint64:
    with np.errstate(over="ignore"):
        return a + b


def _digest(p: int, C: int, bits: np.ndarray, seq: int) -> np.uint64:
    L = bits.size
    key = (np.uint64(p * C) + np.arange(L, dtype=np.uint64)) * np.uint64(2)
    key += bits.astype(np.uint64) + _ONE
    seqs = np.arange(seq + 1, seq + L + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return np.sum(seqs * key, dtype=np.uint64)


def encode_planes(mag, negative, is_core, threshold, tab=None):
    C = mag.size
    model = AdaptiveModel(C)
    enc = RangeEncoder()
    sig = np.zeros(C, dtype=bool)
    verb_parts = []
    digest = np.uint64(0)
    seq = 0

    magf = mag.astype(np.float64)
    sse0 = _seq_sum(magf * magf)
    s_tilde, alpha = sse0, math.inf
    stop_plane, stop_count = 63, 0
    stopped = sse0 <= threshold if is_core else not threshold < math.inf

    if not stopped:
        for p in range(63, -1, -1):
            pu = np.uint64(p)
            two_p = math.ldexp(1.0, p)
            if p == 63:
                start = sse0
            else:
                r = (mag & ((_ONE << np.uint64(p + 1)) - _ONE)).astype(np.float64)
                start = _seq_sum(r * r)
            bits = ((mag >> pu) & _ONE).astype(bool)
            free_idx = np.flatnonzero(~sig)
            ones_in_free = np.flatnonzero(bits[free_idx])
            runs = np.diff(ones_in_free, prepend=-1) - 1

            model.reset()
            costs = np.array([model.observe(int(k)) for k in runs], dtype=np.float64)
            pos_cost = np.zeros(C)
            pos_cost[sig] = 1.0
            pos_cost[free_idx[ones_in_free]] = costs + 1.0
            d = np.zeros(C)
            low = (mag[bits] & ((_ONE << pu) - _ONE)).astype(np.float64)
            d[bits] = (2.0 * low + two_p) * two_p
            cumred = np.cumsum(d)
            cumbits = np.cumsum(pos_cost)
            if is_core:
                hit = (start - cumred) <= threshold
            else:
                # a plane without 1-bits says nothing about the next one
                red_p, bits_p = float(cumred[-1]), float(cumbits[-1])
                hit = np.zeros(C, dtype=bool)
                hit[-1] = red_p > 0 and red_p / bits_p <= threshold
            hits = np.flatnonzero(hit)
            L = int(hits[0]) + 1 if hits.size else C

            model.reset()
            ones_pos = free_idx[ones_in_free]
            n_ones = int(np.searchsorted(ones_pos, L))
            for k in runs[:n_ones]:
                model.encode(enc, int(k))
            n_free = int(np.searchsorted(free_idx, L))
            last = int(ones_in_free[n_ones - 1]) if n_ones else -1
            if n_free - last - 1 > 0:
                model.encode(enc, n_free - last - 1)

            sig_l, bits_l = sig[:L], bits[:L]
            vmask = sig_l | bits_l
            verb_parts.append(np.where(sig_l, bits_l, negative[:L])[vmask].astype(np.uint8))
            digest = _add(digest, _digest(p, C, bits_l, seq))
            seq += L
            sig[:L] |= bits_l

            s_tilde = start - float(cumred[L - 1])
            alpha = float(cumred[L - 1] / cumbits[L - 1]) if cumbits[L - 1] > 0 else math.inf
            if hits.size:
                stop_plane, stop_count, stopped = p, L, True
                break
        if not stopped:
            stop_plane, stop_count = 0, C

    payload = np.frombuffer(enc.finish(), dtype=np.uint8).copy()
    verb = np.concatenate(verb_parts) if verb_parts else np.zeros(0, np.uint8)
    return payload, verb, stop_plane, stop_count, s_tilde, alpha, digest


def decode_planes(data, verb, C, stop_plane, stop_count):
    mag = np.zeros(C, dtype=np.uint64)
    negative = np.zeros(C, dtype=bool)
    sig = np.zeros(C, dtype=bool)
    digest = np.uint64(0)
    seq = 0
    raw = bytes(np.asarray(data, dtype=np.uint8))
    verb = np.asarray(verb, dtype=np.uint8)
    model = AdaptiveModel(C)
    dec = None
    vpos = 0

    if not (stop_plane == 63 and stop_count == 0):
        for p in range(63, stop_plane - 1, -1):
            L = C if p > stop_plane else stop_count
            model.reset()
            free_idx = np.flatnonzero(~sig[:L])
            n_free = free_idx.size
            ones = []
            pos = 0
            while pos < n_free:
                if dec is None:
                    dec = RangeDecoder(raw)
                k = model.decode(dec)
                if pos + k > n_free:
                    raise CorruptStreamError("run length overruns the bit plane")
                pos += k
                if pos < n_free:
                    ones.append(pos)
                    pos += 1
            new_idx = free_idx[np.asarray(ones, dtype=np.int64)]
            vmask = sig[:L].copy()
            vmask[new_idx] = True
            targets = np.flatnonzero(vmask)
            if vpos + targets.size > verb.size:
                raise CorruptStreamError("verbatim payload is truncated")
            vals = verb[vpos:vpos + targets.size] != 0
            vpos += targets.size
            was_sig = sig[targets]
            setbit = np.where(was_sig, vals, True)
            mag[targets[setbit]] |= _ONE << np.uint64(p)
            negative[targets[~was_sig]] = vals[~was_sig]
            sig[new_idx] = True
            bits = np.zeros(L, dtype=bool)
            bits[targets[setbit]] = True
            digest = _add(digest, _digest(p, C, bits, seq))
            seq += L
    if dec is not None:
        if not dec.exhausted:
            raise CorruptStreamError("trailing bytes after the arithmetic-coded payload")
    elif raw:
        raise CorruptStreamError("unused arithmetic-coded payload")
    if vpos != verb.size:
        raise CorruptStreamError("unused verbatim bits")
    return mag, negative, sig, digest


def ac_encode_symbols(symbols, max_symbol, tab=None):
    from .entropy import ac_encode
    return np.frombuffer(ac_encode(symbols, max_symbol), dtype=np.uint8).copy()


def ac_decode_symbols(data, n_symbols, max_symbol):
    from .entropy import ac_decode
    return np.asarray(ac_decode(bytes(data), n_symbols, max_symbol), dtype=np.int64)
