"""Acceptance criteria, one test per criterion.

Each test logs a PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

import oracles
from tuckercodec.coder import kernels
from tuckercodec.coder.bitplane import decode_block
from tuckercodec.container import CompressedContainer
from tuckercodec.coder.entropy import LOG2_TABLE, ac_decode, ac_encode, empirical_entropy_bits
from tuckercodec.hosvd import TuckerDecomposition, hosvd_forward, hosvd_inverse
from tuckercodec.pipeline import (
    ErrorTarget,
    compress,
    decode_decomposition,
    decompress,
    encode_core,
    metrics,
)
from tuckercodec.resample import BOX, DOWNSAMPLE, LANCZOS2, Decimate, Keep, apply_resample
from tuckercodec.tensor import frobenius_norm_sq


@contextmanager
def criterion(log, number, title):
    info = {}
    start = time.perf_counter()
    try:
        yield info
    except BaseException:
        info["t"] = f"{time.perf_counter() - start:.2f}s"
        log.append(_line("FAIL", number, title, info))
        print(log[-1])
        raise
    info["t"] = f"{time.perf_counter() - start:.2f}s"
    log.append(_line("PASS", number, title, info))
    print(log[-1])


def _line(status, number, title, info):
    details = " ".join(f"{k}={v}" for k, v in info.items())
    return f"{status} criterion {number}: {title} [{details}]"


def _fmt(x):
    return f"{x:.3g}"


def test_criterion_1_transform_identities(acceptance_log):
    with criterion(acceptance_log, 1, "transform identities") as info:
        rng = np.random.default_rng(1)
        t0 = time.perf_counter()
        worst_norm = worst_orth = worst_mono = 0.0
        for trial in range(20):
            ndim = [1, 2, 3, 4][trial % 4]
            shape = tuple(int(s) for s in rng.integers(8, 33, size=ndim))
            t = rng.standard_normal(shape) * 10.0 ** rng.uniform(-3, 3)
            d = hosvd_forward(t)
            nt = frobenius_norm_sq(t)
            worst_norm = max(worst_norm, abs(frobenius_norm_sq(d.core) - nt) / nt)
            for u, s in zip(d.factors, d.slice_norm_table):
                worst_orth = max(worst_orth, float(np.abs(u.T @ u - np.eye(u.shape[0])).max()))
                worst_mono = max(worst_mono, float(np.max(np.diff(s), initial=0.0)))
        elapsed = time.perf_counter() - t0
        info.update(norm=_fmt(worst_norm), orth=_fmt(worst_orth), mono=_fmt(worst_mono),
                    runtime=f"{elapsed:.2f}s")
        assert worst_norm <= 1e-8
        assert worst_orth <= 1e-8
        assert worst_mono <= 1e-10
        assert elapsed < 10


def _bit_matrix(rng):
    C = int(rng.integers(1, 300))
    density = 10.0 ** rng.uniform(-3, math.log10(0.5))
    planes = rng.random((C, 64)) < density
    weights = np.left_shift(np.uint64(1), np.arange(63, -1, -1, dtype=np.uint64))
    mags = np.bitwise_or.reduce(np.where(planes, weights, np.uint64(0)), axis=1).astype(np.uint64)
    negative = (rng.random(C) < 0.5) & (mags > 0)
    return mags, negative


def test_criterion_2_lossless_entropy_layer(acceptance_log):
    with criterion(acceptance_log, 2, "lossless entropy layer") as info:
        rng = np.random.default_rng(2)
        exact = 0
        for _ in range(1000):
            mags, negative = _bit_matrix(rng)
            out = kernels.encode_planes(mags, negative, True, -math.inf, LOG2_TABLE)
            mag2, neg2, sig, digest = kernels.decode_planes(out[0], out[1], mags.size, out[2], out[3])
            ok = (np.array_equal(mag2, mags) and np.array_equal(neg2, negative)
                  and np.array_equal(sig, mags > 0) and int(digest) == int(out[6]))
            exact += ok
        info["roundtrips"] = f"{exact}/1000"

        streams = {
            "geometric0.5": rng.geometric(0.5, 20000) - 1,
            "geometric0.05": rng.geometric(0.05, 20000) - 1,
            "geometric0.005": rng.geometric(0.005, 20000) - 1,
            "uniform16": rng.integers(0, 16, 20000),
            "uniform256": rng.integers(0, 256, 10000),
            "zipf1.5": np.minimum(rng.zipf(1.5, 20000), 5000),
            "constant": np.full(10000, 7),
        }
        worst = 0.0
        for name, sym in streams.items():
            top = int(sym.max()) + 1000
            data = ac_encode(sym, top)
            assert ac_decode(data, sym.size, top) == list(sym), name
            bound = empirical_entropy_bits(sym) / 8
            worst = max(worst, (len(data) - 64) / max(bound, 1e-9))
            assert len(data) <= 1.05 * bound + 64, name
        info["worst_payload_over_bound"] = _fmt(worst)
        assert exact == 1000


def test_criterion_3_core_error_guarantee(acceptance_log):
    with criterion(acceptance_log, 3, "core error guarantee with lossless factors") as info:
        rng = np.random.default_rng(3)
        worst_ratio = worst_transport = 0.0
        for _ in range(50):
            x = rng.standard_normal((16, 16, 16)) * 10.0 ** rng.uniform(-4, 4)
            d = hosvd_forward(x)
            s = frobenius_norm_sq(x) * 10.0 ** rng.uniform(-12, -0.5)
            block, _ = encode_core(d.core, s)
            core = decode_block(block).reshape(x.shape)
            rec = hosvd_inverse(TuckerDecomposition(core, d.factors, d.slice_norm_table))
            sse = float(np.sum((rec - x) ** 2))
            bound = s + x.size * math.ldexp(1.0, 2 * (block.scale_exponent - 63))
            worst_ratio = max(worst_ratio, sse / bound)
            lhs = np.linalg.norm(rec - hosvd_inverse(d))
            rhs = np.linalg.norm(core - d.core)
            worst_transport = max(worst_transport, abs(lhs - rhs) / rhs)
        info.update(sse_over_bound=_fmt(worst_ratio), transport=_fmt(worst_transport))
        assert worst_ratio <= 1.0
        assert worst_transport <= 1e-8


def test_criterion_4_end_to_end_targeting(acceptance_log):
    with criterion(acceptance_log, 4, "end-to-end targeting on smooth 64^3 volumes") as info:
        t0 = time.perf_counter()
        worst_eps = 0.0
        worst_db = math.inf
        for sigma, seed in ((2.0, 40), (4.0, 41)):
            x = oracles.smooth_volume((64, 64, 64), sigma, seed)
            for eps in (1e-1, 1e-2, 1e-3):
                got = metrics(x, decompress(compress(x, ErrorTarget.relative(eps)))).eps
                worst_eps = max(worst_eps, got / eps)
            for db in (30, 40, 50):
                got = metrics(x, decompress(compress(x, ErrorTarget.psnr(db)))).psnr
                worst_db = min(worst_db, got - db)
        elapsed = time.perf_counter() - t0
        info.update(eps_over_target=_fmt(worst_eps), psnr_margin_db=f"{worst_db:.2f}",
                    runtime=f"{elapsed:.1f}s")
        assert worst_eps <= 1.5
        assert worst_db >= -1.5
        assert elapsed < 60


def test_criterion_5_compressibility(acceptance_log):
    with criterion(acceptance_log, 5, "compressibility sanity") as info:
        n = 64
        x = np.einsum("i,j,k->ijk", np.linspace(1, 2, n), np.linspace(0.5, 1.5, n) ** 2,
                      np.exp(np.linspace(0, 1, n)))
        ratio = x.nbytes / len(compress(x, ErrorTarget.relative(1e-3)).to_bytes())
        g = oracles.smooth_volume((64, 64, 64), 2.0, 50)
        g = np.round((g - g.min()) / (g.max() - g.min()) * 255).astype(np.uint8)
        back = decompress(compress(g, ErrorTarget.relative(1e-6)))
        mismatched = int(np.count_nonzero(back != g))
        info.update(rank1_ratio=f"{ratio:.0f}:1", u8_mismatches=mismatched)
        assert ratio >= 50
        assert back.dtype == np.uint8 and mismatched == 0


def test_criterion_6_determinism_and_monotonicity(acceptance_log):
    with criterion(acceptance_log, 6, "determinism and size monotonicity") as info:
        x = oracles.smooth_volume((48, 40, 32), 2.0, 60)
        a = compress(x, ErrorTarget.relative(1e-2)).to_bytes()
        b = compress(x.copy(), ErrorTarget.relative(1e-2)).to_bytes()
        sizes = [len(compress(x, ErrorTarget.relative(e)).to_bytes())
                 for e in (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)]
        info.update(identical=a == b, sizes=",".join(map(str, sizes)))
        assert a == b
        assert all(p <= q for p, q in zip(sizes, sizes[1:]))


def _rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def test_criterion_7_compressed_domain_resampling(acceptance_log):
    with criterion(acceptance_log, 7, "compressed-domain resampling oracles") as info:
        x = oracles.smooth_volume((16, 16, 16), 1.5, 70)
        decomps = [hosvd_forward(x), decode_decomposition(compress(x, ErrorTarget.relative(1e-2)))]
        worst = {"down": 0.0, "box": 0.0, "lanczos": 0.0}
        methods = {
            "down": (DOWNSAMPLE, lambda c, k: c[::k]),
            "box": (BOX, oracles.box_average),
            "lanczos": (LANCZOS2, oracles.lanczos_decimate),
        }
        for d in decomps:
            full = hosvd_inverse(d)
            for name, (method, oracle) in methods.items():
                for mode in range(3):
                    for k in (2, 3):
                        spec = [Keep()] * 3
                        spec[mode] = Decimate(k, method)
                        got = hosvd_inverse(apply_resample(d, spec))
                        ref = oracles.along_axis(full, mode, lambda c: oracle(c, k))
                        worst[name] = max(worst[name], _rel(got, ref))
                spec = [Decimate(2, method)] * 3
                got = hosvd_inverse(apply_resample(d, spec))
                ref = full
                for mode in range(3):
                    ref = oracles.along_axis(ref, mode, lambda c: oracle(c, 2))
                worst[name] = max(worst[name], _rel(got, ref))
        info.update({k: _fmt(v) for k, v in worst.items()})
        assert max(worst.values()) <= 1e-12


def test_criterion_8_decompression_faster(acceptance_log):
    with criterion(acceptance_log, 8, "decompression faster than compression at 128^3") as info:
        x = oracles.smooth_volume((128, 128, 128), 3.0, 80)
        target = ErrorTarget.psnr(40)
        decompress(compress(x[:16, :16, :16], target))  # warm caches and JIT
        comp, decomp = [], []
        for _ in range(2):
            t0 = time.perf_counter()
            blob = compress(x, target).to_bytes()
            t1 = time.perf_counter()
            decompress(CompressedContainer.from_bytes(blob))
            t2 = time.perf_counter()
            comp.append(t1 - t0)
            decomp.append(t2 - t1)
        info.update(backend=kernels.BACKEND, t_comp=f"{min(comp):.2f}s", t_decomp=f"{min(decomp):.2f}s")
        assert min(decomp) < min(comp)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
