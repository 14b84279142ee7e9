import os
import subprocess
import sys

import numpy as np
import pytest

from tuckercodec import _backend, _contract
from tuckercodec.coder import _numpy
from tuckercodec.coder.bitplane import scale_block
from tuckercodec.coder.entropy import LOG2_TABLE

numba = pytest.importorskip("numba")
from tuckercodec.coder import _jit  # noqa: E402


def _blocks(rng, n):
    for trial in range(n):
        C = int(rng.integers(1, 400))
        v = rng.standard_normal(C) * np.exp(rng.uniform(-15, 0, C)) * (rng.random(C) < rng.uniform(0.05, 1))
        b = scale_block(v)
        if not b.empty:
            yield trial, b


def test_encode_planes_identical(rng):
    for trial, b in _blocks(rng, 40):
        total = float(np.sum(b.magnitudes.astype(float) ** 2))
        if trial % 2:
            args = (True, total * 10.0 ** rng.uniform(-25, 0))
        else:
            args = (False, 2.0 ** 126 * 10.0 ** rng.uniform(-25, -3))
        a = _jit.encode_planes(b.magnitudes, b.negative, *args, LOG2_TABLE)
        n = _numpy.encode_planes(b.magnitudes, b.negative, *args, LOG2_TABLE)
        assert a[0].tobytes() == n[0].tobytes()
        assert a[1].tobytes() == n[1].tobytes()
        assert a[2:6] == n[2:6]
        assert int(a[6]) == int(n[6])

        da = _jit.decode_planes(a[0], a[1], b.count, a[2], a[3])
        dn = _numpy.decode_planes(n[0], n[1], b.count, n[2], n[3])
        for x, y in zip(da[:3], dn[:3]):
            np.testing.assert_array_equal(x, y)
        assert int(da[3]) == int(dn[3]) == int(a[6])


def test_decoders_reject_truncation(rng):
    b = scale_block(rng.standard_normal(300))
    out = _jit.encode_planes(b.magnitudes, b.negative, True, 1e30, LOG2_TABLE)
    for dec in (_jit.decode_planes, _numpy.decode_planes):
        with pytest.raises(ValueError):
            dec(out[0][:-4], out[1], b.count, out[2], out[3])
        with pytest.raises(ValueError):
            dec(out[0], out[1][:-1], b.count, out[2], out[3])


def test_ac_symbols_identical(rng):
    sym = np.minimum(rng.geometric(0.02, 5000) - 1, 2999).astype(np.int64)
    a = _jit.ac_encode_symbols(sym, 3000, LOG2_TABLE)
    n = _numpy.ac_encode_symbols(sym, 3000, LOG2_TABLE)
    assert a.tobytes() == n.tobytes()
    np.testing.assert_array_equal(_jit.ac_decode_symbols(a, sym.size, 3000), sym)
    np.testing.assert_array_equal(_numpy.ac_decode_symbols(n, sym.size, 3000), sym)


def test_ordered_matmul_identical(rng):
    u = rng.standard_normal((17, 9))
    b = rng.standard_normal((9, 33))
    a = _contract.ordered_matmul_numba(u, b)
    n = _contract.ordered_matmul_numpy(u, b)
    assert a.tobytes() == n.tobytes()
    np.testing.assert_allclose(a, u @ b, rtol=1e-12, atol=1e-12)


_SCRIPT = (
    "import sys, numpy as np, tuckercodec as tc;"
    "from scipy.ndimage import gaussian_filter;"
    "x = gaussian_filter(np.random.default_rng(3).standard_normal((20, 18, 16)), 2);"
    "c = tc.compress(x, tc.ErrorTarget.psnr(45)).to_bytes();"
    "y = tc.decompress(tc.CompressedContainer.from_bytes(c));"
    "sys.stdout.write(tc.BACKEND + ' ' + c.hex() + ' ' + y.tobytes().hex())"
)


def _run(disable):
    env = dict(os.environ)
    env.pop(_backend.DISABLE_ENV, None)
    if disable:
        env[_backend.DISABLE_ENV] = "1"
    return subprocess.run([sys.executable, "-c", _SCRIPT], env=env, capture_output=True,
                          text=True, check=True).stdout.split()


def test_env_flag_selects_backend_and_output_matches():
    jit = _run(False)
    ref = _run(True)
    assert jit[0] == "numba" and ref[0] == "numpy"
    assert jit[1] == ref[1]
    assert jit[2] == ref[2]
