"""Compare the numba and numpy backends on the coder kernels and end to end.

Each backend runs in its own interpreter because the choice is made at
import time from TUCKERCODEC_DISABLE_JIT.  Usage:

    python benchmarks/bench_kernels.py [--size 64] [--repeat 3] [--psnr 40]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def smooth_volume(n, sigma, seed):
    import numpy as np

    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, n, n))
    f = np.fft.fftfreq(n)
    g = np.exp(-2 * (np.pi * sigma * f) ** 2)
    spectrum = np.fft.fftn(noise) * g[:, None, None] * g[None, :, None] * g[None, None, :]
    return np.fft.ifftn(spectrum).real


def _best(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def worker(size, repeat, psnr):
    import numpy as np

    from tuckercodec import ErrorTarget, compress, decompress, hosvd_forward, metrics
    from tuckercodec.container import CompressedContainer
    from tuckercodec.coder import kernels
    from tuckercodec.coder.bitplane import CoreSse, decode_block, encode_block, scale_block

    x = smooth_volume(size, 3.0, 7)
    target = ErrorTarget.psnr(psnr)
    decompress(compress(x[:8, :8, :8], target))  # JIT warm-up

    core = scale_block(hosvd_forward(x).core.ravel())
    mags = core.magnitudes.astype(np.float64)
    budget = CoreSse(float(mags @ mags) * 1e-6)
    block, t_enc = _best(lambda: encode_block(core, budget)[0], repeat)
    _, t_dec = _best(lambda: decode_block(block), repeat)

    blob, t_comp = _best(lambda: compress(x, target).to_bytes(), repeat)
    y, t_decomp = _best(lambda: decompress(CompressedContainer.from_bytes(blob)), repeat)
    return {
        "backend": kernels.BACKEND,
        "core_encode": t_enc,
        "core_decode": t_dec,
        "compress": t_comp,
        "decompress": t_decomp,
        "bytes": len(blob),
        "psnr": metrics(x, y).psnr,
        "digest": blob.hex()[-32:],
    }


def run_backend(disable, args):
    env = dict(os.environ)
    env["TUCKERCODEC_DISABLE_JIT"] = "1" if disable else "0"
    cmd = [sys.executable, __file__, "--worker", "--size", str(args.size),
           "--repeat", str(args.repeat), "--psnr", str(args.psnr)]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64, help="edge length of the cubic test volume")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--psnr", type=float, default=40.0)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.worker:
        print(json.dumps(worker(args.size, args.repeat, args.psnr)))
        return 0

    rows = [run_backend(False, args), run_backend(True, args)]
    keys = ("core_encode", "core_decode", "compress", "decompress")
    print(f"volume {args.size}^3, target {args.psnr:g} dB, best of {args.repeat}")
    print(f"{'backend':<8}" + "".join(f"{k:>13}" for k in keys) + f"{'bytes':>10}{'psnr':>8}")
    for r in rows:
        print(f"{r['backend']:<8}" + "".join(f"{r[k]:>12.3f}s" for k in keys)
              + f"{r['bytes']:>10}{r['psnr']:>8.2f}")
    if rows[0]["backend"] == "numba":
        speed = "  ".join(f"{k} x{rows[1][k] / rows[0][k]:.1f}" for k in keys)
        print(f"speedup   {speed}")
    same = rows[0]["bytes"] == rows[1]["bytes"] and rows[0]["digest"] == rows[1]["digest"]
    print("containers identical" if same else "containers DIFFER")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
