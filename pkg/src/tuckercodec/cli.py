"""Command-line front end.

Exit status: 0 on success, 1 for numeric or corrupt-stream failures, 2 for
usage and validation errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .container import SAMPLE_DTYPES, CompressedContainer
from .errors import CodecError, CorruptStreamError, DegenerateInputError
from .pipeline import ErrorTarget, compress_report, decompress, metrics
from .resample import parse_resample_spec

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
CSV_HEADER = "target,eps,rmse,psnr,bytes,ratio,t_comp,t_decomp"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RawVolume:
    path: Path
    sample_type: str
    dims: tuple
    big_endian: bool = False

    @property
    def dtype(self) -> np.dtype:
        dt = SAMPLE_DTYPES[self.sample_type]
        return dt.newbyteorder(">") if self.big_endian else dt

    @property
    def expected_bytes(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) * self.dtype.itemsize

    def read(self) -> np.ndarray:
        try:
            actual = self.path.stat().st_size
        except OSError as exc:
            raise UsageError(f"cannot read {self.path}: {exc.strerror}") from None
        if actual != self.expected_bytes:
            raise UsageError(
                f"{self.path}: expected {self.expected_bytes} bytes for "
                f"{'x'.join(map(str, self.dims))} {self.sample_type}, found {actual} bytes")
        data = np.fromfile(self.path, dtype=self.dtype).reshape(self.dims)
        return data.astype(data.dtype.newbyteorder("="))


def parse_dims(text: str) -> tuple:
    try:
        dims = tuple(int(p) for p in text.replace("x", ",").split(","))
    except ValueError:
        raise UsageError(f"bad dimension list {text!r}") from None
    if not dims or any(d < 1 for d in dims):
        raise UsageError(f"dimensions must be positive integers, got {text!r}")
    return dims


def _volume(args) -> RawVolume:
    return RawVolume(Path(args.input), args.type, parse_dims(args.size), args.endian == "big")


def _target(args) -> ErrorTarget:
    for kind, value in (("eps", args.eps), ("rmse", args.rmse), ("psnr", args.psnr)):
        if value is not None:
            try:
                return ErrorTarget(kind, value)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
    raise UsageError("one of -e, -r or -p is required")


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def cmd_compress(args) -> int:
    vol = _volume(args)
    target = _target(args)
    data = vol.read()
    t0 = time.perf_counter()
    container, report = compress_report(data, target, vol.sample_type)
    blob = container.to_bytes()
    t_total = time.perf_counter() - t0
    Path(args.output).write_bytes(blob)

    stats = {"target": str(target), "sse_target": _fmt(report.sse_target)}
    if args.verify:
        m = metrics(data, decompress(CompressedContainer.from_bytes(blob)))
        stats.update(eps=_fmt(m.eps), rmse=_fmt(m.rmse), psnr=_fmt(m.psnr), maxerr=_fmt(m.maxerr))
    ratio = vol.expected_bytes / len(blob)
    stats.update(bytes=str(len(blob)), ratio=_fmt(ratio), t_transform=f"{report.t_transform:.6f}",
                 t_coding=f"{report.t_coding:.6f}", t_total=f"{t_total:.6f}")
    print(" ".join(f"{k}={v}" for k, v in stats.items()))
    summary = f"{vol.path} -> {args.output}: {len(blob)} bytes, ratio {ratio:.2f}:1, {t_total:.3f} s"
    if args.verify:
        summary += f", eps {stats['eps']}, psnr {float(stats['psnr']):.2f} dB"
    print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_decompress(args) -> int:
    try:
        blob = Path(args.input).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    container = CompressedContainer.from_bytes(blob)
    spec = None
    if args.cut:
        try:
            spec = parse_resample_spec(args.cut, container.dims)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    out = decompress(container, resample=spec)
    dtype = SAMPLE_DTYPES[container.sample_type]
    if args.endian == "big":
        dtype = dtype.newbyteorder(">")
    out.astype(dtype).tofile(args.output)
    print(f"dims={','.join(map(str, out.shape))} type={container.sample_type} bytes={out.size * dtype.itemsize}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        targets = [ErrorTarget.parse(t) for t in args.targets.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not targets:
        raise UsageError("--targets needs at least one target")
    vol = _volume(args)
    data = vol.read()
    print(CSV_HEADER)
    for target in targets:
        t0 = time.perf_counter()
        container, _ = compress_report(data, target, vol.sample_type)
        blob = container.to_bytes()
        t1 = time.perf_counter()
        rec = decompress(CompressedContainer.from_bytes(blob))
        t2 = time.perf_counter()
        m = metrics(data, rec)
        row = [str(target), _fmt(m.eps), _fmt(m.rmse), _fmt(m.psnr), str(len(blob)),
               _fmt(vol.expected_bytes / len(blob)), f"{t1 - t0:.6f}", f"{t2 - t1:.6f}"]
        print(",".join(row), flush=True)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tuckercodec", description="Lossy compressor for gridded scalar fields.")
    sub = p.add_subparsers(dest="command", required=True)

    def volume_args(sp):
        sp.add_argument("-i", "--input", required=True, help="raw headerless input file")
        sp.add_argument("-t", "--type", required=True, choices=sorted(SAMPLE_DTYPES), help="sample type")
        sp.add_argument("-s", "--size", required=True, help="dimensions, e.g. 256,256,178")
        sp.add_argument("--endian", choices=("little", "big"), default="little")

    c = sub.add_parser("compress", help="compress a raw volume")
    volume_args(c)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("-e", dest="eps", type=float, help="relative error target")
    g.add_argument("-r", dest="rmse", type=float, help="RMSE target")
    g.add_argument("-p", dest="psnr", type=float, help="PSNR target in dB")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--verify", action="store_true", help="decode again and report achieved error")
    c.set_defaults(func=cmd_compress)

    d = sub.add_parser("decompress", help="reconstruct a raw volume")
    d.add_argument("-i", "--input", required=True)
    d.add_argument("-o", "--output", required=True)
    d.add_argument("--cut", help="per-mode resample spec, e.g. -,10:50,box2")
    d.add_argument("--endian", choices=("little", "big"), default="little")
    d.set_defaults(func=cmd_decompress)

    b = sub.add_parser("bench", help="rate-distortion sweep as CSV")
    volume_args(b)
    b.add_argument("--targets", required=True, help="comma list such as p40,p60,e0.01")
    b.set_defaults(func=cmd_bench)
    return p


def _join_cut(argv):
    # resample specs may start with "-", which argparse would take for a flag
    out = list(argv)
    for i, a in enumerate(out[:-1]):
        if a == "--cut":
            out[i:i + 2] = [f"--cut={out[i + 1]}"]
            break
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(_join_cut(sys.argv[1:] if argv is None else argv))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tuckercodec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorruptStreamError, DegenerateInputError, CodecError, ArithmeticError) as exc:
        print(f"tuckercodec: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"tuckercodec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"tuckercodec: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
