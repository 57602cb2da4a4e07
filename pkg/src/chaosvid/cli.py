"""Command line entry point: ``chaosvid <command> ...`` (or ``python -m chaosvid``)."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, bench
from .chaos import MapKind
from .engine import DEFAULT_ROUNDS, Frame, FrameCipher
from .errors import ChaosVidError
from .keying import Coordinator, Key, derive_worker_params, generate_key, parse_key
from .videoio import (
    ContainerHeader,
    FrameSource,
    load_frame,
    pad_to_frame,
    read_container,
    read_ppm,
    store_plain_frame,
    write_container,
    write_ppm,
)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _read_key(args) -> Key:
    if args.key and args.key_file:
        raise ValueError("give either --key or --key-file, not both")
    if args.key:
        key = parse_key(args.key)
    elif args.key_file:
        key = parse_key(Path(args.key_file).read_text())
    else:
        raise ValueError("a key is required (--key or --key-file)")
    if getattr(args, "map", None) and MapKind.parse(args.map) != key.map_kind:
        raise ValueError(f"--map {args.map} disagrees with the key's map {key.map_kind.name.lower()}")
    return key


def _add_key_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--key", help="key as canonical hex")
    p.add_argument("--key-file", help="file holding one hex key line")
    p.add_argument("--map", choices=["plcm", "lasm"], help="expected map family of the key")


def _load_images(path: str, frame: Optional[int] = None):
    """Return (container header or None, list of Frames) for a .cve or PPM file."""
    p = Path(path)
    if p.suffix.lower() == ".cve":
        with open(p, "rb") as fh:
            header, frames = read_container(fh)
            frames = list(frames)
        if frame is not None:
            frames = [frames[frame]]
        return header, frames
    px = read_ppm(p)
    h, w = px.shape[:2]
    if h == w:
        return None, [Frame(px)]
    return None, [pad_to_frame(px, 1)]


def _save_images(path: str, header: Optional[ContainerHeader], frames: list[Frame]) -> None:
    if header is not None:
        header.frame_count = len(frames)
        with open(path, "wb") as fh:
            write_container(fh, header, frames)
    else:
        write_ppm(path, frames[0].cropped())


# ---------------------------------------------------------------------------


def cmd_keygen(args) -> int:
    key = generate_key(args.map)
    text = key.to_hex() + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_encrypt(args) -> int:
    key = _read_key(args)
    src = FrameSource.open(args.input, args.width, args.height, args.fps or 0)
    n, r = args.threads, args.rounds
    first = load_frame(src, n)
    header = ContainerHeader(key.map_kind, first.side, first.orig_width, first.orig_height, n, r,
                             fps=args.fps or 0, frame_count=0)
    with FrameCipher(key, n, r, parallel=not args.serial) as cipher, open(args.output, "wb") as out:

        def frames():
            yield cipher.encrypt(first)
            for px in src:
                yield cipher.encrypt(pad_to_frame(px, n))

        count = write_container(out, header, frames())
    src.close()
    print(f"encrypted {count} frame(s) -> {args.output}", file=sys.stderr)
    return 0


def cmd_decrypt(args) -> int:
    key = _read_key(args)
    with open(args.input, "rb") as fh:
        header, payloads = read_container(fh)
        n = args.threads if args.threads is not None else header.n
        r = args.rounds if args.rounds is not None else header.r
        header.check_context(key.map_kind, n, r)
        out = Path(args.output)
        fmt = args.format or ("raw" if out.suffix.lower() in (".raw", ".rgb") else "ppm")
        count = 0
        with FrameCipher(key, n, r, parallel=not args.serial) as cipher:
            if fmt == "raw":
                with open(out, "wb") as sink:
                    for fr in payloads:
                        store_plain_frame(cipher.decrypt(fr), sink, "raw")
                        count += 1
            elif header.frame_count == 1 and out.suffix.lower() in (".ppm", ".pnm"):
                for fr in payloads:
                    store_plain_frame(cipher.decrypt(fr), out, "ppm")
                    count += 1
            else:
                out.mkdir(parents=True, exist_ok=True)
                for fr in payloads:
                    store_plain_frame(cipher.decrypt(fr), out / f"frame_{count:05d}.ppm", "ppm")
                    count += 1
    print(f"decrypted {count} frame(s) -> {args.output}", file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    _, frames = _load_images(args.input, args.frame)
    px = frames[0].pixels if args.padded else frames[0].cropped()
    other = None
    if args.other:
        _, others = _load_images(args.other, args.frame)
        other = others[0].pixels if args.padded else others[0].cropped()
    report = analysis.analyze(px, other, samples=args.samples, seed=args.seed)
    text = report.to_csv() if args.format == "csv" else report.to_text()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    preset = bench.PRESETS[args.preset]
    threads = _int_list(args.threads) if args.threads else list(preset.worker_counts)
    if args.kind == "bytegen":
        records = bench.bench_bytegen(args.map, threads, args.iterations, repetitions=args.repetitions)
    elif args.kind == "phases":
        side = _int_list(args.sides)[0] if args.sides else 960
        records = bench.bench_phases(side, threads, args.rounds, args.frames or 100, args.map)
    else:
        sides = _int_list(args.sides) if args.sides else list(preset.sides)
        records = []
        for n in threads:
            records += bench.bench_video(sides, n, args.rounds, args.frames or preset.frame_count,
                                         args.fps or preset.fps, args.map)
    text = bench.records_to_csv(records)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    key = _read_key(args) if (args.key or args.key_file) else None
    px = read_ppm(args.input)
    frame = pad_to_frame(px, args.threads)
    rows = bench.sweep_rounds(frame, args.max_rounds, key, args.threads, args.seed, args.mode)
    text = bench.sweep_to_csv(rows)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_noise(args) -> int:
    header, frames = _load_images(args.input)
    noisy = [f.with_pixels(analysis.add_salt_pepper(f.pixels, args.rate, args.seed + k))
             for k, f in enumerate(frames)]
    _save_images(args.output, header, noisy)
    return 0


def _parse_block(text: str) -> analysis.Block:
    parts = text.split(",")
    if len(parts) not in (3, 4):
        raise ValueError(f"block must be x,y,side[,black|white], got {text!r}")
    fill = parts[3] if len(parts) == 4 else "black"
    blk = analysis.Block(int(parts[0]), int(parts[1]), int(parts[2]), fill)
    blk.value  # validates fill
    return blk


def cmd_crop(args) -> int:
    header, frames = _load_images(args.input)
    blocks = [_parse_block(b) for b in args.block]
    _save_images(args.output, header, [f.with_pixels(analysis.crop_blocks(f.pixels, blocks)) for f in frames])
    return 0


def cmd_nist_export(args) -> int:
    key = _read_key(args)
    if args.bytes < 0:
        raise ValueError("--bytes must be non-negative")
    if args.coordinator:
        gen = Coordinator(key).prbg
    else:
        if not 0 <= args.worker < args.threads:
            raise ValueError(f"worker {args.worker} outside 0..{args.threads - 1}")
        gen = derive_worker_params(key, args.threads).prbg(args.worker)
    data = gen.fill(args.bytes)
    with open(args.output, "wb") as fh:
        if args.format == "ascii":
            fh.write((np.unpackbits(data) + ord("0")).astype(np.uint8).tobytes())
        else:
            fh.write(data.tobytes())
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chaosvid", description="Parallel chaotic video encryption")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="print a fresh random key")
    p.add_argument("--map", choices=["plcm", "lasm"], default="plcm")
    p.add_argument("--out", dest="out")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt a PPM image, PPM directory or raw RGB24 stream")
    _add_key_args(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--threads", type=int, default=8)
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--fps", type=int)
    p.add_argument("--serial", action="store_true", help="simulate the workers on one thread")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a CVE1 container")
    _add_key_args(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--threads", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--format", choices=["ppm", "raw"])
    p.add_argument("--serial", action="store_true")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("analyze", help="statistical report for an image or container frame")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--other", help="second image for NPCR/UACI")
    p.add_argument("--frame", type=int, default=0, help="frame index inside a container")
    p.add_argument("--padded", action="store_true", help="analyse the full padded frame")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--out", dest="output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="throughput and latency benchmarks (CSV)")
    p.add_argument("kind", choices=["bytegen", "phases", "video"])
    p.add_argument("--map", choices=["plcm", "lasm"], default="plcm")
    p.add_argument("--threads", help="comma separated worker counts")
    p.add_argument("--sides", help="comma separated frame sides")
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS)
    p.add_argument("--frames", type=int)
    p.add_argument("--fps", type=int)
    p.add_argument("--iterations", type=int, default=5 * 10**7)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--preset", choices=sorted(bench.PRESETS), default="table")
    p.add_argument("--out", dest="output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="NPCR/UACI/correlation versus rounds (CSV)")
    _add_key_args(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--threads", type=int, default=8)
    p.add_argument("--max-rounds", type=int, default=10)
    p.add_argument("--mode", choices=["cipher", "diffusion"], default="cipher")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", dest="output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("noise", help="add salt-and-pepper noise to an image or container")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("crop", help="blank square blocks of an image or container")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--block", action="append", required=True, help="x,y,side[,black|white]")
    p.set_defaults(func=cmd_crop)

    p = sub.add_parser("nist-export", help="dump raw generator bytes for an external test suite")
    _add_key_args(p)
    p.add_argument("--bytes", type=int, required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--threads", type=int, default=8)
    p.add_argument("--worker", type=int, default=0)
    p.add_argument("--coordinator", action="store_true", help="export the coordinator stream")
    p.add_argument("--format", choices=["binary", "ascii"], default="binary")
    p.set_defaults(func=cmd_nist_export)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ChaosVidError, ValueError, OSError, IndexError) as exc:
        print(f"chaosvid: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
