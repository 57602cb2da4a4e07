"""Byte-generation, phase and per-frame benchmarks written as CSV files.

The defaults are small enough for a laptop run; ``--full`` uses the frame
counts and sides of the chosen preset.
"""

import argparse
import sys

from _common import ensure_dir
from chaosvid import bench


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--map", choices=["plcm", "lasm"], default="plcm")
    ap.add_argument("--threads", default="1,2,4,8")
    ap.add_argument("--preset", choices=sorted(bench.PRESETS), default="table")
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--out", default="results/bench")
    args = ap.parse_args(argv)

    out = ensure_dir(args.out)
    threads = [int(t) for t in args.threads.split(",")]
    preset = bench.PRESETS[args.preset]
    if args.full:
        iterations, images, frames, sides = 5 * 10**7, 100, preset.frame_count, preset.sides
    else:
        iterations, images, frames, sides = 2 * 10**6, 10, 24, (96, 192, 288, 384, 480)

    gen = bench.bench_bytegen(args.map, threads, iterations)
    (out / "bytegen.csv").write_text(bench.records_to_csv(gen))
    phases = bench.bench_phases(960 if args.full else 480, threads, 5, images, args.map)
    (out / "phases.csv").write_text(bench.records_to_csv(phases))
    video = []
    for n in threads:
        usable = tuple(s for s in sides if s % n == 0)
        video += bench.bench_video(usable, n, 5, frames, preset.fps, args.map)
    text = bench.records_to_csv(video)
    (out / "video.csv").write_text(text)
    print(bench.records_to_csv(gen) + bench.records_to_csv(phases) + text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
