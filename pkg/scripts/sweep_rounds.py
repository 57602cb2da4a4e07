"""NPCR/UACI and confusion-only correlation against the number of rounds (CSV)."""

import argparse
import sys

from _common import ensure_dir, key_from_args, load_image
from chaosvid import bench
from chaosvid.videoio import pad_to_frame


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--image")
    ap.add_argument("--map", choices=["plcm", "lasm"], default="plcm")
    ap.add_argument("--key")
    ap.add_argument("--threads", type=int, default=8)
    ap.add_argument("--max-rounds", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/sweep")
    args = ap.parse_args(argv)

    out = ensure_dir(args.out)
    frame = pad_to_frame(load_image(args.image), args.threads)
    key = key_from_args(args, args.map)
    for mode in ("cipher", "diffusion"):
        rows = bench.sweep_rounds(frame, args.max_rounds, key, args.threads, args.seed, mode)
        text = bench.sweep_to_csv(rows)
        (out / f"sweep_{mode}.csv").write_text(text)
        print(f"== {mode}\n{text}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
