"""Histogram, correlation, entropy and differential statistics for plain and cipher images.

    python3 scripts/reproduce_statistics.py [--image lena.ppm] [--map lasm] [--trials 20]
"""

import argparse
import sys

import numpy as np

from _common import ensure_dir, key_from_args, load_image
from chaosvid import analysis, bench
from chaosvid.engine import Frame, FrameCipher
from chaosvid.videoio import pad_to_frame, write_ppm


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--image", help="P6 image (defaults to the scikit-image astronaut)")
    ap.add_argument("--map", choices=["plcm", "lasm"], default="plcm")
    ap.add_argument("--key", help="hex key; random from --seed otherwise")
    ap.add_argument("--threads", type=int, default=8)
    ap.add_argument("--rounds", type=int, default=5)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/statistics")
    args = ap.parse_args(argv)

    out = ensure_dir(args.out)
    plain = pad_to_frame(load_image(args.image), args.threads)
    key = key_from_args(args, args.map)
    with FrameCipher(key, args.threads, args.rounds) as c:
        cipher = c.encrypt(plain)
    write_ppm(out / "cipher.ppm", cipher.pixels)

    for label, px in (("plain", plain.pixels), ("cipher", cipher.pixels)):
        text = analysis.analyze(px, seed=args.seed).to_text()
        (out / f"{label}.txt").write_text(text)
        print(f"== {label}\n{text}")

    npcr, uaci = [], []
    for t in range(args.trials):
        n_, u_ = bench.differential_trial(key, args.threads, args.rounds, plain, seed=args.seed + t)
        npcr.append(n_)
        uaci.append(u_)
    npcr, uaci = np.array(npcr), np.array(uaci)
    lines = ["channel,npcr_mean,npcr_min,npcr_max,uaci_mean,uaci_min,uaci_max"]
    for c, name in enumerate(analysis.CHANNEL_NAMES):
        lines.append(
            f"{name},{npcr[:, c].mean():.4f},{npcr[:, c].min():.4f},{npcr[:, c].max():.4f},"
            f"{uaci[:, c].mean():.4f},{uaci[:, c].min():.4f},{uaci[:, c].max():.4f}"
        )
    (out / "differential.csv").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


if __name__ == "__main__":
    sys.exit(main())
