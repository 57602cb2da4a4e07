import random
from pathlib import Path

import numpy as np

from chaosvid.keying import generate_key, parse_key
from chaosvid.videoio import read_ppm


def load_image(path):
    """A PPM from disk, or the scikit-image astronaut when no path is given."""
    if path:
        return read_ppm(path)
    from skimage import data

    return np.ascontiguousarray(data.astronaut(), dtype=np.uint8)


def key_from_args(args, kind="plcm", offset=0):
    if getattr(args, "key", None):
        return parse_key(args.key)
    return generate_key(kind, random.Random(args.seed + offset))


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
