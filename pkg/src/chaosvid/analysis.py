"""Statistical and robustness measurements for plain and cipher images.

All functions take ``(height, width, 3)`` uint8 arrays (or single channels
where noted) and never modify their inputs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

CHANNEL_NAMES = ("R", "G", "B")
DIRECTIONS = {"H": (0, 1), "V": (1, 0), "D": (1, 1)}
CHI2_CRITICAL = 293.25  # chi-square(0.05, 255)
NPCR_EXPECTED = 99.5893  # 512x512, alpha = 0.05
UACI_INTERVAL = (33.3730, 33.5541)
LOCAL_K = 30
LOCAL_TB = 1936


def _pixels(frame) -> np.ndarray:
    return getattr(frame, "pixels", frame)


def histogram(channel: np.ndarray) -> np.ndarray:
    return np.bincount(np.asarray(channel, dtype=np.uint8).ravel(), minlength=256).astype(np.int64)


def histograms(pixels) -> np.ndarray:
    """Per-channel histograms, shape (channels, 256)."""
    px = _pixels(pixels)
    return np.stack([histogram(px[..., c]) for c in range(px.shape[-1])])


def variance(hist: np.ndarray) -> float:
    """Mean half squared difference over all ordered pairs of bin counts."""
    z = np.asarray(hist, dtype=np.float64)
    diff = z[:, None] - z[None, :]
    return float(0.5 * np.square(diff).sum() / 256**2)


def chi_square(hist: np.ndarray) -> float:
    z = np.asarray(hist, dtype=np.float64)
    expected = z.sum() / 256.0
    return float(np.square(z - expected).sum() / expected)


def entropy(hist: np.ndarray) -> float:
    z = np.asarray(hist, dtype=np.float64)
    total = z.sum()
    if total <= 0:
        raise ValueError("entropy of an empty histogram")
    p = z[z > 0] / total
    return float(np.sum(p * np.log2(1.0 / p)))


def correlation(x: Sequence, y: Sequence) -> Optional[float]:
    """Pearson coefficient with population moments; ``None`` when either side is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("correlation needs two equal-length samples of at least 2 values")
    dx = x - x.mean()
    dy = y - y.mean()
    var_x = np.mean(dx * dx)
    var_y = np.mean(dy * dy)
    if var_x == 0.0 or var_y == 0.0:
        return None
    return float(np.mean(dx * dy) / math.sqrt(var_x * var_y))


def pixel_correlation(a, b) -> list[Optional[float]]:
    """Per-channel correlation between two whole images, position by position."""
    a, b = _pixels(a), _pixels(b)
    if a.shape != b.shape:
        raise ValueError("images differ in shape")
    return [correlation(a[..., c].ravel(), b[..., c].ravel()) for c in range(a.shape[-1])]


def sample_adjacent_pairs(pixels, direction: str, count: int, seed: int = 0):
    """Draw ``count`` distinct positions that have a neighbour in ``direction``.

    Returns ``(x, y)`` arrays; for a multi-channel image each has shape
    ``(count, channels)``.
    """
    px = _pixels(pixels)
    dy, dx = DIRECTIONS[direction.upper()]
    h, w = px.shape[:2]
    rows, cols = h - dy, w - dx
    available = max(rows, 0) * max(cols, 0)
    if count > available:
        raise ValueError(f"{count} pairs requested but only {available} positions exist")
    rng = np.random.default_rng(seed)
    idx = rng.choice(available, size=count, replace=False) if count else np.empty(0, np.int64)
    r, c = np.divmod(idx, cols)
    return px[r, c], px[r + dy, c + dx]


def adjacent_correlation(pixels, direction: str, count: int = 20000, seed: int = 0):
    x, y = sample_adjacent_pairs(pixels, direction, count, seed)
    if x.ndim == 1:
        return correlation(x, y)
    return [correlation(x[:, c], y[:, c]) for c in range(x.shape[1])]


def _block_positions(h: int, w: int, side: int, k: int, rng) -> list[tuple[int, int]]:
    if (h // side) * (w // side) < k:
        raise ValueError(f"a {w}x{h} image cannot hold {k} disjoint {side}x{side} blocks")
    chosen: list[tuple[int, int]] = []
    for _ in range(1000 * k):
        if len(chosen) == k:
            break
        y = int(rng.integers(0, h - side + 1))
        x = int(rng.integers(0, w - side + 1))
        if all(abs(y - cy) >= side or abs(x - cx) >= side for cy, cx in chosen):
            chosen.append((y, x))
    if len(chosen) < k:
        raise ValueError("could not place enough non-overlapping blocks")
    return chosen


def local_entropy(pixels, k: int = LOCAL_K, t_b: int = LOCAL_TB, seed: int = 0):
    """Mean entropy of ``k`` random disjoint square blocks of ``t_b`` pixels, per channel."""
    px = _pixels(pixels)
    side = math.isqrt(t_b)
    if side * side != t_b:
        raise ValueError(f"block size {t_b} is not a perfect square")
    h, w = px.shape[:2]
    blocks = _block_positions(h, w, side, k, np.random.default_rng(seed))
    if px.ndim == 2:
        px = px[..., None]
    out = []
    for c in range(px.shape[-1]):
        ent = [entropy(histogram(px[y : y + side, x : x + side, c])) for y, x in blocks]
        out.append(float(np.mean(ent)))
    return out if len(out) > 1 else out[0]


def npcr(c1, c2) -> np.ndarray:
    """Percentage of differing values, per channel."""
    a, b = _pixels(c1), _pixels(c2)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return 100.0 * (a != b).reshape(-1, a.shape[-1]).mean(axis=0)


def uaci(c1, c2) -> np.ndarray:
    a, b = _pixels(c1), _pixels(c2)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    diff = np.abs(a.astype(np.int16) - b.astype(np.int16)).reshape(-1, a.shape[-1])
    return 100.0 * diff.mean(axis=0) / 255.0


def add_salt_pepper(pixels, rate: float, seed: int = 0) -> np.ndarray:
    """Set ``round(rate * h * w)`` distinct pixels to black or white (all channels)."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"noise rate {rate} outside [0, 1]")
    px = _pixels(pixels)
    h, w = px.shape[:2]
    count = int(math.floor(rate * h * w + 0.5))
    rng = np.random.default_rng(seed)
    idx = rng.choice(h * w, size=count, replace=False)
    values = np.where(rng.integers(0, 2, size=count) == 1, 255, 0).astype(np.uint8)
    out = px.copy()
    flat = out.reshape(h * w, -1)
    flat[idx] = values[:, None]
    return out


@dataclass(frozen=True)
class Block:
    x: int
    y: int
    side: int
    fill: str = "black"

    @property
    def value(self) -> int:
        if self.fill not in ("black", "white"):
            raise ValueError(f"fill must be black or white, not {self.fill!r}")
        return 0 if self.fill == "black" else 255


def crop_blocks(pixels, blocks: Iterable) -> np.ndarray:
    """Overwrite square regions with black or white, as in lost cipher data."""
    px = _pixels(pixels)
    h, w = px.shape[:2]
    out = px.copy()
    for blk in blocks:
        blk = blk if isinstance(blk, Block) else Block(*blk)
        if blk.side < 0 or blk.x < 0 or blk.y < 0 or blk.x + blk.side > w or blk.y + blk.side > h:
            raise ValueError(f"block {blk} outside a {w}x{h} image")
        out[blk.y : blk.y + blk.side, blk.x : blk.x + blk.side] = blk.value
    return out


# ---------------------------------------------------------------------------
# reports

REPORT_FIELDS = (
    "variance", "chi2", "entropy", "local_entropy", "corr_h", "corr_v", "corr_d", "npcr", "uaci",
)


@dataclass
class AnalysisReport:
    width: int
    height: int
    samples: int
    seed: int
    channels: dict = field(default_factory=dict)

    def mean(self, name: str) -> Optional[float]:
        vals = [ch.get(name) for ch in self.channels.values()]
        if not vals or any(v is None for v in vals):
            return None
        return float(np.mean(vals))

    def to_text(self) -> str:
        lines = [
            "# chaosvid analysis v1",
            f"width={self.width}",
            f"height={self.height}",
            f"samples={self.samples}",
            f"seed={self.seed}",
        ]
        for name, metrics in self.channels.items():
            lines.append("")
            lines.append(f"[{name}]")
            for key in REPORT_FIELDS:
                if key in metrics:
                    lines.append(f"{key}={_fmt(metrics[key])}")
        if any("npcr" in m for m in self.channels.values()):
            lines.append("")
            lines.append("[mean]")
            for key in ("npcr", "uaci"):
                lines.append(f"{key}={_fmt(self.mean(key))}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("channel",) + REPORT_FIELDS)
        for name, metrics in self.channels.items():
            writer.writerow([name] + [_fmt(metrics[k]) if k in metrics else "" for k in REPORT_FIELDS])
        return buf.getvalue()


def _fmt(v) -> str:
    return "degenerate" if v is None else f"{v:.6f}"


def analyze(
    pixels,
    other=None,
    samples: int = 20000,
    seed: int = 0,
    k: int = LOCAL_K,
    t_b: int = LOCAL_TB,
) -> AnalysisReport:
    """Full per-channel report; NPCR/UACI are added when ``other`` is given."""
    px = _pixels(pixels)
    h, w = px.shape[:2]
    report = AnalysisReport(w, h, samples, seed)
    hists = histograms(px)
    try:
        local = local_entropy(px, k, t_b, seed)
    except ValueError:
        local = None
    corr = {d: adjacent_correlation(px, d, min(samples, (h - dy) * (w - dx)), seed)
            for d, (dy, dx) in DIRECTIONS.items()}
    diff_n = diff_u = None
    if other is not None:
        diff_n, diff_u = npcr(px, other), uaci(px, other)
    for c, name in enumerate(CHANNEL_NAMES[: px.shape[-1]]):
        m = {
            "variance": variance(hists[c]),
            "chi2": chi_square(hists[c]),
            "entropy": entropy(hists[c]),
        }
        if local is not None:
            m["local_entropy"] = local[c]
        for d in DIRECTIONS:
            m[f"corr_{d.lower()}"] = corr[d][c]
        if diff_n is not None:
            m["npcr"] = float(diff_n[c])
            m["uaci"] = float(diff_u[c])
        report.channels[name] = m
    return report
