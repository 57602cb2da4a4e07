"""Deliberately naive pure-Python re-implementation used as a test oracle.

Everything here is written from the algorithm description with plain ints,
floats and lists; nothing is shared with the numba kernels.
"""

from __future__ import annotations

import math
import struct

NUDGE = 2.0**-52


def plcm(x: float, p: float) -> float:
    if x > 0.5:
        x = 1.0 - x
    y = x / p if x < p else (x - p) / (0.5 - p)
    if y in (0.0, p, 0.5, 1.0):
        y += NUDGE
        if y > 1.0:
            y -= 1.0
    return y


def lasm(x: float, y: float, mu: float) -> tuple[float, float]:
    x1 = math.sin(math.pi * mu * (y + 3.0) * (x * (1.0 - x)))
    y1 = math.sin(math.pi * mu * (x1 + 3.0) * (y * (1.0 - y)))
    return x1, y1


def low48(v: float) -> list[int]:
    bits = struct.unpack("<Q", struct.pack("<d", v))[0] & ((1 << 48) - 1)
    return [(bits >> (8 * k)) & 0xFF for k in range(6)]


class RefPrbg:
    """lanes: list of (x, p) for plcm or (x, y, mu) for lasm."""

    def __init__(self, kind: str, lanes, warmup: int = 256):
        self.kind = kind
        if kind == "plcm":
            self.lanes = []
            for x, p in lanes:
                if x in (0.0, p, 0.5, 1.0):
                    x += NUDGE
                    if x > 1.0:
                        x -= 1.0
                self.lanes.append([x, p])
        else:
            self.lanes = [list(s) for s in lanes]
        self.buf: list[int] = []
        for _ in range(warmup):
            self._step()

    def _step(self) -> list[int]:
        out = None
        for lane in self.lanes:
            if self.kind == "plcm":
                lane[0] = plcm(lane[0], lane[1])
                chunk = low48(lane[0])
            else:
                lane[0], lane[1] = lasm(lane[0], lane[1], lane[2])
                chunk = low48(lane[0]) + low48(lane[1])
            out = chunk if out is None else [a ^ b for a, b in zip(out, chunk)]
        return out

    def fill(self, count: int) -> list[int]:
        while len(self.buf) < count:
            self.buf.extend(self._step())
        out, self.buf = self.buf[:count], self.buf[count:]
        return out


def chirikov_offset(alpha: int, w: int, s_c: int) -> int:
    return math.floor(s_c * math.sin(2.0 * math.pi * alpha / w)) % w


def encrypt(pixels, n: int, r: int, streams, s_c: int):
    """pixels: nested list [row][col] -> [R, G, B]; streams: per-worker byte lists."""
    w = len(pixels)
    h = w // n
    length = h * w * 3
    cur = [list(ch for px in row for ch in px) for row in pixels]
    flat = [v for row in cur for v in row]
    for j in range(r):
        conf = [0] * len(flat)
        for a in range(w):
            for o in range(w):
                alpha = (a + o) % w
                beta = (o + chirikov_offset(alpha, w, s_c)) % w
                for c in range(3):
                    conf[(alpha * w + beta) * 3 + c] = flat[(a * w + o) * 3 + c]
        out = [0] * len(conf)
        for i in range(n):
            nb = (i + 1) % n
            prev = conf[nb * length + length - 1]
            stream = streams[i][j * length : (j + 1) * length]
            for k in range(length):
                b = stream[k]
                c = b ^ ((conf[i * length + k] + b) % 256) ^ prev
                out[i * length + k] = c
                prev = c
        flat = out
    return [[flat[(y * w + x) * 3 : (y * w + x) * 3 + 3] for x in range(w)] for y in range(w)]
