"""Multi-worker confusion/diffusion cipher for square RGB frames.

A frame of side ``w`` is cut into ``n`` horizontal bands of ``w // n`` rows.
Each of the ``r`` rounds is two barrier-separated phases:

* confusion: every worker moves the pixels of its band through the discretised
  Chirikov map ``(a, o) -> ((a + o) mod w, (o + d(alpha)) mod w)`` with
  ``d(alpha) = floor(s_c * sin(2 pi alpha / w))``;
* diffusion: every worker chains over its band's interleaved bytes with
  ``c = b ^ ((v + b) mod 256) ^ prev``.  The first byte of band ``i`` is seeded
  with the last byte of band ``(i + 1) mod n`` taken from the pre-diffusion
  snapshot, which couples all bands.

Phases read an immutable snapshot buffer and write a second buffer, so the two
pixel buffers simply swap roles from phase to phase.
"""

from __future__ import annotations

import enum
import math
import threading
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from numba import njit

from .keying import Coordinator, Key

DEFAULT_ROUNDS = 5
CHANNELS = 3


class Direction(enum.Enum):
    ENCRYPT = "encrypt"
    DECRYPT = "decrypt"


@dataclass
class Frame:
    """A square ``side x side`` RGB24 frame plus its pre-padding size."""

    pixels: np.ndarray
    orig_width: int = -1
    orig_height: int = -1

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != CHANNELS or px.shape[0] != px.shape[1]:
            raise ValueError(f"frame pixels must have shape (w, w, 3), got {px.shape}")
        if px.dtype != np.uint8:
            raise ValueError("frame pixels must be uint8")
        self.pixels = np.ascontiguousarray(px)
        if self.orig_width < 0:
            self.orig_width = px.shape[1]
        if self.orig_height < 0:
            self.orig_height = px.shape[0]

    @property
    def side(self) -> int:
        return self.pixels.shape[0]

    def cropped(self) -> np.ndarray:
        return self.pixels[: self.orig_height, : self.orig_width]

    def copy(self) -> "Frame":
        return Frame(self.pixels.copy(), self.orig_width, self.orig_height)

    def with_pixels(self, pixels: np.ndarray) -> "Frame":
        return Frame(pixels, self.orig_width, self.orig_height)


@dataclass
class EncryptionContext:
    """Per-frame state: worker generators positioned at this frame and its seed.

    ``worker_prbgs`` only need a ``fill(count)`` method.
    """

    n: int
    r: int
    worker_prbgs: Sequence
    confusion_seed: int
    direction: Direction = Direction.ENCRYPT

    def __post_init__(self):
        if self.n < 1 or self.r < 1:
            raise ValueError("need n >= 1 and r >= 1")
        if len(self.worker_prbgs) != self.n:
            raise ValueError(f"expected {self.n} worker generators, got {len(self.worker_prbgs)}")
        if self.confusion_seed < 0:
            raise ValueError("confusion seed must be non-negative")


# ---------------------------------------------------------------------------
# confusion


def confusion_offsets(w: int, s_c: int) -> np.ndarray:
    """Column shift ``floor(s_c * sin(2 pi alpha / w)) mod w`` for every row alpha."""
    return np.array(
        [math.floor(s_c * math.sin(2.0 * math.pi * alpha / w)) % w for alpha in range(w)],
        dtype=np.int64,
    )


def confusion_destination(a: int, o: int, w: int, s_c: int) -> tuple[int, int]:
    alpha = (a + o) % w
    d = math.floor(s_c * math.sin(2.0 * math.pi * alpha / w))
    return alpha, (o + d) % w


def confusion_source(alpha: int, beta: int, w: int, s_c: int) -> tuple[int, int]:
    d = math.floor(s_c * math.sin(2.0 * math.pi * alpha / w))
    o = (beta - d) % w
    return (alpha - o) % w, o


@njit(cache=True, nogil=True)
def _confuse_rows(src, dst, offsets, r0, r1):
    w = src.shape[0]
    for a in range(r0, r1):
        for o in range(w):
            alpha = (a + o) % w
            beta = (o + offsets[alpha]) % w
            dst[alpha, beta, 0] = src[a, o, 0]
            dst[alpha, beta, 1] = src[a, o, 1]
            dst[alpha, beta, 2] = src[a, o, 2]


@njit(cache=True, nogil=True)
def _inverse_confuse_rows(src, dst, offsets, r0, r1):
    w = src.shape[0]
    for alpha in range(r0, r1):
        d = offsets[alpha]
        for beta in range(w):
            o = (beta - d + w) % w
            a = (alpha - o + w) % w
            dst[a, o, 0] = src[alpha, beta, 0]
            dst[a, o, 1] = src[alpha, beta, 1]
            dst[a, o, 2] = src[alpha, beta, 2]


def _pixels(buf) -> np.ndarray:
    return buf.pixels if isinstance(buf, Frame) else buf


def _check_pair(snapshot: np.ndarray, out: np.ndarray) -> None:
    if snapshot.shape != out.shape:
        raise ValueError("snapshot and output buffers differ in shape")
    if np.shares_memory(snapshot, out):
        raise ValueError("snapshot and output buffers must not alias")


def _check_rows(rows: range, w: int) -> None:
    if rows.step != 1 or rows.start < 0 or rows.stop > w or rows.start > rows.stop:
        raise ValueError(f"rows {rows} not a contiguous range inside [0, {w})")


def confuse(snapshot, out, rows: range, s_c: int, offsets: Optional[np.ndarray] = None) -> None:
    """Scatter the pixels of ``rows`` of ``snapshot`` to their confused positions in ``out``."""
    snapshot, out = _pixels(snapshot), _pixels(out)
    _check_pair(snapshot, out)
    w = snapshot.shape[0]
    _check_rows(rows, w)
    if offsets is None:
        offsets = confusion_offsets(w, s_c)
    _confuse_rows(snapshot, out, offsets, rows.start, rows.stop)


def inverse_confuse(
    snapshot, out, dest_rows: range, s_c: int, offsets: Optional[np.ndarray] = None
) -> None:
    """Send every pixel of confused rows ``dest_rows`` back to its source cell in ``out``."""
    snapshot, out = _pixels(snapshot), _pixels(out)
    _check_pair(snapshot, out)
    w = snapshot.shape[0]
    _check_rows(dest_rows, w)
    if offsets is None:
        offsets = confusion_offsets(w, s_c)
    _inverse_confuse_rows(snapshot, out, offsets, dest_rows.start, dest_rows.stop)


# ---------------------------------------------------------------------------
# diffusion


def diffuse_byte(v, b, prev):
    """Works on ints and on integer numpy arrays alike."""
    return b ^ ((v + b) & 0xFF) ^ prev


def inverse_diffuse_byte(c, b, prev):
    return ((b ^ c ^ prev) - b) & 0xFF


@njit(cache=True, nogil=True)
def _diffuse(src, dst, start, stop, stream, seed):
    prev = np.int64(seed)
    for k in range(stop - start):
        b = np.int64(stream[k])
        v = np.int64(src[start + k])
        c = b ^ ((v + b) & 0xFF) ^ prev
        dst[start + k] = np.uint8(c)
        prev = c


@njit(cache=True, nogil=True)
def _undiffuse_interior(src, dst, start, stop, stream):
    for k in range(1, stop - start):
        b = np.int64(stream[k])
        c = np.int64(src[start + k])
        prev = np.int64(src[start + k - 1])
        dst[start + k] = np.uint8(((b ^ c ^ prev) - b) & 0xFF)


class FirstByteToken(NamedTuple):
    """First byte of a band whose inversion waits for the neighbour's recovered last byte."""

    index: int
    cipher: int
    stream: int


def band_length(w: int, n: int) -> int:
    return (w // n) * w * CHANNELS


def diffusion_seed_index(worker: int, n: int, w: int) -> int:
    """Flat index of the last byte of band ``(worker + 1) mod n``."""
    length = band_length(w, n)
    return ((worker + 1) % n + 1) * length - 1


def _stream_slice(stream, length: int) -> np.ndarray:
    arr = np.asarray(stream, dtype=np.uint8)
    if arr.size < length:
        raise ValueError(f"byte stream underrun: need {length}, got {arr.size}")
    return arr[:length]


def diffuse_subframe(snapshot, out, worker: int, n: int, stream, s_d: Optional[int] = None) -> None:
    """Diffuse band ``worker`` of ``snapshot`` into ``out``.

    ``s_d`` defaults to the coupling rule: the last byte of the next band in
    ``snapshot``.
    """
    snapshot, out = _pixels(snapshot), _pixels(out)
    _check_pair(snapshot, out)
    w = snapshot.shape[0]
    length = band_length(w, n)
    src, dst = snapshot.reshape(-1), out.reshape(-1)
    if s_d is None:
        s_d = int(src[diffusion_seed_index(worker, n, w)])
    start = worker * length
    _diffuse(src, dst, start, start + length, _stream_slice(stream, length), s_d)


def inverse_diffuse_subframe(cipher, out, worker: int, n: int, stream) -> FirstByteToken:
    """Recover every byte of band ``worker`` except the first.

    The returned token is passed to :func:`resolve_first_byte` once all bands'
    interiors are recovered.
    """
    cipher, out = _pixels(cipher), _pixels(out)
    _check_pair(cipher, out)
    w = cipher.shape[0]
    length = band_length(w, n)
    src, dst = cipher.reshape(-1), out.reshape(-1)
    start = worker * length
    stream = _stream_slice(stream, length)
    _undiffuse_interior(src, dst, start, start + length, stream)
    return FirstByteToken(start, int(src[start]), int(stream[0]))


def resolve_first_byte(out, token: FirstByteToken, worker: int, n: int) -> None:
    out = _pixels(out)
    flat = out.reshape(-1)
    s_d = int(flat[diffusion_seed_index(worker, n, out.shape[0])])
    flat[token.index] = inverse_diffuse_byte(token.cipher, token.stream, s_d)


# ---------------------------------------------------------------------------
# worker lanes


class WorkerPool:
    """``n`` persistent threads woken phase by phase by the calling thread.

    ``run(task)`` releases every worker into ``task(i)`` and returns once all of
    them have finished, so each call is one barrier-delimited phase.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one worker")
        self.n = n
        self._start = threading.Barrier(n + 1)
        self._done = threading.Barrier(n + 1)
        self._task: Optional[Callable[[int], None]] = None
        self._errors: list[Optional[BaseException]] = [None] * n
        self._closed = False
        self._threads = [
            threading.Thread(target=self._loop, args=(i,), name=f"chaosvid-worker-{i}", daemon=True)
            for i in range(n)
        ]
        for t in self._threads:
            t.start()

    def _loop(self, i: int) -> None:
        while True:
            self._start.wait()
            task = self._task
            if task is None:
                self._done.wait()
                return
            try:
                task(i)
            except BaseException as exc:  # re-raised on the coordinating thread
                self._errors[i] = exc
            self._done.wait()

    def run(self, task: Callable[[int], None]) -> None:
        if self._closed:
            raise RuntimeError("worker pool is closed")
        self._task = task
        self._start.wait()
        self._done.wait()
        self._task = None
        errors = [e for e in self._errors if e is not None]
        self._errors = [None] * self.n
        if errors:
            raise errors[0]

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        self._task = None
        self._start.wait()
        self._done.wait()
        for t in self._threads:
            t.join()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class _Phases:
    def __init__(self, n: int, pool: Optional[WorkerPool], timings: Optional[dict]):
        if pool is not None and pool.n != n:
            raise ValueError(f"pool has {pool.n} workers, context needs {n}")
        self.n = n
        self.pool = pool
        self.timings = timings

    def __call__(self, name: str, task: Callable[[int], None]) -> None:
        t0 = time.perf_counter()
        if self.pool is None:
            for i in range(self.n):
                task(i)
        else:
            self.pool.run(task)
        if self.timings is not None:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - t0


def _geometry(frame: Frame, n: int) -> tuple[int, int, int]:
    w = frame.side
    if w < n or w % n:
        raise ValueError(f"frame side {w} must be a positive multiple of n={n}")
    h = w // n
    return w, h, h * w * CHANNELS


def encrypt_frame(
    frame: Frame,
    ctx: EncryptionContext,
    pool: Optional[WorkerPool] = None,
    timings: Optional[dict] = None,
) -> Frame:
    """Run ``ctx.r`` confusion/diffusion rounds over ``frame``.

    Without a pool the ``n`` workers run one after another on the calling
    thread; the output is identical either way.
    """
    n, r, s_c = ctx.n, ctx.r, ctx.confusion_seed
    w, h, length = _geometry(frame, n)
    run = _Phases(n, pool, timings)
    offsets = confusion_offsets(w, s_c)
    cur = frame.pixels.copy()
    nxt = np.empty_like(cur)
    cur_flat, nxt_flat = cur.reshape(-1), nxt.reshape(-1)
    streams: list = [None] * n

    def draw(i):
        streams[i] = _stream_slice(ctx.worker_prbgs[i].fill(r * length), r * length)

    run("bytegen", draw)
    for j in range(r):

        def confusion(i):
            _confuse_rows(cur, nxt, offsets, i * h, (i + 1) * h)

        def diffusion(i, j=j):
            start = i * length
            seed = nxt_flat[diffusion_seed_index(i, n, w)]
            chunk = streams[i][j * length : (j + 1) * length]
            _diffuse(nxt_flat, cur_flat, start, start + length, chunk, seed)

        run("confusion", confusion)
        run("diffusion", diffusion)
    return frame.with_pixels(cur)


def decrypt_frame(
    frame: Frame,
    ctx: EncryptionContext,
    pool: Optional[WorkerPool] = None,
    timings: Optional[dict] = None,
) -> Frame:
    """Exact inverse of :func:`encrypt_frame` for the same context."""
    n, r, s_c = ctx.n, ctx.r, ctx.confusion_seed
    w, h, length = _geometry(frame, n)
    run = _Phases(n, pool, timings)
    offsets = confusion_offsets(w, s_c)
    cur = frame.pixels.copy()
    nxt = np.empty_like(cur)
    cur_flat, nxt_flat = cur.reshape(-1), nxt.reshape(-1)
    streams: list = [None] * n
    tokens: list = [None] * n

    def draw(i):
        streams[i] = _stream_slice(ctx.worker_prbgs[i].fill(r * length), r * length)

    run("bytegen", draw)
    for j in reversed(range(r)):

        def undiffusion(i, j=j):
            start = i * length
            chunk = streams[i][j * length : (j + 1) * length]
            _undiffuse_interior(cur_flat, nxt_flat, start, start + length, chunk)
            tokens[i] = FirstByteToken(start, int(cur_flat[start]), int(chunk[0]))

        def unconfusion(i):
            tok = tokens[i]
            s_d = int(nxt_flat[diffusion_seed_index(i, n, w)])
            nxt_flat[tok.index] = inverse_diffuse_byte(tok.cipher, tok.stream, s_d)
            _inverse_confuse_rows(nxt, cur, offsets, i * h, (i + 1) * h)

        run("diffusion", undiffusion)
        run("confusion", unconfusion)
    return frame.with_pixels(cur)


def confusion_rounds(
    frame: Frame, s_c: int, n: int, rounds: int, pool: Optional[WorkerPool] = None,
    timings: Optional[dict] = None,
) -> Frame:
    """Apply only the confusion phase ``rounds`` times."""
    w, h, _ = _geometry(frame, n)
    run = _Phases(n, pool, timings)
    offsets = confusion_offsets(w, s_c)
    cur = frame.pixels.copy()
    nxt = np.empty_like(cur)
    for _ in range(rounds):
        run("confusion", lambda i: _confuse_rows(cur, nxt, offsets, i * h, (i + 1) * h))
        cur, nxt = nxt, cur
    return frame.with_pixels(cur)


def diffusion_rounds(
    frame: Frame, worker_prbgs: Sequence, rounds: int, pool: Optional[WorkerPool] = None,
    timings: Optional[dict] = None,
) -> Frame:
    """Apply only the diffusion phase ``rounds`` times, drawing the bytes first."""
    n = len(worker_prbgs)
    w, _, length = _geometry(frame, n)
    run = _Phases(n, pool, timings)
    cur = frame.pixels.copy()
    nxt = np.empty_like(cur)
    streams: list = [None] * n

    def draw(i):
        streams[i] = _stream_slice(worker_prbgs[i].fill(rounds * length), rounds * length)

    run("bytegen", draw)
    for j in range(rounds):
        src, dst = cur.reshape(-1), nxt.reshape(-1)

        def diffusion(i, j=j, src=src, dst=dst):
            start = i * length
            seed = src[diffusion_seed_index(i, n, w)]
            _diffuse(src, dst, start, start + length, streams[i][j * length : (j + 1) * length], seed)

        run("diffusion", diffusion)
        cur, nxt = nxt, cur
    return frame.with_pixels(cur)


# ---------------------------------------------------------------------------


class FrameCipher:
    """Key-driven cipher over a sequence of frames.

    Holds the coordinator, the ``n`` worker generators and (in parallel mode)
    the worker threads.  Frames must be encrypted or decrypted in order; use
    :meth:`skip` to jump ahead.
    """

    def __init__(self, key: Key, n: int, r: int = DEFAULT_ROUNDS, parallel: bool = True):
        if n < 1 or r < 1:
            raise ValueError("need n >= 1 and r >= 1")
        self.key = key
        self.n = n
        self.r = r
        self.coordinator = Coordinator(key)
        self.params = self.coordinator.derive_worker_params(n)
        self.prbgs = [self.params.prbg(i) for i in range(n)]
        self.pool = WorkerPool(n) if parallel else None
        self.frame_index = 0
        self.timings: dict = defaultdict(float)

    def context(self, direction: Direction = Direction.ENCRYPT) -> EncryptionContext:
        seed = self.coordinator.next_confusion_seed()
        self.frame_index += 1
        return EncryptionContext(self.n, self.r, self.prbgs, seed, direction)

    def encrypt(self, frame: Frame, timings: Optional[dict] = None) -> Frame:
        ctx = self.context(Direction.ENCRYPT)
        return encrypt_frame(frame, ctx, self.pool, self.timings if timings is None else timings)

    def decrypt(self, frame: Frame, timings: Optional[dict] = None) -> Frame:
        ctx = self.context(Direction.DECRYPT)
        return decrypt_frame(frame, ctx, self.pool, self.timings if timings is None else timings)

    def skip(self, frames: int, side: int) -> None:
        """Advance past ``frames`` frames of the given side without processing them."""
        if side % self.n:
            raise ValueError(f"side {side} not divisible by n={self.n}")
        budget = self.r * band_length(side, self.n)
        for _ in range(frames):
            self.coordinator.next_confusion_seed()
            self.frame_index += 1
            for g in self.prbgs:
                g.fill(budget)

    def close(self) -> None:
        if self.pool is not None:
            self.pool.close()
            self.pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

