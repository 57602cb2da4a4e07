"""Throughput/latency benchmarks and the rounds sweep.

Timings come from ``time.perf_counter`` on the coordinating thread.  Frames are
built in memory before any timing window opens, and the harness adds no
parallelism of its own: the only concurrency is the engine's worker pool.
"""

from __future__ import annotations

import csv
import io
import os
import random
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from . import analysis
from .chaos import MapKind
from .engine import (
    DEFAULT_ROUNDS,
    Frame,
    FrameCipher,
    WorkerPool,
    band_length,
    confusion_rounds,
    diffusion_rounds,
)
from .keying import Coordinator, Key, derive_worker_params, generate_key


@dataclass
class BenchConfig:
    sides: tuple[int, ...] = (96, 192, 288, 384, 480, 576, 672, 768)
    worker_counts: tuple[int, ...] = (1, 2, 4, 8)
    rounds: tuple[int, ...] = (DEFAULT_ROUNDS,)
    frame_count: int = 300
    fps: int = 24
    repetitions: int = 1

    def __post_init__(self):
        values = [*self.sides, *self.worker_counts, self.frame_count, self.fps, self.repetitions]
        if any(v < 1 for v in values) or any(r < 0 for r in self.rounds):
            raise ValueError("benchmark settings must be positive")
        for side in self.sides:
            for n in self.worker_counts:
                if side % n:
                    raise ValueError(f"side {side} not divisible by {n} workers")

    @property
    def deadline_ms(self) -> float:
        return 1000.0 / self.fps


# Two published setting sets disagree (24 FPS/300 frames vs 20 FPS/600 frames); both ship.
PRESETS = {
    "table": BenchConfig(frame_count=300, fps=24),
    "text": BenchConfig(sides=(576, 672, 960), frame_count=600, fps=20),
}


@dataclass
class BenchRecord:
    bench: str
    map: str
    side: int
    threads: int
    rounds: int
    frames: int
    fps: int = 0
    bytegen_mean_ms: float = 0.0
    bytegen_min_ms: float = 0.0
    bytegen_max_ms: float = 0.0
    confusion_mean_ms: float = 0.0
    confusion_min_ms: float = 0.0
    confusion_max_ms: float = 0.0
    diffusion_mean_ms: float = 0.0
    diffusion_min_ms: float = 0.0
    diffusion_max_ms: float = 0.0
    total_mean_ms: float = 0.0
    total_min_ms: float = 0.0
    total_max_ms: float = 0.0
    throughput_mbps: float = 0.0
    realtime_ok: bool = False

    def set_phase(self, phase: str, samples_s: Sequence[float]) -> None:
        ms = np.asarray(samples_s, dtype=np.float64) * 1000.0
        if ms.size == 0:
            ms = np.zeros(1)
        setattr(self, f"{phase}_mean_ms", float(ms.mean()))
        setattr(self, f"{phase}_min_ms", float(ms.min()))
        setattr(self, f"{phase}_max_ms", float(ms.max()))


CSV_COLUMNS = tuple(f.name for f in fields(BenchRecord))


def records_to_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        row = asdict(rec)
        writer.writerow(
            [f"{row[c]:.4f}" if isinstance(row[c], float) else int(row[c]) if isinstance(row[c], bool)
             else row[c] for c in CSV_COLUMNS]
        )
    return buf.getvalue()


def synthetic_frames(side: int, count: int, seed: int = 0) -> list[Frame]:
    rng = np.random.default_rng(seed)
    return [Frame(rng.integers(0, 256, size=(side, side, 3), dtype=np.uint8)) for _ in range(count)]


def physical_cores() -> int:
    try:
        import psutil

        cores = psutil.cpu_count(logical=False)
        if cores:
            return cores
    except ImportError:
        pass
    return os.cpu_count() or 1


def _default_key(map_kind, key: Optional[Key], seed: int = 0) -> Key:
    if key is not None:
        return key
    return generate_key(map_kind, random.Random(seed))


def warm_up(map_kind: MapKind | str = MapKind.PLCM) -> None:
    """Load every compiled kernel once so no timing window pays for it."""
    kind = MapKind.parse(map_kind)
    key = _default_key(kind, None)
    with FrameCipher(key, 2, 1, parallel=False) as c:
        frame = c.encrypt(Frame(np.zeros((4, 4, 3), np.uint8)))
        c.decrypt(frame)
    confusion_rounds(frame, 1, 2, 1)
    diffusion_rounds(frame, [derive_worker_params(key, 1).prbg(0)] * 2, 1)


# ---------------------------------------------------------------------------


def bench_bytegen(
    map_kind: MapKind | str,
    worker_counts: Sequence[int],
    total_iterations: int = 5 * 10**7,
    key: Optional[Key] = None,
    repetitions: int = 1,
) -> list[BenchRecord]:
    """Aggregate byte-generation throughput with the iterations split across workers."""
    kind = MapKind.parse(map_kind)
    key = _default_key(kind, key)
    warm_up(kind)
    records = []
    for n in worker_counts:
        params = derive_worker_params(key, n)
        per_worker = total_iterations // n
        nbytes = per_worker * kind.bytes_per_step
        samples = []
        with WorkerPool(n) as pool:
            for _ in range(repetitions):
                prbgs = [params.prbg(i) for i in range(n)]
                t0 = time.perf_counter()
                pool.run(lambda i: prbgs[i].fill(nbytes))
                samples.append(time.perf_counter() - t0)
        rec = BenchRecord("bytegen", kind.name, 0, n, 0, 0)
        rec.set_phase("bytegen", samples)
        rec.set_phase("total", samples)
        rec.throughput_mbps = n * nbytes / 1e6 / (rec.total_mean_ms / 1000.0)
        records.append(rec)
    return records


def bench_phases(
    side: int,
    worker_counts: Sequence[int],
    rounds: int = DEFAULT_ROUNDS,
    image_count: int = 100,
    map_kind: MapKind | str = MapKind.PLCM,
    key: Optional[Key] = None,
    seed: int = 0,
) -> list[BenchRecord]:
    """Per-image time of r confusion rounds, r diffusion rounds (with byte
    generation) and a whole-frame encryption, for each worker count."""
    kind = MapKind.parse(map_kind)
    key = _default_key(kind, key, seed)
    frames = synthetic_frames(side, min(image_count, 8), seed)
    warm_up(kind)
    records = []
    for n in worker_counts:
        params = derive_worker_params(key, n)
        s_c = Coordinator(key).next_confusion_seed()
        conf, diff, gen, whole = [], [], [], []
        with FrameCipher(key, n, max(rounds, 1)) as cipher:
            prbgs = [params.prbg(i) for i in range(n)]
            for k in range(image_count):
                fr = frames[k % len(frames)]
                t0 = time.perf_counter()
                confusion_rounds(fr, s_c, n, rounds, cipher.pool)
                t1 = time.perf_counter()
                timings: dict = {}
                diffusion_rounds(fr, prbgs, rounds, cipher.pool, timings)
                t2 = time.perf_counter()
                conf.append(t1 - t0)
                diff.append(t2 - t1)
                gen.append(timings.get("bytegen", 0.0))
                if rounds:
                    t3 = time.perf_counter()
                    cipher.encrypt(fr)
                    whole.append(time.perf_counter() - t3)
        rec = BenchRecord("phases", kind.name, side, n, rounds, image_count)
        rec.set_phase("confusion", conf)
        rec.set_phase("diffusion", diff)
        rec.set_phase("bytegen", gen)
        rec.set_phase("total", whole)
        if whole:
            rec.throughput_mbps = side * side * 3 / 1e6 / (rec.total_mean_ms / 1000.0)
        records.append(rec)
    return records


def bench_video(
    sides: Sequence[int],
    n: int,
    r: int = DEFAULT_ROUNDS,
    frame_count: int = 300,
    fps: int = 24,
    map_kind: MapKind | str = MapKind.PLCM,
    key: Optional[Key] = None,
    frames: Optional[Sequence[Frame]] = None,
    seed: int = 0,
    parallel: bool = True,
) -> list[BenchRecord]:
    """Encrypt ``frame_count`` frames per side and report per-frame latency."""
    kind = MapKind.parse(map_kind)
    key = _default_key(kind, key, seed)
    warm_up(kind)
    records = []
    for side in sides:
        pool_frames = list(frames) if frames is not None else synthetic_frames(side, min(frame_count, 8), seed)
        if any(f.side != side for f in pool_frames):
            raise ValueError(f"supplied frames do not have side {side}")
        totals, gen, conf, diff = [], [], [], []
        with FrameCipher(key, n, r, parallel=parallel) as cipher:
            for k in range(frame_count):
                timings: dict = {}
                t0 = time.perf_counter()
                cipher.encrypt(pool_frames[k % len(pool_frames)], timings)
                totals.append(time.perf_counter() - t0)
                gen.append(timings.get("bytegen", 0.0))
                conf.append(timings.get("confusion", 0.0))
                diff.append(timings.get("diffusion", 0.0))
        rec = BenchRecord("video", kind.name, side, n, r, frame_count, fps)
        rec.set_phase("total", totals)
        rec.set_phase("bytegen", gen)
        rec.set_phase("confusion", conf)
        rec.set_phase("diffusion", diff)
        rec.throughput_mbps = side * side * 3 / 1e6 / (rec.total_mean_ms / 1000.0)
        rec.realtime_ok = rec.total_mean_ms <= 1000.0 / fps
        records.append(rec)
    return records


# ---------------------------------------------------------------------------
# rounds sweep


@dataclass
class SweepRow:
    round: int
    npcr: list = field(default_factory=list)
    uaci: list = field(default_factory=list)
    corr: list = field(default_factory=list)


def one_pixel_change(pixels: np.ndarray, seed: int) -> tuple[np.ndarray, tuple[int, int, int]]:
    """Copy of ``pixels`` with the low bit of one random channel value flipped."""
    rng = np.random.default_rng(seed)
    h, w, ch = pixels.shape
    pos = (int(rng.integers(h)), int(rng.integers(w)), int(rng.integers(ch)))
    out = pixels.copy()
    out[pos] ^= 1
    return out, pos


def differential_trial(key: Key, n: int, r: int, frame: Frame, seed: int):
    """NPCR/UACI between the ciphers of ``frame`` and a one-value-changed copy."""
    changed, _ = one_pixel_change(frame.pixels, seed)
    with FrameCipher(key, n, r, parallel=False) as c1, FrameCipher(key, n, r, parallel=False) as c2:
        e1 = c1.encrypt(frame)
        e2 = c2.encrypt(frame.with_pixels(changed))
    return analysis.npcr(e1, e2), analysis.uaci(e1, e2)


def sweep_rounds(
    frame: Frame,
    max_rounds: int = 10,
    key: Optional[Key] = None,
    n: int = 8,
    seed: int = 0,
    mode: str = "cipher",
) -> list[SweepRow]:
    """NPCR/UACI under a one-value change and plain-vs-scrambled correlation,
    for 0..max_rounds rounds.

    ``mode="cipher"`` runs full confusion+diffusion rounds for the differential
    curves; ``mode="diffusion"`` runs diffusion alone.  The correlation curve
    always uses confusion alone.
    """
    if mode not in ("cipher", "diffusion"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    key = _default_key(MapKind.PLCM, key, seed)
    changed, _ = one_pixel_change(frame.pixels, seed)
    other = frame.with_pixels(changed)
    s_c = Coordinator(key).next_confusion_seed()
    params = derive_worker_params(key, n)
    rows = [SweepRow(0, list(analysis.npcr(frame, other)), list(analysis.uaci(frame, other)),
                     analysis.pixel_correlation(frame, frame))]
    for k in range(1, max_rounds + 1):
        if mode == "cipher":
            with FrameCipher(key, n, k, parallel=False) as c1, FrameCipher(key, n, k, parallel=False) as c2:
                e1, e2 = c1.encrypt(frame), c2.encrypt(other)
        else:
            e1 = diffusion_rounds(frame, [params.prbg(i) for i in range(n)], k)
            e2 = diffusion_rounds(other, [params.prbg(i) for i in range(n)], k)
        scrambled = confusion_rounds(frame, s_c, n, k)
        rows.append(SweepRow(k, list(analysis.npcr(e1, e2)), list(analysis.uaci(e1, e2)),
                             analysis.pixel_correlation(frame, scrambled)))
    return rows


SWEEP_COLUMNS = (
    "round", "npcr_r", "npcr_g", "npcr_b", "npcr_mean", "uaci_r", "uaci_g", "uaci_b", "uaci_mean",
    "corr_r", "corr_g", "corr_b", "corr_mean",
)


def sweep_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        out = [row.round]
        for vals in (row.npcr, row.uaci, row.corr):
            clean = [float("nan") if v is None else float(v) for v in vals]
            out += [f"{v:.6f}" for v in clean] + [f"{np.mean(clean):.6f}"]
        writer.writerow(out)
    return buf.getvalue()
