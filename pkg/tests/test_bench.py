import csv
import io

import numpy as np
import pytest

from chaosvid import bench
from chaosvid.engine import Frame


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_config_validation():
    with pytest.raises(ValueError):
        bench.BenchConfig(sides=(10,), worker_counts=(4,))
    with pytest.raises(ValueError):
        bench.BenchConfig(fps=0)
    assert bench.BenchConfig(fps=25).deadline_ms == 40.0
    assert bench.PRESETS["table"].fps == 24 and bench.PRESETS["table"].frame_count == 300
    assert bench.PRESETS["text"].sides == (576, 672, 960)


def test_bytegen_records():
    recs = bench.bench_bytegen("lasm", [1, 2], total_iterations=2000)
    assert [r.threads for r in recs] == [1, 2]
    assert all(r.throughput_mbps > 0 and r.bench == "bytegen" for r in recs)
    rows = _rows(bench.records_to_csv(recs))
    assert list(rows[0]) == list(bench.CSV_COLUMNS)
    assert rows[0]["map"] == "LASM"


def test_phase_records():
    recs = bench.bench_phases(32, [1, 4], rounds=2, image_count=3)
    for r in recs:
        assert r.side == 32 and r.rounds == 2 and r.frames == 3
        assert r.confusion_min_ms <= r.confusion_mean_ms <= r.confusion_max_ms
        assert r.total_mean_ms > 0


def test_video_realtime_flag():
    fast = bench.bench_video([16], 2, 1, frame_count=3, fps=1)
    assert fast[0].realtime_ok
    slow = bench.bench_video([64], 2, 5, frame_count=2, fps=10**6)
    assert not slow[0].realtime_ok
    assert slow[0].fps == 10**6
    row = _rows(bench.records_to_csv(slow))[0]
    assert row["realtime_ok"] == "0" and row["bench"] == "video"


def test_video_rejects_mismatched_frames():
    with pytest.raises(ValueError):
        bench.bench_video([32], 2, 1, frame_count=1, frames=[Frame(np.zeros((16, 16, 3), np.uint8))])


def test_one_pixel_change():
    px = np.zeros((8, 8, 3), np.uint8)
    out, pos = bench.one_pixel_change(px, 3)
    assert (out != px).sum() == 1 and out[pos] == 1


def test_sweep_shape_and_csv(plcm_key):
    frame = Frame(np.random.default_rng(0).integers(0, 256, (32, 32, 3), dtype=np.uint8))
    rows = bench.sweep_rounds(frame, 3, plcm_key, n=4)
    assert [r.round for r in rows] == [0, 1, 2, 3]
    assert rows[0].corr == pytest.approx([1.0, 1.0, 1.0])
    assert max(rows[0].npcr) == pytest.approx(100 / 1024)
    parsed = _rows(bench.sweep_to_csv(rows))
    assert list(parsed[0]) == list(bench.SWEEP_COLUMNS) and len(parsed) == 4
    diff_rows = bench.sweep_rounds(frame, 2, plcm_key, n=4, mode="diffusion")
    assert len(diff_rows) == 3
    with pytest.raises(ValueError):
        bench.sweep_rounds(frame, 2, plcm_key, n=4, mode="other")
