import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chaosvid import analysis


def _naive_variance(z):
    total = 0.0
    for i in range(256):
        for j in range(256):
            total += 0.5 * (z[i] - z[j]) ** 2
    return total / 256**2


def _naive_chi2(z):
    e = sum(z) / 256
    return sum((v - e) ** 2 / e for v in z)


def _naive_entropy(z):
    n = sum(z)
    return sum((v / n) * math.log2(n / v) for v in z if v)


def test_variance_examples():
    assert analysis.variance(np.full(256, 7)) == 0.0
    z = np.zeros(256)
    z[0] = 256
    assert analysis.variance(z) == pytest.approx(_naive_variance(list(z)))
    assert analysis.variance(z) == pytest.approx(255.0)


def test_chi_square_examples():
    assert analysis.chi_square(np.full(256, 3)) == 0.0
    z = np.zeros(256)
    z[0] = 256
    assert analysis.chi_square(z) == pytest.approx(65280.0)


def test_variance_is_four_chi_square_at_512():
    z = np.random.default_rng(0).multinomial(512 * 512, [1 / 256] * 256)
    assert analysis.variance(z) == pytest.approx(4 * analysis.chi_square(z))


def test_entropy_examples():
    assert analysis.entropy(analysis.histogram(np.full((8, 8), 9, np.uint8))) == 0.0
    assert analysis.entropy(np.full(256, 10)) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        analysis.entropy(np.zeros(256))


@pytest.mark.parametrize("seed", range(5))
def test_metrics_match_naive_oracles(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 256, (16, 16, 3), dtype=np.uint8)
    b = rng.integers(0, 256, (16, 16, 3), dtype=np.uint8)
    for c in range(3):
        z = [0] * 256
        for v in a[..., c].ravel():
            z[int(v)] += 1
        h = analysis.histogram(a[..., c])
        assert h.tolist() == z
        assert analysis.variance(h) == pytest.approx(_naive_variance(z))
        assert analysis.chi_square(h) == pytest.approx(_naive_chi2(z))
        assert analysis.entropy(h) == pytest.approx(_naive_entropy(z))
        pairs = list(zip(a[..., c].ravel().tolist(), b[..., c].ravel().tolist()))
        changed = sum(1 for x, y in pairs if x != y)
        assert analysis.npcr(a, b)[c] == pytest.approx(100 * changed / 256)
        assert analysis.uaci(a, b)[c] == pytest.approx(100 * sum(abs(x - y) for x, y in pairs) / (256 * 255))


@settings(max_examples=100)
@given(arrays(np.uint8, (6, 6, 3)), arrays(np.uint8, (6, 6, 3)))
def test_npcr_uaci_symmetric_and_bounded(a, b):
    assert np.allclose(analysis.npcr(a, b), analysis.npcr(b, a))
    assert np.allclose(analysis.uaci(a, b), analysis.uaci(b, a))
    assert ((0 <= analysis.npcr(a, b)) & (analysis.npcr(a, b) <= 100)).all()


@settings(max_examples=100)
@given(arrays(np.uint8, (40,)))
def test_entropy_and_statistics_bounds(px):
    h = analysis.histogram(px)
    ent = analysis.entropy(h)
    assert -1e-12 <= ent <= 8.0 + 1e-12
    uniform = bool((h == h[0]).all())
    assert (analysis.variance(h) == 0) == uniform
    assert (analysis.chi_square(h) == 0) == uniform


def test_npcr_uaci_examples():
    a = np.zeros((4, 4, 3), np.uint8)
    assert analysis.npcr(a, a).tolist() == [0, 0, 0]
    assert analysis.uaci(a, a).tolist() == [0, 0, 0]
    b = np.full_like(a, 255)
    assert analysis.npcr(a, b).tolist() == [100, 100, 100]
    assert analysis.uaci(a, b).tolist() == [100, 100, 100]
    with pytest.raises(ValueError):
        analysis.npcr(a, np.zeros((5, 5, 3), np.uint8))


def test_correlation_examples():
    x = np.arange(256)
    assert analysis.correlation(x, x) == pytest.approx(1.0)
    assert analysis.correlation(x, 255 - x) == pytest.approx(-1.0)
    assert analysis.correlation(x, np.zeros(256)) is None
    with pytest.raises(ValueError):
        analysis.correlation([1], [1])


def test_sample_adjacent_pairs_oracle(rng):
    px = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
    assert analysis.sample_adjacent_pairs(px, "H", 0)[0].shape[0] == 0
    for d, (dy, dx) in analysis.DIRECTIONS.items():
        x1, y1 = analysis.sample_adjacent_pairs(px, d, 200, seed=5)
        x2, y2 = analysis.sample_adjacent_pairs(px, d, 200, seed=5)
        assert np.array_equal(x1, x2) and np.array_equal(y1, y2)
        # every sampled pair exists among the fully enumerated neighbour pairs
        full = {
            (tuple(px[r, c]), tuple(px[r + dy, c + dx]))
            for r in range(20 - dy)
            for c in range(30 - dx)
        }
        assert all((tuple(a), tuple(b)) in full for a, b in zip(x1, y1))
    with pytest.raises(ValueError):
        analysis.sample_adjacent_pairs(px, "D", 19 * 29 + 1)


def test_local_entropy():
    const = np.zeros((100, 100, 3), np.uint8)
    assert analysis.local_entropy(const, k=1) == [0.0, 0.0, 0.0]
    with pytest.raises(ValueError):
        analysis.local_entropy(const, k=30)
    with pytest.raises(ValueError):
        analysis.local_entropy(np.zeros((512, 512, 3), np.uint8), k=1, t_b=1000)


def test_local_entropy_blocks_disjoint():
    rng = np.random.default_rng(3)
    blocks = analysis._block_positions(512, 512, 44, 30, rng)
    for i, (y1, x1) in enumerate(blocks):
        for y2, x2 in blocks[i + 1 :]:
            assert abs(y1 - y2) >= 44 or abs(x1 - x2) >= 44


def test_salt_pepper():
    px = np.full((512, 512, 3), 128, np.uint8)
    assert np.array_equal(analysis.add_salt_pepper(px, 0.0), px)
    noisy = analysis.add_salt_pepper(px, 0.05, seed=4)
    touched = (noisy != px).any(axis=2)
    assert touched.sum() == 13107
    assert set(np.unique(noisy[touched])) <= {0, 255}
    assert (noisy[touched].min(axis=1) == noisy[touched].max(axis=1)).all()
    assert np.array_equal(noisy, analysis.add_salt_pepper(px, 0.05, seed=4))
    full = analysis.add_salt_pepper(px, 1.0)
    assert set(np.unique(full)) <= {0, 255}
    with pytest.raises(ValueError):
        analysis.add_salt_pepper(px, 1.5)


def test_crop_blocks():
    px = np.random.default_rng(0).integers(0, 256, (512, 512, 3), dtype=np.uint8)
    assert np.array_equal(analysis.crop_blocks(px, []), px)
    whole = analysis.crop_blocks(px, [(0, 0, 512, "white")])
    assert (whole == 255).all()
    quarter = analysis.crop_blocks(px, [analysis.Block(128, 128, 256)])
    assert (quarter[128:384, 128:384] == 0).all()
    assert (quarter == 0).all(axis=2).mean() >= 0.25
    with pytest.raises(ValueError):
        analysis.crop_blocks(px, [(400, 0, 256)])
    with pytest.raises(ValueError):
        analysis.crop_blocks(px, [(0, 0, 4, "grey")])


def test_plain_image_statistics(astronaut):
    # a natural image is far from uniform and strongly correlated
    hists = analysis.histograms(astronaut)
    assert all(analysis.variance(h) > 3e5 for h in hists) or all(analysis.chi_square(h) > 1e4 for h in hists)
    for c in analysis.adjacent_correlation(astronaut, "H"):
        assert c > 0.85


def test_report_format(rng):
    a = rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)
    b = rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)
    rep = analysis.analyze(a, b, samples=500, seed=1, k=2)
    text = rep.to_text()
    lines = text.splitlines()
    assert lines[:5] == ["# chaosvid analysis v1", "width=64", "height=64", "samples=500", "seed=1"]
    assert "[R]" in lines and "[mean]" in lines
    assert any(l.startswith("entropy=") for l in lines)
    csv_lines = rep.to_csv().splitlines()
    assert csv_lines[0].split(",")[0] == "channel" and len(csv_lines) == 4
    flat = analysis.analyze(np.zeros((64, 64, 3), np.uint8), samples=100, k=1)
    assert "corr_h=degenerate" in flat.to_text()
