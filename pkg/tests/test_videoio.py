import io
import struct

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from chaosvid import videoio
from chaosvid.chaos import MapKind
from chaosvid.engine import Frame, FrameCipher
from chaosvid.errors import FormatError, HeaderMismatchError
from chaosvid.videoio import ContainerHeader, FrameSource, SourceKind


def _img(rng, w, h):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def test_ppm_round_trip(tmp_path, rng):
    px = _img(rng, 7, 5)
    path = tmp_path / "a.ppm"
    videoio.write_ppm(path, px)
    assert np.array_equal(videoio.read_ppm(path), px)
    # load -> store is byte-identical
    frame = videoio.load_frame(FrameSource.open(path), 4)
    out = tmp_path / "b.ppm"
    videoio.store_plain_frame(frame, out)
    assert out.read_bytes() == path.read_bytes()


def test_ppm_header_with_comments():
    body = bytes(range(12))
    data = b"P6\n# made by hand\n2 # width\n2\n255\n" + body
    px = videoio.parse_ppm(data)
    assert px.shape == (2, 2, 3) and px.reshape(-1).tobytes() == body


@pytest.mark.parametrize(
    "data",
    [b"P3\n1 1\n255\n000", b"P6\n1 1\n65535\n" + bytes(6), b"P6\n2 2\n255\n" + bytes(5), b"P6\n2"],
)
def test_ppm_errors(data):
    with pytest.raises(FormatError):
        videoio.parse_ppm(data)


def test_padding_examples(tmp_path, rng):
    p = tmp_path / "four.ppm"
    videoio.write_ppm(p, _img(rng, 4, 4))
    f = videoio.load_frame(FrameSource.open(p), 2)
    assert f.side == 4 and (f.orig_width, f.orig_height) == (4, 4)

    px = _img(rng, 5, 3)
    f = videoio.pad_to_frame(px, 4)
    assert f.side == 8 and (f.orig_width, f.orig_height) == (5, 3)
    assert np.array_equal(f.pixels[:3, :5], px)
    assert not f.pixels[3:].any() and not f.pixels[:, 5:].any()
    assert np.array_equal(f.cropped(), px)


@pytest.mark.parametrize("w, h, n, side", [(5, 3, 4, 8), (512, 512, 8, 512), (450, 300, 8, 456), (1, 1, 3, 3)])
def test_padded_side(w, h, n, side):
    assert videoio.padded_side(w, h, n) == side


def test_padding_neutral_through_cipher(plcm_key, rng):
    px = _img(rng, 21, 10)
    frame = videoio.pad_to_frame(px, 4)
    with FrameCipher(plcm_key, 4, 3, parallel=False) as enc:
        c = enc.encrypt(frame)
    with FrameCipher(plcm_key, 4, 3, parallel=False) as dec:
        back = dec.decrypt(c)
    buf = io.BytesIO()
    videoio.store_plain_frame(back, buf, "raw")
    assert buf.getvalue() == px.tobytes()


def test_raw_source(tmp_path, rng):
    frames = [_img(rng, 6, 4) for _ in range(3)]
    p = tmp_path / "clip.rgb"
    p.write_bytes(b"".join(f.tobytes() for f in frames))
    src = FrameSource.open(p, 6, 4)
    assert src.kind is SourceKind.RAW_RGB24
    got = list(src)
    src.close()
    assert len(got) == 3 and all(np.array_equal(a, b) for a, b in zip(got, frames))
    p.write_bytes(frames[0].tobytes() + b"\x00" * 5)
    src = FrameSource.open(p, 6, 4)
    src.read()
    with pytest.raises(FormatError):
        src.read()


def test_ppm_directory_source(tmp_path, rng):
    for k in range(3):
        videoio.write_ppm(tmp_path / f"f{k:03d}.ppm", _img(rng, 4, 4))
    assert len(list(FrameSource.open(tmp_path))) == 3
    videoio.write_ppm(tmp_path / "f999.ppm", _img(rng, 5, 4))
    with pytest.raises(FormatError):
        list(FrameSource.open(tmp_path))


def test_single_image_source_exhausts(tmp_path, rng):
    p = tmp_path / "x.ppm"
    videoio.write_ppm(p, _img(rng, 3, 3))
    src = FrameSource.open(p)
    src.read()
    with pytest.raises(videoio.SourceExhausted):
        src.read()


def _header(count=2, side=16):
    return ContainerHeader(MapKind.PLCM, side, 15, 11, 4, 5, fps=24, frame_count=count)


def test_header_layout():
    raw = _header().pack()
    assert len(raw) == 27
    assert raw[:4] == b"CVE1"
    assert struct.unpack("<4sBBIIIHBHI", raw) == (b"CVE1", 1, 1, 16, 15, 11, 4, 5, 24, 2)


def test_container_round_trip(rng):
    frames = [Frame(_img(rng, 16, 16), 15, 11) for _ in range(2)]
    buf = io.BytesIO()
    assert videoio.write_container(buf, _header(), frames) == 2
    header, back = videoio.read_container_bytes(buf.getvalue())
    assert header == _header()
    assert all(np.array_equal(a.pixels, b.pixels) for a, b in zip(frames, back))
    assert (back[0].orig_width, back[0].orig_height) == (15, 11)


def test_empty_container():
    buf = io.BytesIO()
    videoio.write_container(buf, _header(0), [])
    header, frames = videoio.read_container_bytes(buf.getvalue())
    assert header.frame_count == 0 and frames == []


def test_frame_count_patched(rng):
    buf = io.BytesIO()
    videoio.write_container(buf, _header(0), [Frame(_img(rng, 16, 16))] * 3)
    header, frames = videoio.read_container_bytes(buf.getvalue())
    assert header.frame_count == 3 and len(frames) == 3


def test_truncated_container(rng):
    buf = io.BytesIO()
    videoio.write_container(buf, _header(16), [Frame(_img(rng, 16, 16))] * 16)
    data = buf.getvalue()
    short = data[: len(data) - 16 * 16 * 3]
    with pytest.raises(FormatError, match="truncated"):
        videoio.read_container_bytes(short)
    with pytest.raises(FormatError, match="trailing"):
        videoio.read_container_bytes(data + b"\x00")


@pytest.mark.parametrize(
    "patch",
    [(0, b"CVE2"), (4, b"\x02"), (5, b"\x07"), (20, b"\x00"), (6, bytes(4)), (18, b"\x03\x00")],
)
def test_bad_headers(patch):
    raw = bytearray(_header(0).pack())
    pos, val = patch
    raw[pos : pos + len(val)] = val
    with pytest.raises(FormatError):
        videoio.read_container_bytes(bytes(raw))


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(st.binary(max_size=80))
def test_fuzzed_headers_never_crash(data):
    try:
        videoio.read_container_bytes(data)
    except FormatError:
        pass


@settings(max_examples=200)
@given(st.binary(min_size=27, max_size=27).map(lambda b: b"CVE1\x01" + b[5:]))
def test_fuzzed_field_values(data):
    try:
        videoio.read_container_bytes(data)
    except FormatError:
        pass


def test_context_check():
    h = _header()
    h.check_context(MapKind.PLCM, 4, 5, 16)
    with pytest.raises(HeaderMismatchError, match="threads"):
        h.check_context(MapKind.PLCM, 8, 5)
    with pytest.raises(HeaderMismatchError, match="map"):
        h.check_context(MapKind.LASM, 4, 5)
    with pytest.raises(HeaderMismatchError, match="rounds"):
        h.check_context(MapKind.PLCM, 4, 1)


def test_container_determinism(plcm_key, rng):
    frames = [Frame(_img(rng, 16, 16)) for _ in range(3)]

    def build():
        buf = io.BytesIO()
        with FrameCipher(plcm_key, 4, 5) as c:
            videoio.write_container(buf, _header(3), [c.encrypt(f) for f in frames])
        return buf.getvalue()

    assert build() == build()


def test_cipher_frame_store_reload(plcm_key, rng, tmp_path):
    with FrameCipher(plcm_key, 2, 2, parallel=False) as c:
        enc = c.encrypt(Frame(_img(rng, 8, 8)))
    p = tmp_path / "c.ppm"
    videoio.store_plain_frame(enc, p)
    assert np.array_equal(videoio.read_ppm(p), enc.pixels)
