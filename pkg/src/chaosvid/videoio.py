"""Frame ingestion (binary PPM, PPM directories, raw RGB24) and the CVE1 container.

CVE1 layout, all integers little-endian::

    magic "CVE1" | version u8 | map_kind u8 | side u32 | orig_width u32
    | orig_height u32 | n u16 | r u8 | fps u16 | frame_count u32
    | frame_count payloads of side*side*3 bytes
"""

from __future__ import annotations

import enum
import io
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Optional, Union

import numpy as np

from .chaos import MapKind
from .engine import Frame
from .errors import FormatError, HeaderMismatchError

MAGIC = b"CVE1"
VERSION = 1
HEADER = struct.Struct("<4sBBIIIHBHI")
_CHUNK = 1 << 20

PathLike = Union[str, os.PathLike]


class SourceExhausted(EOFError):
    pass


# ---------------------------------------------------------------------------
# PPM


def _ppm_header(data: bytes) -> tuple[int, int, int, int]:
    """Return (width, height, maxval, offset of pixel data)."""
    if data[:2] != b"P6":
        raise FormatError("not a binary PPM (P6) file")
    fields = []
    pos = 2
    while len(fields) < 3:
        if pos >= len(data):
            raise FormatError("truncated PPM header")
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise FormatError("truncated PPM header")
            pos = end + 1
        else:
            start = pos
            while pos < len(data) and data[pos : pos + 1].isdigit():
                pos += 1
            if start == pos:
                raise FormatError(f"unexpected byte {ch!r} in PPM header")
            fields.append(int(data[start:pos]))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError("truncated PPM header")
    width, height, maxval = fields
    return width, height, maxval, pos + 1


def parse_ppm(data: bytes) -> np.ndarray:
    width, height, maxval, offset = _ppm_header(data)
    if maxval != 255:
        raise FormatError(f"only 8-bit PPM is supported, maxval is {maxval}")
    if width < 1 or height < 1:
        raise FormatError("PPM has zero area")
    size = width * height * 3
    body = data[offset : offset + size]
    if len(body) < size:
        raise FormatError(f"truncated PPM data: {len(body)} of {size} bytes")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3).copy()


def read_ppm(path: PathLike) -> np.ndarray:
    return parse_ppm(Path(path).read_bytes())


def ppm_bytes(pixels: np.ndarray) -> bytes:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = pixels.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + pixels.tobytes()


def write_ppm(target: Union[PathLike, BinaryIO], pixels: np.ndarray) -> None:
    data = ppm_bytes(pixels)
    if hasattr(target, "write"):
        target.write(data)
    else:
        Path(target).write_bytes(data)


# ---------------------------------------------------------------------------
# sources


class SourceKind(enum.Enum):
    PPM_IMAGE = "ppm"
    PPM_SEQUENCE = "ppm-dir"
    RAW_RGB24 = "raw"


class FrameSource:
    """Sequential reader yielding (height, width, 3) uint8 arrays of constant size."""

    def __init__(
        self,
        kind: SourceKind,
        path: Union[PathLike, BinaryIO],
        width: Optional[int] = None,
        height: Optional[int] = None,
        fps: int = 0,
    ):
        self.kind = kind
        self.path = path
        self.width = width
        self.height = height
        self.fps = fps
        self.cursor = 0
        self._files: list[Path] = []
        self._stream: Optional[BinaryIO] = None
        if kind is SourceKind.PPM_SEQUENCE:
            self._files = sorted(p for p in Path(path).iterdir() if p.suffix.lower() in (".ppm", ".pnm"))
        elif kind is SourceKind.RAW_RGB24:
            if not width or not height or width < 1 or height < 1:
                raise ValueError("raw RGB24 input needs positive width and height")
            self._stream = path if hasattr(path, "read") else open(path, "rb")

    @classmethod
    def open(cls, path: PathLike, width: Optional[int] = None, height: Optional[int] = None,
             fps: int = 0) -> "FrameSource":
        p = Path(path)
        if p.is_dir():
            return cls(SourceKind.PPM_SEQUENCE, p, fps=fps)
        if width or height:
            return cls(SourceKind.RAW_RGB24, p, width, height, fps)
        if p.suffix.lower() in (".ppm", ".pnm"):
            return cls(SourceKind.PPM_IMAGE, p, fps=fps)
        raise ValueError(f"cannot infer the format of {path}; pass width/height for raw RGB24")

    def _check_dims(self, pixels: np.ndarray) -> np.ndarray:
        h, w = pixels.shape[:2]
        if self.width is None:
            self.width, self.height = w, h
        elif (w, h) != (self.width, self.height):
            raise FormatError(
                f"frame {self.cursor} is {w}x{h}, expected {self.width}x{self.height}"
            )
        return pixels

    def read(self) -> np.ndarray:
        if self.kind is SourceKind.PPM_IMAGE:
            if self.cursor:
                raise SourceExhausted("single image already read")
            px = self._check_dims(read_ppm(self.path))
        elif self.kind is SourceKind.PPM_SEQUENCE:
            if self.cursor >= len(self._files):
                raise SourceExhausted("no more images in directory")
            px = self._check_dims(read_ppm(self._files[self.cursor]))
        else:
            size = self.width * self.height * 3
            data = self._stream.read(size)
            if not data:
                raise SourceExhausted("end of raw stream")
            if len(data) < size:
                raise FormatError(f"truncated raw frame {self.cursor}: {len(data)} of {size} bytes")
            px = np.frombuffer(data, dtype=np.uint8).reshape(self.height, self.width, 3).copy()
        self.cursor += 1
        return px

    def __iter__(self) -> Iterator[np.ndarray]:
        while True:
            try:
                yield self.read()
            except SourceExhausted:
                return

    def close(self) -> None:
        if self._stream is not None and not hasattr(self.path, "read"):
            self._stream.close()


def padded_side(width: int, height: int, n: int) -> int:
    """Smallest multiple of ``n`` that is at least ``max(width, height)``."""
    m = max(width, height)
    return -(-m // n) * n


def pad_to_frame(pixels: np.ndarray, n: int) -> Frame:
    h, w = pixels.shape[:2]
    side = padded_side(w, h, n)
    if (h, w) == (side, side):
        return Frame(np.ascontiguousarray(pixels, dtype=np.uint8), w, h)
    out = np.zeros((side, side, 3), dtype=np.uint8)
    out[:h, :w] = pixels
    return Frame(out, w, h)


def load_frame(src: FrameSource, n: int) -> Frame:
    return pad_to_frame(src.read(), n)


def store_plain_frame(frame: Frame, sink: Union[PathLike, BinaryIO], fmt: str = "ppm") -> None:
    pixels = np.ascontiguousarray(frame.cropped())
    if fmt == "ppm":
        write_ppm(sink, pixels)
    elif fmt == "raw":
        if hasattr(sink, "write"):
            sink.write(pixels.tobytes())
        else:
            Path(sink).write_bytes(pixels.tobytes())
    else:
        raise ValueError(f"unknown output format {fmt!r}")


# ---------------------------------------------------------------------------
# container


@dataclass
class ContainerHeader:
    map_kind: MapKind
    side: int
    orig_width: int
    orig_height: int
    n: int
    r: int
    fps: int = 0
    frame_count: int = 0
    version: int = VERSION

    def validate(self) -> None:
        try:
            self.map_kind = MapKind(self.map_kind)
        except ValueError:
            raise FormatError(f"unknown map kind {self.map_kind}") from None
        if self.version != VERSION:
            raise FormatError(f"unsupported container version {self.version}")
        if self.side < 1 or self.n < 1 or self.r < 1:
            raise FormatError("side, n and r must be positive")
        if self.side % self.n:
            raise FormatError(f"side {self.side} not divisible by n={self.n}")
        if not (1 <= self.orig_width <= self.side and 1 <= self.orig_height <= self.side):
            raise FormatError("original dimensions exceed the padded side")
        limits = ((self.side, 32), (self.orig_width, 32), (self.orig_height, 32), (self.n, 16),
                  (self.r, 8), (self.fps, 16), (self.frame_count, 32))
        for value, bits in limits:
            if not 0 <= value < 2**bits:
                raise FormatError(f"header field {value} does not fit in {bits} bits")

    @property
    def frame_bytes(self) -> int:
        return self.side * self.side * 3

    def pack(self) -> bytes:
        self.validate()
        return HEADER.pack(MAGIC, self.version, int(self.map_kind), self.side, self.orig_width,
                           self.orig_height, self.n, self.r, self.fps, self.frame_count)

    @classmethod
    def unpack(cls, data: bytes) -> "ContainerHeader":
        if len(data) < HEADER.size:
            raise FormatError(f"truncated container header: {len(data)} of {HEADER.size} bytes")
        magic, version, kind, side, ow, oh, n, r, fps, count = HEADER.unpack(data[: HEADER.size])
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        hdr = cls(kind, side, ow, oh, n, r, fps, count, version)
        hdr.validate()
        return hdr

    def check_context(self, map_kind: MapKind, n: int, r: int, side: Optional[int] = None) -> None:
        """Refuse decryption under a context that differs from the one used to encrypt."""
        problems = []
        if MapKind(map_kind) != self.map_kind:
            problems.append(f"map {MapKind(map_kind).name} != {self.map_kind.name}")
        if n != self.n:
            problems.append(f"threads {n} != {self.n}")
        if r != self.r:
            problems.append(f"rounds {r} != {self.r}")
        if side is not None and side != self.side:
            problems.append(f"side {side} != {self.side}")
        if problems:
            raise HeaderMismatchError("container header mismatch: " + ", ".join(problems))


def _read_exact(stream: BinaryIO, size: int) -> bytes:
    buf = io.BytesIO()
    remaining = size
    while remaining:
        chunk = stream.read(min(remaining, _CHUNK))
        if not chunk:
            break
        buf.write(chunk)
        remaining -= len(chunk)
    return buf.getvalue()


def write_container(stream: BinaryIO, header: ContainerHeader, frames: Iterable) -> int:
    """Write header and payloads; returns the number of frames written.

    If the number of frames differs from ``header.frame_count`` the header is
    rewritten in place, which needs a seekable stream.
    """
    start = stream.tell() if stream.seekable() else None
    stream.write(header.pack())
    count = 0
    for fr in frames:
        px = fr.pixels if isinstance(fr, Frame) else np.asarray(fr, dtype=np.uint8)
        if px.shape != (header.side, header.side, 3):
            raise FormatError(f"payload shape {px.shape} does not match side {header.side}")
        stream.write(np.ascontiguousarray(px).tobytes())
        count += 1
    if count != header.frame_count:
        if start is None:
            raise FormatError("frame count differs from header and the stream is not seekable")
        header.frame_count = count
        end = stream.tell()
        stream.seek(start)
        stream.write(header.pack())
        stream.seek(end)
    return count


def iter_payloads(stream: BinaryIO, header: ContainerHeader) -> Iterator[Frame]:
    size = header.frame_bytes
    for k in range(header.frame_count):
        data = _read_exact(stream, size)
        if len(data) < size:
            raise FormatError(
                f"container truncated in frame {k}: {len(data)} of {size} bytes "
                f"({header.frame_count} frames declared)"
            )
        px = np.frombuffer(data, dtype=np.uint8).reshape(header.side, header.side, 3).copy()
        yield Frame(px, header.orig_width, header.orig_height)
    if stream.read(1):
        raise FormatError("trailing bytes after the declared frames")


def read_container(stream: BinaryIO) -> tuple[ContainerHeader, Iterator[Frame]]:
    header = ContainerHeader.unpack(_read_exact(stream, HEADER.size))
    return header, iter_payloads(stream, header)


def read_container_bytes(data: bytes) -> tuple[ContainerHeader, list[Frame]]:
    header, frames = read_container(io.BytesIO(data))
    return header, list(frames)
