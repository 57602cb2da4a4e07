"""Chaotic maps and the byte generators built on them.

Two map families are supported:

* PLCM, the piecewise linear chaotic map on [0, 1] with control ``p`` in (0, 0.5).
* LASM, the two dimensional logistic-adjusted-sine map with coupled x/y updates.

A :class:`Prbg` runs one or more map instances ("lanes") in lock step, takes the
low 48 mantissa bits of every iterate as 6 little-endian bytes and XORs the lanes
together position-wise.  Bulk generation runs in numba kernels that release the
GIL so worker threads generate their streams concurrently.
"""

from __future__ import annotations

import copy
import enum
import math
import struct
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numba import njit

from .errors import DomainError

WARMUP = 256
NUDGE = 2.0**-52
MANTISSA_BYTES = 6
_LOW48 = (1 << 48) - 1

MU_BANDS = ((0.37, 0.38), (0.40, 0.42), (0.44, 0.93), (1.0, 1.0))


class MapKind(enum.IntEnum):
    PLCM = 1
    LASM = 2

    @classmethod
    def parse(cls, name: Union[str, int, "MapKind"]) -> "MapKind":
        if isinstance(name, MapKind):
            return name
        if isinstance(name, int):
            return cls(name)
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown map kind {name!r}") from None

    @property
    def bytes_per_step(self) -> int:
        return MANTISSA_BYTES if self is MapKind.PLCM else 2 * MANTISSA_BYTES


def valid_mu(mu: float) -> bool:
    return any(lo <= mu <= hi for lo, hi in MU_BANDS)


def _check_unit(name: str, v: float) -> None:
    if not (0.0 <= v <= 1.0):
        raise DomainError(f"{name}={v!r} outside [0, 1]")


def _check_p(p: float) -> None:
    if not (0.0 < p < 0.5):
        raise DomainError(f"p={p!r} outside (0, 0.5)")


def _check_mu(mu: float) -> None:
    if not valid_mu(mu):
        raise DomainError(f"mu={mu!r} outside [0.37,0.38]U[0.40,0.42]U[0.44,0.93]U{{1}}")


@dataclass(frozen=True)
class PlcmState:
    x: float
    p: float

    def __post_init__(self):
        _check_unit("x", self.x)
        _check_p(self.p)


@dataclass(frozen=True)
class LasmState:
    x: float
    y: float
    mu: float

    def __post_init__(self):
        _check_unit("x", self.x)
        _check_unit("y", self.y)
        _check_mu(self.mu)


LaneState = Union[PlcmState, LasmState]


# ---------------------------------------------------------------------------
# scalar reference maps


def plcm_step(x: float, p: float) -> float:
    """One application of the piecewise linear chaotic map."""
    _check_unit("x", x)
    _check_p(p)
    if x > 0.5:
        x = 1.0 - x
    if x < p:
        return x / p
    return (x - p) / (0.5 - p)


def plcm_guard(x: float, p: float) -> float:
    """Nudge a state sitting on a branch boundary or fixed point off it."""
    if x == 0.0 or x == p or x == 0.5 or x == 1.0:
        x += NUDGE
        if x > 1.0:
            x -= 1.0
    return x


def lasm_step(x: float, y: float, mu: float) -> tuple[float, float]:
    """One application of the 2D logistic-adjusted-sine map.

    The y update already sees the new x.
    """
    _check_unit("x", x)
    _check_unit("y", y)
    _check_mu(mu)
    x1 = math.sin(math.pi * mu * (y + 3.0) * (x * (1.0 - x)))
    y1 = math.sin(math.pi * mu * (x1 + 3.0) * (y * (1.0 - y)))
    return x1, y1


def extract_bytes(v: float) -> bytes:
    """Low 48 bits of the binary64 mantissa of ``v``, least significant byte first."""
    if not math.isfinite(v):
        raise ValueError(f"cannot extract bytes from non-finite value {v!r}")
    bits = struct.unpack("<Q", struct.pack("<d", v))[0]
    return (bits & _LOW48).to_bytes(MANTISSA_BYTES, "little")


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True, nogil=True)
def _plcm_next(x, p):
    if x > 0.5:
        x = 1.0 - x
    if x < p:
        y = x / p
    else:
        y = (x - p) / (0.5 - p)
    if y == 0.0 or y == p or y == 0.5 or y == 1.0:
        y += NUDGE
        if y > 1.0:
            y -= 1.0
    return y


@njit(cache=True, nogil=True)
def _lasm_next(x, y, mu):
    x1 = math.sin(math.pi * mu * (y + 3.0) * (x * (1.0 - x)))
    y1 = math.sin(math.pi * mu * (x1 + 3.0) * (y * (1.0 - y)))
    return x1, y1


@njit(cache=True, nogil=True)
def _xor_mantissa(out, pos, bits):
    for k in range(6):
        out[pos + k] ^= np.uint8((bits >> np.uint64(8 * k)) & np.uint64(0xFF))


@njit(cache=True, nogil=True)
def _plcm_fill(xs, ps, steps, out):
    scratch = np.empty(1, np.float64)
    bits = scratch.view(np.uint64)
    out[: steps * 6] = 0
    for s in range(steps):
        for lane in range(xs.shape[0]):
            x = _plcm_next(xs[lane], ps[lane])
            xs[lane] = x
            scratch[0] = x
            _xor_mantissa(out, s * 6, bits[0])


@njit(cache=True, nogil=True)
def _lasm_fill(xs, ys, mus, steps, out):
    scratch = np.empty(2, np.float64)
    bits = scratch.view(np.uint64)
    out[: steps * 12] = 0
    for s in range(steps):
        for lane in range(xs.shape[0]):
            x, y = _lasm_next(xs[lane], ys[lane], mus[lane])
            xs[lane] = x
            ys[lane] = y
            scratch[0] = x
            scratch[1] = y
            _xor_mantissa(out, s * 12, bits[0])
            _xor_mantissa(out, s * 12 + 6, bits[1])


@njit(cache=True, nogil=True)
def _plcm_advance(xs, ps, steps):
    for _ in range(steps):
        for lane in range(xs.shape[0]):
            xs[lane] = _plcm_next(xs[lane], ps[lane])


@njit(cache=True, nogil=True)
def _lasm_advance(xs, ys, mus, steps):
    for _ in range(steps):
        for lane in range(xs.shape[0]):
            xs[lane], ys[lane] = _lasm_next(xs[lane], ys[lane], mus[lane])


# ---------------------------------------------------------------------------


class Prbg:
    """Stateful chaotic byte generator.

    ``lanes`` holds the initial states of the map instances whose extracted
    byte streams are XORed together.  Every lane is iterated ``warmup`` times
    before the first byte is produced.  Instances are single-owner; hand them
    between threads only at phase boundaries.
    """

    def __init__(self, kind: MapKind, lanes: Sequence[LaneState], warmup: int = WARMUP):
        self.kind = MapKind.parse(kind)
        if not lanes:
            raise ValueError("a Prbg needs at least one lane")
        expected = PlcmState if self.kind is MapKind.PLCM else LasmState
        for lane in lanes:
            if not isinstance(lane, expected):
                raise TypeError(f"{self.kind.name} generator got lane {lane!r}")
        self.lanes = tuple(lanes)
        if self.kind is MapKind.PLCM:
            self._xs = np.array([plcm_guard(s.x, s.p) for s in lanes], dtype=np.float64)
            self._ps = np.array([s.p for s in lanes], dtype=np.float64)
        else:
            self._xs = np.array([s.x for s in lanes], dtype=np.float64)
            self._ys = np.array([s.y for s in lanes], dtype=np.float64)
            self._mus = np.array([s.mu for s in lanes], dtype=np.float64)
        self._pending = np.empty(0, dtype=np.uint8)
        self.bytes_emitted = 0
        self.advance(warmup)

    def advance(self, steps: int) -> None:
        """Iterate every lane ``steps`` times without emitting bytes."""
        if self.kind is MapKind.PLCM:
            _plcm_advance(self._xs, self._ps, steps)
        else:
            _lasm_advance(self._xs, self._ys, self._mus, steps)

    def _generate(self, steps: int) -> np.ndarray:
        out = np.empty(steps * self.kind.bytes_per_step, dtype=np.uint8)
        if self.kind is MapKind.PLCM:
            _plcm_fill(self._xs, self._ps, steps, out)
        else:
            _lasm_fill(self._xs, self._ys, self._mus, steps, out)
        return out

    def fill(self, count: int) -> np.ndarray:
        """Return the next ``count`` bytes of the stream."""
        if count < 0:
            raise ValueError("count must be non-negative")
        have = self._pending.size
        if count <= have:
            out = self._pending[:count].copy()
            self._pending = self._pending[count:]
        else:
            per = self.kind.bytes_per_step
            steps = -(-(count - have) // per)
            fresh = self._generate(steps)
            out = np.empty(count, dtype=np.uint8)
            out[:have] = self._pending
            take = count - have
            out[have:] = fresh[:take]
            self._pending = fresh[take:]
        self.bytes_emitted += count
        return out

    def state(self) -> list[LaneState]:
        """Current lane states (pending bytes excluded)."""
        if self.kind is MapKind.PLCM:
            return [PlcmState(float(x), float(p)) for x, p in zip(self._xs, self._ps)]
        return [
            LasmState(float(x), float(y), float(mu))
            for x, y, mu in zip(self._xs, self._ys, self._mus)
        ]

    def lane_bytes(self, lane: int, count: int) -> np.ndarray:
        """Bytes lane ``lane`` alone would contribute to the next ``count`` outputs.

        Does not advance the generator.  Only valid when no bytes are pending.
        """
        if self._pending.size:
            raise RuntimeError("lane_bytes needs a step-aligned generator")
        solo = copy.deepcopy(self)
        if self.kind is MapKind.PLCM:
            solo._xs = self._xs[lane : lane + 1].copy()
            solo._ps = self._ps[lane : lane + 1].copy()
        else:
            solo._xs = self._xs[lane : lane + 1].copy()
            solo._ys = self._ys[lane : lane + 1].copy()
            solo._mus = self._mus[lane : lane + 1].copy()
        return solo.fill(count)

    def copy(self) -> "Prbg":
        return copy.deepcopy(self)
