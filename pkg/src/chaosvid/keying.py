"""User keys, the coordinator generator, and per-worker parameter derivation."""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass

from .chaos import LaneState, LasmState, MapKind, PlcmState, Prbg
from .errors import DomainError, KeyFormatError

SEED_MODULUS = 2**32 - 1
_UNIT_BYTES = 6
_UNIT_SCALE = float(2**48 - 1)

PARAM_NAMES = {
    MapKind.PLCM: ("x0_a", "p_a", "x0_b", "p_b"),
    MapKind.LASM: ("x0", "y0", "mu"),
}

# target intervals for derived worker parameters
X_RANGE = (0.0, 1.0)
P_RANGE = (0.0, 0.5)
MU_RANGE = (0.44, 0.93)


@dataclass(frozen=True)
class Key:
    map_kind: MapKind
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "map_kind", MapKind.parse(self.map_kind))
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        names = PARAM_NAMES[self.map_kind]
        if len(self.params) != len(names):
            raise DomainError(
                f"{self.map_kind.name} key needs {len(names)} parameters, got {len(self.params)}"
            )
        # constructing the lane states validates every domain
        self.lane_states()

    def lane_states(self) -> list[LaneState]:
        if self.map_kind is MapKind.PLCM:
            xa, pa, xb, pb = self.params
            return [PlcmState(xa, pa), PlcmState(xb, pb)]
        x0, y0, mu = self.params
        # three reals initialise a single 2D map
        return [LasmState(x0, y0, mu)]

    @property
    def bits(self) -> int:
        return 64 * len(self.params)

    def to_hex(self) -> str:
        payload = struct.pack(f"<{len(self.params)}d", *self.params)
        return (bytes([int(self.map_kind)]) + payload).hex()

    def perturb(self, index: int, delta: float) -> "Key":
        params = list(self.params)
        params[index] += delta
        return Key(self.map_kind, tuple(params))

    def __str__(self) -> str:
        return self.to_hex()


def parse_key(text: str) -> Key:
    text = text.strip()
    try:
        raw = bytes.fromhex(text)
    except ValueError as exc:
        raise KeyFormatError(f"key is not valid hex: {exc}") from None
    if not raw:
        raise KeyFormatError("empty key")
    try:
        kind = MapKind(raw[0])
    except ValueError:
        raise KeyFormatError(f"unknown map tag 0x{raw[0]:02x}") from None
    count = len(PARAM_NAMES[kind])
    payload = raw[1:]
    if len(payload) != 8 * count:
        raise KeyFormatError(
            f"{kind.name} key payload must be {8 * count} bytes, got {len(payload)}"
        )
    params = struct.unpack(f"<{count}d", payload)
    if not all(math.isfinite(v) for v in params):
        raise DomainError("key parameters must be finite")
    return Key(kind, params)


def serialize_key(key: Key) -> str:
    return key.to_hex()


def generate_key(kind: MapKind | str, rng: random.Random | None = None) -> Key:
    """Draw a random key; the default source is the OS entropy pool."""
    kind = MapKind.parse(kind)
    rng = rng or random.SystemRandom()
    if kind is MapKind.PLCM:
        vals = (
            to_interval(rng.random(), *X_RANGE),
            to_interval(rng.random(), *P_RANGE),
            to_interval(rng.random(), *X_RANGE),
            to_interval(rng.random(), *P_RANGE),
        )
    else:
        vals = (
            to_interval(rng.random(), *X_RANGE),
            to_interval(rng.random(), *X_RANGE),
            to_interval(rng.random(), *MU_RANGE),
        )
    return Key(kind, vals)


def to_interval(u: float, lo: float, hi: float) -> float:
    """Affine map of u in [0, 1] onto the open interval (lo, hi)."""
    v = lo + u * (hi - lo)
    if v <= lo:
        v = math.nextafter(lo, hi)
    if v >= hi:
        v = math.nextafter(hi, lo)
    return v


@dataclass(frozen=True)
class WorkerParams:
    """Two lane states per worker, indexed by worker number."""

    map_kind: MapKind
    lanes: tuple[tuple[LaneState, LaneState], ...]

    def __len__(self) -> int:
        return len(self.lanes)

    def __getitem__(self, i: int) -> tuple[LaneState, LaneState]:
        return self.lanes[i]

    def prbg(self, i: int) -> Prbg:
        return Prbg(self.map_kind, self.lanes[i])


def seed_from_bytes(raw: bytes) -> int:
    u = int.from_bytes(bytes(raw[:4]), "little")
    return u % SEED_MODULUS + 1


def next_confusion_seed(coordinator: Prbg) -> int:
    """Draw one per-frame confusion seed in [1, 2**32 - 1]."""
    return seed_from_bytes(coordinator.fill(4).tobytes())


class Coordinator:
    """The main-lane generator: worker parameters first, then one seed per frame."""

    def __init__(self, key: Key):
        self.key = key
        self.prbg = Prbg(key.map_kind, key.lane_states())
        self.seed_draws = 0

    def unit(self) -> float:
        raw = self.prbg.fill(_UNIT_BYTES).tobytes()
        return int.from_bytes(raw, "little") / _UNIT_SCALE

    def derive_worker_params(self, n: int) -> WorkerParams:
        if n < 1:
            raise ValueError("need at least one worker")
        kind = self.key.map_kind
        workers = []
        for _ in range(n):
            pair = []
            for _lane in range(2):
                if kind is MapKind.PLCM:
                    x = to_interval(self.unit(), *X_RANGE)
                    p = to_interval(self.unit(), *P_RANGE)
                    pair.append(PlcmState(x, p))
                else:
                    x = to_interval(self.unit(), *X_RANGE)
                    y = to_interval(self.unit(), *X_RANGE)
                    mu = to_interval(self.unit(), *MU_RANGE)
                    pair.append(LasmState(x, y, mu))
            workers.append(tuple(pair))
        return WorkerParams(kind, tuple(workers))

    def next_confusion_seed(self) -> int:
        self.seed_draws += 1
        return next_confusion_seed(self.prbg)


def derive_worker_params(key: Key, n: int) -> WorkerParams:
    return Coordinator(key).derive_worker_params(n)
