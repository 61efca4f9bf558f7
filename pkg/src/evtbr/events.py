"""Core event types shared by every other module.

Events are stored column-wise (one numpy array per field) so that streams of
tens of millions of events stay cheap. A single :class:`Event` is only
materialised when a caller indexes or iterates a stream.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

MAX_N_BITS = 32
MAX_DIM = 65535

T_DTYPE = np.dtype(np.uint64)
XY_DTYPE = np.dtype(np.uint16)
P_DTYPE = np.dtype(np.int8)


class ValidationError(ValueError):
    """An invariant of the event model does not hold."""


class Strategy(enum.IntEnum):
    """Frame encoding strategy. Values double as the EFR strategy code."""

    TBR = 0
    POLARITY = 1
    SAE = 2

    @classmethod
    def parse(cls, name: str | Strategy) -> Strategy:
        if isinstance(name, Strategy):
            return name
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown strategy {name!r}") from None


class Event(NamedTuple):
    t: int
    x: int
    y: int
    p: int


@dataclass(frozen=True)
class SensorGeometry:
    width: int
    height: int

    def __post_init__(self):
        for name in ("width", "height"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 1 <= v <= MAX_DIM:
                raise ValidationError(f"{name} must be in 1..{MAX_DIM}, got {v!r}")

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(height, width)``."""
        return (self.height, self.width)


def _column(values, dtype: np.dtype) -> np.ndarray:
    arr = np.ascontiguousarray(values)
    if arr.dtype != dtype:
        src = np.asarray(values)
        if src.size and src.dtype.kind in "iu":
            info = np.iinfo(dtype)
            if src.min() < info.min or src.max() > info.max:
                raise ValidationError(f"value out of range for {dtype}")
        arr = np.ascontiguousarray(src, dtype=dtype)
    else:
        arr = arr.copy() if arr.flags.writeable else arr
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EventStream:
    """Sensor geometry plus a time-ordered sequence of events.

    Construction does not validate ordering or bounds; use
    :func:`validate_stream` or :meth:`checked`.
    """

    geometry: SensorGeometry
    t: np.ndarray = field(default_factory=lambda: np.empty(0, T_DTYPE))
    x: np.ndarray = field(default_factory=lambda: np.empty(0, XY_DTYPE))
    y: np.ndarray = field(default_factory=lambda: np.empty(0, XY_DTYPE))
    p: np.ndarray = field(default_factory=lambda: np.empty(0, P_DTYPE))

    def __post_init__(self):
        object.__setattr__(self, "t", _column(self.t, T_DTYPE))
        object.__setattr__(self, "x", _column(self.x, XY_DTYPE))
        object.__setattr__(self, "y", _column(self.y, XY_DTYPE))
        object.__setattr__(self, "p", _column(self.p, P_DTYPE))
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.p) == n):
            raise ValidationError("event columns have different lengths")
        for name in ("t", "x", "y", "p"):
            if getattr(self, name).ndim != 1:
                raise ValidationError(f"column {name} must be one-dimensional")

    @classmethod
    def from_events(cls, geometry: SensorGeometry, events) -> EventStream:
        events = list(events)
        if not events:
            return cls(geometry)
        t, x, y, p = zip(*events)
        return cls(geometry, np.array(t, dtype=T_DTYPE), np.array(x), np.array(y), np.array(p))

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.t[i]), int(self.x[i]), int(self.y[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[Event]:
        for row in zip(self.t.tolist(), self.x.tolist(), self.y.tolist(), self.p.tolist()):
            yield Event(*row)

    def __eq__(self, other):
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.p, other.p)
        )

    __hash__ = None

    def checked(self) -> EventStream:
        """Return self, raising :class:`ValidationError` on the first violation."""
        violations = validate_stream(self)
        if violations:
            raise ValidationError(str(violations[0]))
        return self

    def sorted(self) -> EventStream:
        """Stable sort by timestamp."""
        order = np.argsort(self.t, kind="stable")
        return EventStream(self.geometry, self.t[order], self.x[order], self.y[order], self.p[order])

    def shifted(self, dt: int) -> EventStream:
        return EventStream(self.geometry, self.t + np.uint64(dt), self.x, self.y, self.p)


@dataclass(frozen=True)
class EncodingConfig:
    delta_t_us: int
    n_bits: int = 8
    strategy: Strategy = Strategy.TBR
    t_origin_us: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        if int(self.delta_t_us) < 1:
            raise ValidationError("delta_t_us must be >= 1")
        if not 1 <= int(self.n_bits) <= MAX_N_BITS:
            raise ValidationError(f"n_bits must be in 1..{MAX_N_BITS}")
        if self.t_origin_us is not None and int(self.t_origin_us) < 0:
            raise ValidationError("t_origin_us must be non-negative")

    @property
    def effective_bits(self) -> int:
        """Windows per emitted frame: N for TBR, 1 for the baselines."""
        return self.n_bits if self.strategy is Strategy.TBR else 1

    def origin_for(self, stream: EventStream) -> int:
        if self.t_origin_us is not None:
            return int(self.t_origin_us)
        return int(stream.t[0]) if len(stream) else 0


class Violation(NamedTuple):
    index: int
    message: str

    def __str__(self):
        return self.message


def validate_stream(stream: EventStream) -> list[Violation]:
    """Check every stream invariant. An empty list means the stream is valid."""
    out: list[Violation] = []
    if len(stream) == 0:
        return out
    w, h = stream.geometry.width, stream.geometry.height
    checks = [
        (np.flatnonzero(stream.t[1:] < stream.t[:-1]) + 1, "non-monotonic"),
        (np.flatnonzero(stream.x >= w), "x out of bounds"),
        (np.flatnonzero(stream.y >= h), "y out of bounds"),
        (np.flatnonzero((stream.p != 1) & (stream.p != -1)), "invalid polarity"),
    ]
    for idx, what in checks:
        out.extend(Violation(int(i), f"{what} at index {int(i)}") for i in idx)
    out.sort(key=lambda v: v.index)
    return out


def window_index(t: int, t_origin: int, delta_t_us: int) -> int:
    """Ordinal of the half-open window ``[origin + w*dt, origin + (w+1)*dt)`` holding ``t``."""
    if delta_t_us < 1:
        raise ValueError("delta_t_us must be >= 1")
    if t < t_origin:
        raise ValueError(f"event precedes origin (t={t}, origin={t_origin})")
    return (int(t) - int(t_origin)) // int(delta_t_us)


def window_count(stream: EventStream, config: EncodingConfig) -> int:
    """Windows spanned from the origin through the last event (0 for an empty stream)."""
    if len(stream) == 0:
        return 0
    origin = config.origin_for(stream)
    return window_index(int(stream.t[-1]), origin, config.delta_t_us) + 1
