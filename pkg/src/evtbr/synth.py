"""Seeded synthetic event streams for tests, demos and benchmarks.

Timestamps are evenly spaced over ``[0, duration_us)``, so a stream always
starts at t=0 and its event count is exactly ``rate * duration``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .events import EventStream, SensorGeometry, ValidationError


class Pattern(str, enum.Enum):
    MOVING_BAR = "moving_bar"
    ORBITING_DOT = "orbiting_dot"
    NOISE = "noise"


@dataclass(frozen=True)
class SyntheticSpec:
    pattern: Pattern = Pattern.NOISE
    geometry: SensorGeometry = field(default_factory=lambda: SensorGeometry(128, 128))
    duration_us: int = 1_000_000
    event_rate: float = 1000.0
    seed: int = 0
    speed_px_s: float = 64.0
    radius_px: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "pattern", Pattern(self.pattern))
        if self.duration_us < 0 or self.event_rate < 0:
            raise ValidationError("duration and rate must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")

    @property
    def event_count(self) -> int:
        return int(round(self.event_rate * self.duration_us / 1e6))

    def orbit_center(self) -> tuple[float, float]:
        return (self.geometry.width - 1) / 2, (self.geometry.height - 1) / 2


def generate(spec: SyntheticSpec) -> EventStream:
    g = spec.geometry
    n = spec.event_count
    rng = np.random.default_rng(spec.seed)
    t = np.arange(n, dtype=np.uint64) * np.uint64(spec.duration_us) // np.uint64(max(n, 1))
    seconds = t.astype(np.float64) / 1e6
    p = np.where(rng.random(n) < 0.5, -1, 1).astype(np.int8)

    if spec.pattern is Pattern.NOISE:
        x = rng.integers(0, g.width, n)
        y = rng.integers(0, g.height, n)
    elif spec.pattern is Pattern.MOVING_BAR:
        x = np.floor(spec.speed_px_s * t.astype(np.float64) / 1e6).astype(np.int64) % g.width
        y = rng.integers(0, g.height, n)
    else:
        cx, cy = spec.orbit_center()
        r = spec.radius_px
        if r <= 0 or cx - r < 0 or cy - r < 0:
            raise ValidationError(f"orbit of radius {r} does not fit a {g.width}x{g.height} sensor")
        theta = spec.speed_px_s / r * seconds
        x = np.rint(cx + r * np.cos(theta)).astype(np.int64)
        y = np.rint(cy + r * np.sin(theta)).astype(np.int64)
    return EventStream(g, t, x, y, p)
