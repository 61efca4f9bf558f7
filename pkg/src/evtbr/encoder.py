"""Event-to-frame encoders.

Temporal Binary Representation (TBR) packs ``N`` consecutive per-window
presence bitmaps into one integer frame: the oldest window of a group lands on
bit 0 and the newest on bit ``N-1``. Two baselines are provided for
comparison: a three-level polarity image and a surface of active events.

All encoders share one window convention: window ``w`` covers the half-open
interval ``[origin + w*dt, origin + (w+1)*dt)``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .events import (
    Event,
    EncodingConfig,
    EventStream,
    SensorGeometry,
    Strategy,
    ValidationError,
    window_count,
)

POLARITY_NEGATIVE = 0
POLARITY_NONE = 1
POLARITY_POSITIVE = 2


def max_value(strategy: Strategy, n_bits: int) -> int:
    """Largest pixel value a frame of this kind may hold."""
    if strategy is Strategy.TBR:
        return (1 << n_bits) - 1
    if strategy is Strategy.POLARITY:
        return POLARITY_POSITIVE
    return 255


def empty_value(strategy: Strategy) -> int:
    return POLARITY_NONE if strategy is Strategy.POLARITY else 0


@dataclass(frozen=True, eq=False)
class BinarySlice:
    """Presence bitmap of one accumulation window."""

    geometry: SensorGeometry
    bits: np.ndarray
    window: int
    t_start_us: int

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.shape != self.geometry.shape:
            raise ValidationError(f"bitmap shape {bits.shape} != geometry {self.geometry.shape}")
        if bits.dtype != np.bool_:
            if bits.size and not np.isin(bits, (0, 1)).all():
                raise ValidationError("bitmap cells must be 0 or 1")
            bits = bits.astype(np.bool_)
        else:
            bits = bits.copy()
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def __eq__(self, other):
        if not isinstance(other, BinarySlice):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.window == other.window
            and self.t_start_us == other.t_start_us
            and np.array_equal(self.bits, other.bits)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class EncodedFrame:
    geometry: SensorGeometry
    values: np.ndarray
    strategy: Strategy
    t_start_us: int
    delta_t_us: int
    n_bits: int
    slices_present: int = 1

    def __post_init__(self):
        strategy = Strategy.parse(self.strategy)
        object.__setattr__(self, "strategy", strategy)
        values = np.asarray(self.values)
        if values.shape != self.geometry.shape:
            raise ValidationError(f"values shape {values.shape} != geometry {self.geometry.shape}")
        if values.size and (values.min() < 0 or values.max() > max_value(strategy, self.n_bits)):
            raise ValidationError(f"{strategy.name} frame value out of range")
        if values.dtype != np.uint32 or values.flags.writeable:
            values = np.array(values, dtype=np.uint32)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if strategy is not Strategy.TBR and (self.n_bits != 1 or self.slices_present != 1):
            raise ValidationError("baseline frames carry n_bits=1 and slices_present=1")
        if not 1 <= self.slices_present <= self.n_bits:
            raise ValidationError("slices_present must be in 1..n_bits")

    @property
    def span_us(self) -> int:
        """Time covered by this frame."""
        return self.n_bits * self.delta_t_us

    def __eq__(self, other):
        if not isinstance(other, EncodedFrame):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.strategy is other.strategy
            and self.t_start_us == other.t_start_us
            and self.delta_t_us == other.delta_t_us
            and self.n_bits == other.n_bits
            and self.slices_present == other.slices_present
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"EncodedFrame({self.strategy.name}, {self.geometry.width}x{self.geometry.height}, "
            f"t_start_us={self.t_start_us}, delta_t_us={self.delta_t_us}, "
            f"n_bits={self.n_bits}, slices_present={self.slices_present})"
        )


def _window_range(stream: EventStream, lo: int, hi: int) -> slice:
    i0, i1 = np.searchsorted(stream.t, np.array([lo, hi], dtype=np.uint64), side="left")
    return slice(int(i0), int(i1))


def binarize(stream: EventStream, window: int, config: EncodingConfig) -> BinarySlice:
    """Presence bitmap of ``window``: 1 wherever any event, of either polarity, fired."""
    if window < 0:
        raise ValueError("window must be >= 0")
    dt = config.delta_t_us
    t_start = config.origin_for(stream) + window * dt
    sel = _window_range(stream, t_start, t_start + dt)
    bits = np.zeros(stream.geometry.shape, dtype=np.bool_)
    bits[stream.y[sel], stream.x[sel]] = True
    return BinarySlice(stream.geometry, bits, window, t_start)


def encode_tbr(slices, config: EncodingConfig) -> EncodedFrame:
    """Pack oldest-first slices into one TBR frame.

    A short group (fewer than ``N`` slices) keeps the newest slice on the most
    significant bit; its missing leading windows read as zero low bits.
    """
    slices = list(slices)
    n = config.n_bits
    k = len(slices)
    if not 1 <= k <= n:
        raise ValidationError(f"expected 1..{n} slices, got {k}")
    geometry = slices[0].geometry
    for j, s in enumerate(slices):
        if s.geometry != geometry:
            raise ValidationError(f"slice {j} has mismatched geometry")
        if s.window != slices[0].window + j:
            raise ValidationError(f"slice {j} is not temporally consecutive")
    values = np.zeros(geometry.shape, dtype=np.uint32)
    shift = n - k
    for j, s in enumerate(slices):
        values |= s.bits.astype(np.uint32) << np.uint32(shift + j)
    return EncodedFrame(geometry, values, Strategy.TBR, slices[0].t_start_us, config.delta_t_us, n, k)


def decode_tbr(frame: EncodedFrame, t_origin_us: int = 0) -> list[BinarySlice]:
    """Unpack a TBR frame into its ``N`` slices, oldest first.

    Window ordinals are counted from ``t_origin_us``. For a short frame the
    leading padding slices are all zero and are dated before ``t_start_us``.
    """
    if frame.strategy is not Strategy.TBR:
        raise ValidationError(f"cannot decode a {frame.strategy.name} frame as TBR")
    n, dt = frame.n_bits, frame.delta_t_us
    pad = n - frame.slices_present
    base = (frame.t_start_us - t_origin_us) // dt
    out = []
    for j in range(n):
        bits = ((frame.values >> np.uint32(j)) & np.uint32(1)).astype(np.bool_)
        out.append(BinarySlice(frame.geometry, bits, base + j - pad, frame.t_start_us + (j - pad) * dt))
    return out


def normalize_tbr(frame: EncodedFrame) -> np.ndarray:
    """Map TBR values onto [0, 1] by dividing by ``2**N - 1``."""
    if frame.strategy is not Strategy.TBR:
        raise ValidationError("normalize_tbr expects a TBR frame")
    return frame.values.astype(np.float64) / float((1 << frame.n_bits) - 1)


def polarity_levels(frame: EncodedFrame) -> np.ndarray:
    """Polarity frame as the levels 0 (negative), 0.5 (no event), 1 (positive)."""
    if frame.strategy is not Strategy.POLARITY:
        raise ValidationError("polarity_levels expects a POLARITY frame")
    return frame.values.astype(np.float64) / 2.0


def polarity_to_uint8(frame: EncodedFrame) -> np.ndarray:
    """8-bit export of a polarity frame: 0, 128, 255."""
    lut = np.array([0, 128, 255], dtype=np.uint8)
    return lut[frame.values]


def _encode_window(stream: EventStream, window: int, config: EncodingConfig, strategy: Strategy) -> EncodedFrame:
    if window < 0:
        raise ValueError("window must be >= 0")
    dt = config.delta_t_us
    origin = config.origin_for(stream)
    t_start = origin + window * dt
    sel = _window_range(stream, t_start, t_start + dt)
    out = np.full((1, *stream.geometry.shape), empty_value(strategy), dtype=np.uint32)
    if strategy is Strategy.POLARITY:
        kernels.polarity_fill(out, stream.t[sel], stream.x[sel], stream.y[sel], stream.p[sel], origin, dt, window)
    else:
        kernels.sae_fill(out, stream.t[sel], stream.x[sel], stream.y[sel], origin, dt, window)
    return EncodedFrame(stream.geometry, out[0], strategy, t_start, dt, 1, 1)


def encode_polarity(stream: EventStream, window: int, config: EncodingConfig) -> EncodedFrame:
    """Three-level image of the latest event per pixel in ``window``."""
    return _encode_window(stream, window, config, Strategy.POLARITY)


def encode_sae(stream: EventStream, window: int, config: EncodingConfig) -> EncodedFrame:
    """``round(255 * (t_last - t_window_start) / dt)`` per pixel, 0 where no event fired."""
    return _encode_window(stream, window, config, Strategy.SAE)


def _fill(strategy, out, stream, sel, origin, dt, per_frame, base):
    t, x, y = stream.t[sel], stream.x[sel], stream.y[sel]
    if strategy is Strategy.TBR:
        kernels.tbr_fill(out, t, x, y, origin, dt, per_frame, base)
    elif strategy is Strategy.POLARITY:
        kernels.polarity_fill(out, t, x, y, stream.p[sel], origin, dt, base)
    else:
        kernels.sae_fill(out, t, x, y, origin, dt, base)


def _split(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    bounds = [total * i // parts for i in range(parts + 1)]
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]


def encode_values(stream: EventStream, config: EncodingConfig, workers: int = 1):
    """Encode a whole stream into a ``(frames, h, w)`` uint32 array.

    Returns ``(values, origin, slices_in_last_frame)``. With ``workers > 1``
    frame ranges are filled concurrently; output is identical to a serial run.
    """
    stream.checked()
    strategy = config.strategy
    per = config.effective_bits
    dt = config.delta_t_us
    if len(stream) == 0:
        return np.zeros((0, *stream.geometry.shape), dtype=np.uint32), config.origin_for(stream), 0
    origin = config.origin_for(stream)
    if int(stream.t[0]) < origin:
        raise ValidationError(f"event precedes origin (t={int(stream.t[0])}, origin={origin})")
    n_windows = window_count(stream, config)
    n_frames = -(-n_windows // per)
    out = np.full((n_frames, *stream.geometry.shape), empty_value(strategy), dtype=np.uint32)

    def work(rng):
        a, b = rng
        lo, hi = origin + a * per * dt, origin + b * per * dt
        _fill(strategy, out[a:b], stream, _window_range(stream, lo, hi), origin, dt, per, a)

    ranges = _split(n_frames, workers)
    if len(ranges) == 1:
        work(ranges[0])
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            list(pool.map(work, ranges))

    last_k = n_windows - (n_frames - 1) * per
    if strategy is Strategy.TBR and last_k < per:
        out[-1] <<= np.uint32(per - last_k)
    return out, origin, last_k


def encode_stream(stream: EventStream, config: EncodingConfig, workers: int = 1) -> list[EncodedFrame]:
    """Encode a stream into time-ordered, non-overlapping frames.

    TBR yields ``ceil(windows / N)`` frames, the last possibly short; the
    baselines yield one frame per window. Empty windows inside the span still
    produce (empty) frames.
    """
    values, origin, last_k = encode_values(stream, config, workers)
    values.setflags(write=False)
    per = config.effective_bits
    span = per * config.delta_t_us
    frames = []
    for i in range(len(values)):
        k = last_k if (i == len(values) - 1 and config.strategy is Strategy.TBR) else per
        frames.append(
            EncodedFrame(stream.geometry, values[i], config.strategy, origin + i * span, config.delta_t_us, per, k)
        )
    return frames


class StreamingEncoder:
    """Online counterpart of :func:`encode_stream`.

    Events must arrive in non-decreasing timestamp order. A frame is emitted
    as soon as an event lands in a later frame's time range; :meth:`flush`
    emits the final, possibly short, frame. The concatenated output equals
    :func:`encode_stream` on the same events.
    """

    def __init__(self, config: EncodingConfig, geometry: SensorGeometry):
        self.config = config
        self.geometry = geometry
        self._per = config.effective_bits
        self._empty = empty_value(config.strategy)
        self._origin = config.t_origin_us
        self._group = 0
        self._acc = self._blank(1)
        self._pending = False
        self._last_t: int | None = None
        self._last_window = 0
        self._closed = False

    @property
    def origin(self) -> int | None:
        return self._origin

    @property
    def state_bytes(self) -> int:
        """Bytes held by the open window-group accumulator."""
        return self._acc.nbytes

    def _blank(self, n):
        return np.full((n, *self.geometry.shape), self._empty, dtype=np.uint32)

    def _frame(self, values, group, k) -> EncodedFrame:
        dt = self.config.delta_t_us
        return EncodedFrame(
            self.geometry, values, self.config.strategy,
            self._origin + group * self._per * dt, dt, self._per, k,
        )

    def _advance(self, group: int) -> list[EncodedFrame]:
        # close every frame before ``group``; frames without events come out empty
        if group == self._group:
            return []
        frames = [self._frame(self._acc[0], self._group, self._per)]
        blank = self._blank(1)[0]
        frames.extend(self._frame(blank, g, self._per) for g in range(self._group + 1, group))
        self._group = group
        self._acc = self._blank(1)
        self._pending = False
        return frames

    def _admit(self, t_first: int, t_last: int) -> None:
        if self._closed:
            raise ValidationError("encoder already flushed")
        if self._last_t is not None and t_first < self._last_t:
            raise ValidationError(f"out-of-order event at t={t_first} (previous t={self._last_t})")
        if self._origin is None:
            self._origin = t_first
        if t_first < self._origin:
            raise ValidationError(f"event precedes origin (t={t_first}, origin={self._origin})")

    def push(self, event) -> list[EncodedFrame]:
        """Feed one ``(t, x, y, p)`` event; returns the frames it completes."""
        t, x, y, p = (int(v) for v in event)
        if not (0 <= x < self.geometry.width and 0 <= y < self.geometry.height):
            raise ValidationError(f"event at t={t} out of bounds ({x}, {y})")
        if p not in (-1, 1):
            raise ValidationError(f"invalid polarity {p} at t={t}")
        self._admit(t, t)
        dt = self.config.delta_t_us
        elapsed = t - self._origin
        w = elapsed // dt
        frames = self._advance(w // self._per)
        strategy = self.config.strategy
        if strategy is Strategy.TBR:
            self._acc[0, y, x] |= np.uint32(1 << (w % self._per))
        elif strategy is Strategy.POLARITY:
            self._acc[0, y, x] = POLARITY_POSITIVE if p > 0 else POLARITY_NEGATIVE
        else:
            self._acc[0, y, x] = (510 * (elapsed - w * dt) + dt) // (2 * dt)
        self._last_t = t
        self._last_window = w
        self._pending = True
        return frames

    def push_many(self, t, x, y, p) -> list[EncodedFrame]:
        """Feed a time-ordered batch of events given as columns."""
        batch = EventStream(self.geometry, t, x, y, p).checked()
        if len(batch) == 0:
            return []
        t0, t1 = int(batch.t[0]), int(batch.t[-1])
        self._admit(t0, t1)
        dt = self.config.delta_t_us
        w_first = (t0 - self._origin) // dt
        w_last = (t1 - self._origin) // dt
        g_first, g_last = w_first // self._per, w_last // self._per
        frames = self._advance(g_first)
        buf = self._blank(g_last - g_first + 1)
        buf[0] = self._acc[0]
        _fill(self.config.strategy, buf, batch, slice(None), self._origin, dt, self._per, g_first)
        frames.extend(self._frame(buf[i], g_first + i, self._per) for i in range(len(buf) - 1))
        self._group = g_last
        self._acc = buf[-1:].copy()
        self._last_t = t1
        self._last_window = w_last
        self._pending = True
        return frames

    def flush(self) -> EncodedFrame | None:
        """Emit the open frame if it holds any event, then close the encoder."""
        self._closed = True
        if not self._pending:
            return None
        self._pending = False
        k = self._last_window - self._group * self._per + 1
        values = self._acc[0]
        if self.config.strategy is Strategy.TBR and k < self._per:
            values = values << np.uint32(self._per - k)
        else:
            k = self._per
        return self._frame(values, self._group, k)


def encode_events(events, config: EncodingConfig, geometry: SensorGeometry) -> list[EncodedFrame]:
    """Run a :class:`StreamingEncoder` over an iterable of events."""
    enc = StreamingEncoder(config, geometry)
    frames: list[EncodedFrame] = []
    for ev in events:
        frames.extend(enc.push(Event(*ev)))
    last = enc.flush()
    if last is not None:
        frames.append(last)
    return frames
