"""Frame geometry preprocessing, value normalisation, chunking and voting.

Centering convention for crop and pad: the leading offset is
``(outer - inner) // 2``, so an odd remainder goes to the right/bottom.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .encoder import EncodedFrame, max_value
from .events import SensorGeometry, ValidationError


def center_offsets(outer_w: int, outer_h: int, inner_w: int, inner_h: int) -> tuple[int, int]:
    return (outer_w - inner_w) // 2, (outer_h - inner_h) // 2


def _with_values(frame: EncodedFrame, values: np.ndarray) -> EncodedFrame:
    h, w = values.shape
    return replace(frame, geometry=SensorGeometry(w, h), values=values)


def central_crop(frame: EncodedFrame, crop_w: int, crop_h: int) -> EncodedFrame:
    g = frame.geometry
    if not (1 <= crop_w <= g.width and 1 <= crop_h <= g.height):
        raise ValidationError(f"crop {crop_w}x{crop_h} does not fit a {g.width}x{g.height} frame")
    ox, oy = center_offsets(g.width, g.height, crop_w, crop_h)
    return _with_values(frame, frame.values[oy:oy + crop_h, ox:ox + crop_w])


def nearest_indices(n_in: int, n_out: int) -> np.ndarray:
    """Source index per output index, sampling at pixel centres."""
    i = np.arange(n_out, dtype=np.int64)
    # floor((i + 0.5) * n_in / n_out) in exact integer arithmetic
    return ((2 * i + 1) * n_in) // (2 * n_out)


def resize_nearest(frame: EncodedFrame, out_w: int, out_h: int) -> EncodedFrame:
    """Nearest-neighbour resize. Values are copied, never blended."""
    if out_w < 1 or out_h < 1:
        raise ValidationError("output size must be positive")
    g = frame.geometry
    rows = nearest_indices(g.height, out_h)
    cols = nearest_indices(g.width, out_w)
    return _with_values(frame, frame.values[np.ix_(rows, cols)])


def zero_pad(frame: EncodedFrame, out_w: int, out_h: int) -> EncodedFrame:
    g = frame.geometry
    if out_w < g.width or out_h < g.height:
        raise ValidationError(f"cannot pad a {g.width}x{g.height} frame down to {out_w}x{out_h}")
    ox, oy = center_offsets(out_w, out_h, g.width, g.height)
    out = np.zeros((out_h, out_w), dtype=np.uint32)
    out[oy:oy + g.height, ox:ox + g.width] = frame.values
    return _with_values(frame, out)


def normalize_signed(frame: EncodedFrame) -> np.ndarray:
    """Affine map of the frame's value range onto [-1, 1]."""
    vmax = max_value(frame.strategy, frame.n_bits)
    return 2.0 * (frame.values.astype(np.float64) / vmax) - 1.0


@dataclass(frozen=True)
class Chunk:
    frames: tuple[EncodedFrame, ...]

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        if not frames:
            raise ValidationError("a chunk holds at least one frame")
        head = frames[0]
        for prev, cur in zip(frames, frames[1:]):
            if (cur.strategy, cur.geometry, cur.n_bits, cur.delta_t_us) != (
                head.strategy, head.geometry, head.n_bits, head.delta_t_us
            ):
                raise ValidationError("chunk frames have mixed metadata")
            if cur.t_start_us != prev.t_start_us + prev.span_us:
                raise ValidationError("chunk frames are not contiguous")

    def __len__(self):
        return len(self.frames)

    @property
    def t_start_us(self) -> int:
        return self.frames[0].t_start_us

    @property
    def span_us(self) -> int:
        return len(self.frames) * self.frames[0].span_us

    def stack(self) -> np.ndarray:
        """Frames as a ``(F, h, w)`` array."""
        return np.stack([f.values for f in self.frames])


def make_chunks(frames: Sequence[EncodedFrame], frames_per_chunk: int) -> list[Chunk]:
    """Split into consecutive non-overlapping chunks; a short tail is dropped."""
    if frames_per_chunk < 1:
        raise ValueError("frames_per_chunk must be >= 1")
    frames = list(frames)
    full = len(frames) // frames_per_chunk
    return [Chunk(tuple(frames[i * frames_per_chunk:(i + 1) * frames_per_chunk])) for i in range(full)]


def majority_vote(labels) -> int:
    """Most frequent label; ties go to the smallest id."""
    counts = Counter(int(v) for v in labels)
    if not counts:
        raise ValueError("majority_vote needs at least one label")
    return min(counts, key=lambda label: (-counts[label], label))
