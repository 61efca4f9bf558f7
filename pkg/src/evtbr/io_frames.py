"""Lossless on-disk formats for encoded frames.

PGM (Netpbm P5) is the inspectable export for a single frame. EFR1 holds a
whole frame sequence together with its timing metadata::

    header  b"EFR1" | u8 strategy | u16 width | u16 height | u8 n_bits
            | u64 delta_t_us | u64 frame_count              (26 bytes, LE)
    frame   u64 t_start_us | u8 slices_present | h*w pixels (row-major, LE)

Pixels use 1 byte for baseline frames and TBR with ``N <= 8``, 2 bytes for
``N <= 16`` and 4 bytes beyond.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from typing import BinaryIO, Sequence

import numpy as np

from .encoder import EncodedFrame, max_value, polarity_to_uint8
from .events import SensorGeometry, Strategy, ValidationError
from .ingest import FormatError

EFR_MAGIC = b"EFR1"
EFR_HEADER = struct.Struct("<4sBHHBQQ")
EFR_FRAME_PREFIX = struct.Struct("<QB")

PGM_MAX_BITS = 16


def _as_reader(src) -> BinaryIO:
    if isinstance(src, (bytes, bytearray, memoryview)):
        return io.BytesIO(src)
    return src


def pgm_maxval(strategy: Strategy, n_bits: int) -> int:
    return (1 << n_bits) - 1 if strategy is Strategy.TBR else 255


def write_pgm(frame: EncodedFrame, fp: BinaryIO) -> None:
    """Write a frame as binary PGM (P5)."""
    if frame.strategy is Strategy.TBR and frame.n_bits > PGM_MAX_BITS:
        raise ValidationError("frame not PGM-representable; use EFR")
    if frame.strategy is Strategy.POLARITY:
        values = polarity_to_uint8(frame)
    else:
        values = frame.values
    write_pgm_array(values, pgm_maxval(frame.strategy, frame.n_bits), fp)


def write_pgm_array(values: np.ndarray, maxval: int, fp: BinaryIO) -> None:
    if not 1 <= maxval <= 65535:
        raise ValueError("PGM maxval must be in 1..65535")
    h, w = values.shape
    dtype = ">u1" if maxval <= 255 else ">u2"
    fp.write(b"P5\n%d %d\n%d\n" % (w, h, maxval))
    fp.write(np.ascontiguousarray(values, dtype=dtype).tobytes())


def _pgm_token(fp: BinaryIO) -> bytes:
    token = b""
    while True:
        c = fp.read(1)
        if not c:
            break
        if c == b"#":
            fp.readline()
            continue
        if c.isspace():
            if token:
                break
            continue
        token += c
    if not token:
        raise FormatError("truncated PGM header")
    return token


def read_pgm_array(src) -> tuple[np.ndarray, int]:
    """Read a P5 image; returns ``(values, maxval)``."""
    fp = _as_reader(src)
    if fp.read(2) != b"P5":
        raise FormatError("not a binary PGM (P5) file")
    try:
        w, h, maxval = (int(_pgm_token(fp)) for _ in range(3))
    except ValueError:
        raise FormatError("malformed PGM header") from None
    if not 1 <= maxval <= 65535:
        raise FormatError(f"invalid PGM maxval {maxval}")
    dtype = np.dtype(">u1" if maxval <= 255 else ">u2")
    raw = fp.read(w * h * dtype.itemsize)
    if len(raw) != w * h * dtype.itemsize:
        raise FormatError("truncated PGM raster")
    return np.frombuffer(raw, dtype=dtype).reshape(h, w).astype(np.uint32), maxval


def read_pgm(src, strategy: Strategy = Strategy.TBR) -> np.ndarray:
    """Read a PGM written by :func:`write_pgm` back to frame values."""
    values, _ = read_pgm_array(src)
    if Strategy.parse(strategy) is Strategy.POLARITY:
        codes = np.full(values.shape, 255, dtype=np.uint32)
        for code, level in enumerate((0, 128, 255)):
            codes[values == level] = code
        if (codes == 255).any():
            raise FormatError("PGM holds values outside the polarity levels 0/128/255")
        return codes
    return values


@dataclass(frozen=True)
class FrameSetHeader:
    strategy: Strategy
    geometry: SensorGeometry
    n_bits: int
    delta_t_us: int
    frame_count: int

    @property
    def pixel_bytes(self) -> int:
        vmax = max_value(self.strategy, self.n_bits)
        return 1 if vmax <= 0xFF else 2 if vmax <= 0xFFFF else 4

    @property
    def frame_bytes(self) -> int:
        return EFR_FRAME_PREFIX.size + self.geometry.width * self.geometry.height * self.pixel_bytes

    def pack(self) -> bytes:
        g = self.geometry
        return EFR_HEADER.pack(
            EFR_MAGIC, int(self.strategy), g.width, g.height, self.n_bits, self.delta_t_us, self.frame_count
        )

    @classmethod
    def unpack(cls, raw: bytes) -> FrameSetHeader:
        if len(raw) < EFR_HEADER.size or raw[:4] != EFR_MAGIC:
            raise FormatError("not an EFR1 file")
        _, code, width, height, n_bits, dt, count = EFR_HEADER.unpack(raw[: EFR_HEADER.size])
        try:
            return cls(Strategy(code), SensorGeometry(width, height), n_bits, dt, count)
        except ValueError as exc:
            raise FormatError(f"bad EFR1 header: {exc}") from None

    @classmethod
    def for_frames(cls, frames: Sequence[EncodedFrame]) -> FrameSetHeader:
        f = frames[0]
        return cls(f.strategy, f.geometry, f.n_bits, f.delta_t_us, len(frames))


def efr_size(width: int, height: int, pixel_bytes: int, frame_count: int) -> int:
    return EFR_HEADER.size + frame_count * (EFR_FRAME_PREFIX.size + width * height * pixel_bytes)


def write_efr(frames: Sequence[EncodedFrame], fp: BinaryIO, header: FrameSetHeader | None = None) -> None:
    """Write a frame set. ``header`` is required only when ``frames`` is empty."""
    frames = list(frames)
    if frames:
        derived = FrameSetHeader.for_frames(frames)
        if header is not None and header != derived:
            raise ValidationError("header does not match frames")
        header = derived
    elif header is None:
        raise ValueError("an empty frame set needs an explicit header")
    head = frames[0] if frames else None
    for f in frames:
        if (f.strategy, f.geometry, f.n_bits, f.delta_t_us) != (
            head.strategy, head.geometry, head.n_bits, head.delta_t_us
        ):
            raise ValidationError("frames have mixed metadata")
    dtype = np.dtype(f"<u{header.pixel_bytes}")
    fp.write(header.pack())
    for f in frames:
        fp.write(EFR_FRAME_PREFIX.pack(f.t_start_us, f.slices_present))
        fp.write(f.values.astype(dtype).tobytes())


def read_efr_header(src) -> FrameSetHeader:
    return FrameSetHeader.unpack(_as_reader(src).read(EFR_HEADER.size))


def iter_efr(src):
    """Yield ``header`` then each frame of an EFR1 file."""
    fp = _as_reader(src)
    header = read_efr_header(fp)
    yield header
    g = header.geometry
    dtype = np.dtype(f"<u{header.pixel_bytes}")
    n_pix = g.width * g.height
    for i in range(header.frame_count):
        raw = fp.read(header.frame_bytes)
        if len(raw) != header.frame_bytes:
            raise FormatError(f"unexpected EOF in frame {i}")
        t_start, present = EFR_FRAME_PREFIX.unpack_from(raw)
        values = np.frombuffer(raw, dtype=dtype, count=n_pix, offset=EFR_FRAME_PREFIX.size)
        try:
            yield EncodedFrame(
                g, values.reshape(g.shape).astype(np.uint32), header.strategy,
                t_start, header.delta_t_us, header.n_bits, present,
            )
        except ValidationError as exc:
            raise FormatError(f"frame {i}: {exc}") from None


def read_efr(src) -> tuple[FrameSetHeader, list[EncodedFrame]]:
    it = iter_efr(src)
    header = next(it)
    return header, list(it)
