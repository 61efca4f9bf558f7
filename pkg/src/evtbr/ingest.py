"""Readers and writers for event streams.

Two formats, both exact under a write/read roundtrip:

* CSV: ``width,height`` header line, one ``W,H`` line, then ``t,x,y,p`` rows.
* EVT1: 16-byte header (``b"EVT1"``, u16 width, u16 height, u64 count, all
  little-endian) followed by 13-byte records ``<u8 t, <u2 x, <u2 y, i1 p``.

Readers work block by block and only hold the decoded output in memory.
"""
from __future__ import annotations

import array
import io
import os
import re
import struct
from typing import BinaryIO

import numpy as np

from .events import EventStream, SensorGeometry, ValidationError

EVT_MAGIC = b"EVT1"
EVT_HEADER = struct.Struct("<4sHHQ")
EVT_RECORD = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1")])
CSV_HEADER = b"width,height"

BLOCK_RECORDS = 1 << 16

_UINT = re.compile(rb"[0-9]+\Z")


class FormatError(ValueError):
    """Input is not well-formed for the expected file format."""


def _as_reader(src) -> BinaryIO:
    if isinstance(src, (bytes, bytearray, memoryview)):
        return io.BytesIO(src)
    return src


def _stream_from_columns(geometry, t, x, y, p, sort, where):
    stream = EventStream(geometry, t, x, y, p)
    if sort:
        stream = stream.sorted()
    bad_t = np.flatnonzero(stream.t[1:] < stream.t[:-1])
    if len(bad_t):
        raise ValidationError(f"non-monotonic timestamp, {where(int(bad_t[0]) + 1)}")
    return stream


def parse_csv(src, sort: bool = False) -> EventStream:
    """Parse a CSV event file from a binary file object (or bytes)."""
    fp = _as_reader(src)
    header = fp.readline()
    if header.rstrip(b"\n") != CSV_HEADER:
        raise FormatError("expected 'width,height' header, line 1")
    dims = fp.readline().rstrip(b"\n").split(b",")
    if len(dims) != 2 or not all(_UINT.match(d) for d in dims):
        raise FormatError("malformed geometry, line 2")
    try:
        geometry = SensorGeometry(int(dims[0]), int(dims[1]))
    except ValidationError as exc:
        raise ValidationError(f"{exc}, line 2") from None
    w, h = geometry.width, geometry.height

    ts, xs, ys, ps = array.array("Q"), array.array("H"), array.array("H"), array.array("b")
    last_t = 0
    first_line = 3
    for lineno, raw in enumerate(fp, first_line):
        line = raw[:-1] if raw.endswith(b"\n") else raw
        fields = line.split(b",")
        if len(fields) != 4:
            raise FormatError(f"malformed line, line {lineno}")
        ft, fx, fy, fpol = fields
        if not (_UINT.match(ft) and _UINT.match(fx) and _UINT.match(fy)):
            raise FormatError(f"malformed line, line {lineno}")
        t, x, y = int(ft), int(fx), int(fy)
        if fpol in (b"1", b"+1"):
            p = 1
        elif fpol == b"-1":
            p = -1
        else:
            raise ValidationError(f"invalid polarity, line {lineno}")
        if t >= 1 << 64:
            raise ValidationError(f"timestamp out of range, line {lineno}")
        if x >= w:
            raise ValidationError(f"x out of bounds, line {lineno}")
        if y >= h:
            raise ValidationError(f"y out of bounds, line {lineno}")
        if t < last_t and not sort:
            raise ValidationError(f"non-monotonic timestamp, line {lineno}")
        last_t = t
        ts.append(t)
        xs.append(x)
        ys.append(y)
        ps.append(p)

    def where(i):
        return f"line {i + first_line}"

    return _stream_from_columns(
        geometry,
        np.frombuffer(ts, dtype=np.uint64),
        np.frombuffer(xs, dtype=np.uint16),
        np.frombuffer(ys, dtype=np.uint16),
        np.frombuffer(ps, dtype=np.int8),
        sort,
        where,
    )


def write_csv(stream: EventStream, fp: BinaryIO) -> None:
    g = stream.geometry
    fp.write(b"%s\n%d,%d\n" % (CSV_HEADER, g.width, g.height))
    for start in range(0, len(stream), BLOCK_RECORDS):
        sl = slice(start, start + BLOCK_RECORDS)
        rows = zip(stream.t[sl].tolist(), stream.x[sl].tolist(), stream.y[sl].tolist(), stream.p[sl].tolist())
        fp.write("".join(f"{t},{x},{y},{p}\n" for t, x, y, p in rows).encode("ascii"))


def read_evt_header(fp: BinaryIO) -> tuple[SensorGeometry, int]:
    raw = fp.read(EVT_HEADER.size)
    if len(raw) < EVT_HEADER.size or raw[:4] != EVT_MAGIC:
        raise FormatError("not an EVT1 file")
    _, width, height, count = EVT_HEADER.unpack(raw)
    try:
        geometry = SensorGeometry(width, height)
    except ValidationError as exc:
        raise FormatError(f"bad EVT1 header: {exc}") from None
    return geometry, count


def parse_evt(src, sort: bool = False) -> EventStream:
    """Parse an EVT1 binary file from a binary file object (or bytes)."""
    fp = _as_reader(src)
    geometry, count = read_evt_header(fp)
    blocks = []
    done = 0
    last_t = 0
    while done < count:
        want = min(BLOCK_RECORDS, count - done)
        raw = fp.read(want * EVT_RECORD.itemsize)
        got = len(raw) // EVT_RECORD.itemsize
        if got < want:
            raise FormatError(f"unexpected EOF at record {done + got}")
        rec = np.frombuffer(raw, dtype=EVT_RECORD)
        bad = np.flatnonzero((rec["p"] != 1) & (rec["p"] != -1))
        if len(bad):
            raise ValidationError(f"invalid polarity at record {done + int(bad[0])}")
        bad = np.flatnonzero((rec["x"] >= geometry.width) | (rec["y"] >= geometry.height))
        if len(bad):
            raise ValidationError(f"coordinates out of bounds at record {done + int(bad[0])}")
        if not sort:
            t = rec["t"]
            if t[0] < last_t:
                raise ValidationError(f"non-monotonic timestamp at record {done}")
            bad = np.flatnonzero(t[1:] < t[:-1])
            if len(bad):
                raise ValidationError(f"non-monotonic timestamp at record {done + int(bad[0]) + 1}")
            last_t = t[-1]
        blocks.append(rec)
        done += want
    rec = np.concatenate(blocks) if blocks else np.empty(0, dtype=EVT_RECORD)
    return _stream_from_columns(
        geometry, rec["t"], rec["x"], rec["y"], rec["p"], sort, lambda i: f"record {i}"
    )


def write_evt(stream: EventStream, fp: BinaryIO) -> None:
    g = stream.geometry
    fp.write(EVT_HEADER.pack(EVT_MAGIC, g.width, g.height, len(stream)))
    for start in range(0, len(stream), BLOCK_RECORDS):
        sl = slice(start, start + BLOCK_RECORDS)
        rec = np.empty(len(stream.t[sl]), dtype=EVT_RECORD)
        rec["t"], rec["x"], rec["y"], rec["p"] = stream.t[sl], stream.x[sl], stream.y[sl], stream.p[sl]
        fp.write(rec.tobytes())


def sniff_format(path) -> str:
    """Guess ``"evt"`` or ``"csv"`` from the first bytes of a file."""
    with open(path, "rb") as fp:
        head = fp.read(len(CSV_HEADER))
    if head.startswith(EVT_MAGIC):
        return "evt"
    if head == CSV_HEADER:
        return "csv"
    raise FormatError(f"{os.fspath(path)}: unrecognised event file")


def load_events(path, fmt: str | None = None, sort: bool = False) -> EventStream:
    fmt = fmt or sniff_format(path)
    parser = {"csv": parse_csv, "evt": parse_evt}[fmt]
    with open(path, "rb", buffering=1 << 20) as fp:
        return parser(fp, sort=sort)


def save_events(stream: EventStream, path, fmt: str | None = None) -> None:
    if fmt is None:
        fmt = "csv" if os.fspath(path).lower().endswith(".csv") else "evt"
    writer = {"csv": write_csv, "evt": write_evt}[fmt]
    with open(path, "wb") as fp:
        writer(stream, fp)
