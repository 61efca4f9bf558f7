"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 I/O or format error (including
bad usage). Diagnostics go to stderr; machine-readable output to stdout.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bench import run_bench
from .encoder import decode_tbr, encode_stream
from .events import EncodingConfig, SensorGeometry, Strategy, ValidationError
from .framepipe import make_chunks, majority_vote
from .ingest import (
    CSV_HEADER,
    EVT_MAGIC,
    FormatError,
    load_events,
    save_events,
)
from .io_frames import (
    EFR_MAGIC,
    FrameSetHeader,
    read_efr,
    read_pgm_array,
    write_efr,
    write_pgm,
    write_pgm_array,
)
from .synth import Pattern, SyntheticSpec, generate

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = _u64(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _bits(text: str) -> int:
    v = int(text)
    if not 1 <= v <= 32:
        raise argparse.ArgumentTypeError("bits must be in 1..32")
    return v


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _config(args) -> EncodingConfig:
    return EncodingConfig(args.delta_t_us, args.bits, Strategy.parse(args.strategy), getattr(args, "t_origin_us", None))


def cmd_encode(args) -> int:
    stream = load_events(args.input, args.in_format, sort=args.sort)
    frames = encode_stream(stream, _config(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.out_format == "efr":
        path = out / "frames.efr"
        header = None if frames else FrameSetHeader(
            Strategy.parse(args.strategy), stream.geometry, _config(args).effective_bits, args.delta_t_us, 0
        )
        with open(path, "wb") as fp:
            write_efr(frames, fp, header)
    else:
        for i, frame in enumerate(frames):
            with open(out / f"frame_{i:06d}.pgm", "wb") as fp:
                write_pgm(frame, fp)
    _emit({"events": len(stream), "frames": len(frames), "out": str(out), "format": args.out_format})
    return EXIT_OK


def cmd_decode(args) -> int:
    header, frames = read_efr(Path(args.input).read_bytes())
    if header.strategy is not Strategy.TBR:
        raise ValidationError(f"decode needs a TBR frame set, got {header.strategy.name}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for i, frame in enumerate(frames):
        for j, sl in enumerate(decode_tbr(frame)):
            with open(out / f"frame_{i:06d}_slice_{j:02d}.pgm", "wb") as fp:
                write_pgm_array(sl.bits.astype(np.uint8), 1, fp)
            written += 1
    _emit({"frames": len(frames), "slices": written, "out": str(out)})
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = SyntheticSpec(
        pattern=Pattern(args.pattern),
        geometry=SensorGeometry(args.width, args.height),
        duration_us=args.duration_us,
        event_rate=args.rate,
        seed=args.seed,
        speed_px_s=args.speed,
        radius_px=args.radius,
    )
    stream = generate(spec)
    save_events(stream, args.out, args.format)
    _emit({"events": len(stream), "out": args.out})
    return EXIT_OK


def cmd_chunk(args) -> int:
    header, frames = read_efr(Path(args.input).read_bytes())
    chunks = make_chunks(frames, args.frames_per_chunk)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, chunk in enumerate(chunks):
        with open(out / f"chunk_{i:06d}.efr", "wb") as fp:
            write_efr(chunk.frames, fp)
    _emit({
        "chunks": len(chunks),
        "frames_per_chunk": args.frames_per_chunk,
        "span_us": chunks[0].span_us if chunks else args.frames_per_chunk * header.n_bits * header.delta_t_us,
        "dropped_frames": len(frames) - len(chunks) * args.frames_per_chunk,
    })
    return EXIT_OK


def _read_labels(source: str) -> list[int]:
    if source == "-":
        text = sys.stdin.read()
    elif os.path.exists(source):
        text = Path(source).read_text()
    else:
        text = source
    tokens = [tok for tok in text.replace("\n", ",").split(",") if tok.strip()]
    try:
        return [int(tok) for tok in tokens]
    except ValueError:
        raise ValidationError("labels must be integers") from None


def cmd_vote(args) -> int:
    labels = _read_labels(args.labels)
    if not labels:
        raise ValidationError("no labels given")
    print(majority_vote(labels))
    return EXIT_OK


def cmd_bench(args) -> int:
    stream = load_events(args.input)
    report = run_bench(stream, _config(args), threads=args.threads, repeats=args.repeats)
    _emit(report)
    return EXIT_OK


def cmd_info(args) -> int:
    with open(args.input, "rb") as fp:
        head = fp.read(len(CSV_HEADER))
    if head.startswith(EFR_MAGIC):
        header, frames = read_efr(Path(args.input).read_bytes())
        info = {
            "format": "efr",
            "strategy": header.strategy.name.lower(),
            "width": header.geometry.width,
            "height": header.geometry.height,
            "n_bits": header.n_bits,
            "delta_t_us": header.delta_t_us,
            "frames": header.frame_count,
            "t_start_us": frames[0].t_start_us if frames else None,
            "span_us": header.frame_count * header.n_bits * header.delta_t_us,
        }
    elif head.startswith(b"P5"):
        values, maxval = read_pgm_array(Path(args.input).read_bytes())
        info = {"format": "pgm", "width": values.shape[1], "height": values.shape[0], "maxval": maxval,
                "nonzero": int(np.count_nonzero(values))}
    elif head.startswith(EVT_MAGIC) or head == CSV_HEADER:
        stream = load_events(args.input, sort=True)
        n = len(stream)
        info = {
            "format": "evt" if head.startswith(EVT_MAGIC) else "csv",
            "width": stream.geometry.width,
            "height": stream.geometry.height,
            "events": n,
            "t_first_us": int(stream.t[0]) if n else None,
            "t_last_us": int(stream.t[-1]) if n else None,
            "positive": int(np.count_nonzero(stream.p > 0)),
            "negative": int(np.count_nonzero(stream.p < 0)),
        }
    else:
        raise FormatError(f"{args.input}: unrecognised file")
    _emit(info)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evtbr", description="Event stream to frame encoding tools")
    sub = parser.add_subparsers(dest="command", required=True)

    def encoding_flags(p):
        p.add_argument("--strategy", choices=["tbr", "polarity", "sae"], default="tbr")
        p.add_argument("--delta-t-us", type=_positive, default=2500)
        p.add_argument("--bits", type=_bits, default=8)

    p = sub.add_parser("encode", help="encode an event file into frames")
    p.add_argument("--input", required=True)
    p.add_argument("--in-format", choices=["csv", "evt"])
    encoding_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--out-format", choices=["pgm", "efr"], default="efr")
    p.add_argument("--sort", action="store_true", help="stable-sort events by timestamp before encoding")
    p.add_argument("--t-origin-us", type=_u64)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="unpack a TBR frame set into per-slice PGM bitmaps")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("gen", help="generate a synthetic event stream")
    p.add_argument("--pattern", choices=[pt.value for pt in Pattern], default="noise")
    p.add_argument("--rate", type=float, default=100_000.0)
    p.add_argument("--duration-us", type=_u64, default=1_000_000)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "evt"])
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--speed", type=float, default=64.0, help="pixels per second")
    p.add_argument("--radius", type=float, default=30.0, help="orbit radius in pixels")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("chunk", help="split a frame set into fixed-size chunks")
    p.add_argument("--input", required=True)
    p.add_argument("--frames-per-chunk", type=_positive, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("vote", help="majority vote over class labels")
    p.add_argument("--labels", required=True, help="CSV file, '-' for stdin, or an inline list like 3,3,7")
    p.set_defaults(func=cmd_vote)

    p = sub.add_parser("bench", help="measure encoding throughput")
    p.add_argument("--input", required=True)
    encoding_flags(p)
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--repeats", type=_positive, default=5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("info", help="summarise an event, EFR or PGM file")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"evtbr: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, ValueError) as exc:
        print(f"evtbr: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"evtbr: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
