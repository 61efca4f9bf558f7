"""Encoding throughput benchmark.

Reports the median wall-clock rate over several runs of the batch encoder.
Parsing the input is not timed.
"""
from __future__ import annotations

import statistics
import time

import numpy as np

from . import kernels
from .encoder import encode_stream
from .events import EncodingConfig, EventStream
from .ingest import EVT_RECORD


def peak_group_bytes(stream: EventStream, config: EncodingConfig) -> int:
    """Working set of the busiest window group.

    One uint32 accumulator frame plus the raw records of the group holding the
    most events.
    """
    acc = stream.geometry.width * stream.geometry.height * 4
    if len(stream) == 0:
        return acc
    origin = config.origin_for(stream)
    span = np.uint64(config.delta_t_us * config.effective_bits)
    groups = (stream.t - np.uint64(origin)) // span
    busiest = int(np.bincount(groups.astype(np.int64)).max())
    return acc + busiest * EVT_RECORD.itemsize


def run_bench(stream: EventStream, config: EncodingConfig, threads: int = 1, repeats: int = 5) -> dict:
    stream.checked()
    timings = []
    frames = []
    for _ in range(repeats):
        start = time.perf_counter()
        frames = encode_stream(stream, config, workers=threads)
        timings.append(time.perf_counter() - start)
    median = statistics.median(timings)
    return {
        "backend": kernels.backend_name(),
        "strategy": config.strategy.name.lower(),
        "threads": threads,
        "events": len(stream),
        "frames": len(frames),
        "median_s": median,
        "events_per_s": len(stream) / median if median > 0 else float("inf"),
        "frames_per_s": len(frames) / median if median > 0 else float("inf"),
        "peak_group_bytes": peak_group_bytes(stream, config),
    }
