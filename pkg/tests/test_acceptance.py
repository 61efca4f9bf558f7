"""Exit criteria, one test per criterion (ac1 .. ac9)."""
import io
import json
import time

import numpy as np
import pytest

import oracles
from evtbr.cli import main
from evtbr.encoder import (
    BinarySlice,
    StreamingEncoder,
    decode_tbr,
    encode_polarity,
    encode_sae,
    encode_stream,
    encode_tbr,
)
from evtbr.events import EncodingConfig, SensorGeometry, Strategy
from evtbr.framepipe import center_offsets, central_crop, make_chunks, zero_pad
from evtbr.encoder import EncodedFrame
from evtbr.ingest import parse_csv, parse_evt, save_events, write_csv, write_evt
from evtbr.io_frames import read_efr, read_pgm, write_efr, write_pgm
from evtbr.synth import SyntheticSpec, generate
from conftest import random_stream


def efr(frames):
    buf = io.BytesIO()
    write_efr(frames, buf)
    return buf.getvalue()


def one_second():
    return generate(SyntheticSpec(duration_us=1_000_000, event_rate=20_000, seed=1))


def test_ac1_losslessness_1000_groups_per_n():
    rng = np.random.default_rng(2024)
    geometry = SensorGeometry(16, 16)
    start = time.perf_counter()
    for n in (4, 8, 16, 32):
        cfg = EncodingConfig(2500, n)
        for trial in range(1000):
            bits = rng.random((n, *geometry.shape)) < rng.random()
            group = [BinarySlice(geometry, bits[j], trial * n + j, (trial * n + j) * 2500) for j in range(n)]
            frame = encode_tbr(group, cfg)
            assert decode_tbr(frame) == group
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.2f}s"


def test_ac2_compression_factor_n():
    s = one_second()
    pol = encode_stream(s, EncodingConfig(2500, 8, Strategy.POLARITY))
    tbr = encode_stream(s, EncodingConfig(2500, 8, Strategy.TBR))
    assert len(pol) == 400
    assert len(tbr) == 50
    assert len(pol) // len(tbr) == 8 and len(pol) % len(tbr) == 0
    assert all(f.span_us == 20_000 for f in tbr)


def test_ac3_chunk_arithmetic():
    s = one_second()
    tbr = encode_stream(s, EncodingConfig(2500, 8))
    chunks = make_chunks(tbr, 25)
    assert len(chunks) == 2
    assert all(c.span_us == 500_000 for c in chunks)
    assert chunks[1].t_start_us - chunks[0].t_start_us == 500_000
    naive = encode_stream(s, EncodingConfig(2500, 8, Strategy.POLARITY))
    in_first_half_second = [f for f in naive if f.t_start_us < 500_000]
    assert len(in_first_half_second) == 200
    assert [len(c) for c in make_chunks(naive, 500_000 // 2500)] == [200, 200]


def test_ac4_streaming_equals_batch_100_streams():
    rng = np.random.default_rng(4)
    sizes = np.unique(np.round(np.logspace(0, 6, 99)).astype(int)).tolist()
    sizes += [int(rng.integers(1, 1000)) for _ in range(100 - len(sizes) - 1)] + [1_000_000]
    assert len(sizes) == 100 and max(sizes) == 1_000_000
    for i, n in enumerate(sizes):
        w, h = int(rng.integers(1, 65)), int(rng.integers(1, 65))
        s = random_stream(rng, n, w, h, t_max=int(rng.integers(1, 2_000_000)), t0=int(rng.integers(0, 10**9)))
        strategy = Strategy(i % 3)
        cfg = EncodingConfig(int(rng.integers(200, 5000)), int(rng.integers(1, 33)), strategy)
        enc = StreamingEncoder(cfg, s.geometry)
        frames = []
        if n <= 2000:
            for ev in s:
                frames.extend(enc.push(ev))
        else:
            cuts = np.sort(rng.integers(0, n, 20))
            for a, b in zip([0, *cuts], [*cuts, n]):
                frames.extend(enc.push_many(s.t[a:b], s.x[a:b], s.y[a:b], s.p[a:b]))
        tail = enc.flush()
        if tail is not None:
            frames.append(tail)
        assert efr(frames) == efr(encode_stream(s, cfg)), f"stream {i} (n={n}, {strategy.name})"


def test_ac5_baselines_match_bruteforce_1000_windows():
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 1000:
        w, h = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        dt = int(rng.integers(1, 4000))
        s = random_stream(rng, int(rng.integers(0, 120)), w, h, t_max=dt * 6)
        cfg = EncodingConfig(dt)
        origin = cfg.origin_for(s)
        events = list(s)
        for window in range(5):
            t0 = origin + window * dt
            assert encode_polarity(s, window, cfg).values.tolist() == oracles.polarity_frame(events, w, h, t0, dt)
            assert encode_sae(s, window, cfg).values.tolist() == oracles.sae_frame(events, w, h, t0, dt)
            checked += 1


def test_ac6_format_roundtrips():
    rng = np.random.default_rng(6)
    for trial in range(20):
        s = random_stream(rng, int(rng.integers(0, 5000)), int(rng.integers(1, 700)), int(rng.integers(1, 500)),
                          t_max=10**7, t0=int(rng.integers(0, 2**40)))
        for writer, parser in ((write_csv, parse_csv), (write_evt, parse_evt)):
            buf = io.BytesIO()
            writer(s, buf)
            assert parser(buf.getvalue()) == s
        for strategy in Strategy:
            n = int(rng.integers(1, 33))
            frames = encode_stream(s, EncodingConfig(int(rng.integers(1000, 200_000)), n, strategy))
            raw = efr(frames)
            assert read_efr(raw)[1] == frames
            for f in frames[:3]:
                if strategy is Strategy.TBR and n > 16:
                    continue
                buf = io.BytesIO()
                write_pgm(f, buf)
                assert np.array_equal(read_pgm(buf.getvalue(), strategy), f.values)


def test_ac7_geometry_constants():
    assert center_offsets(640, 480, 350, 350) == (145, 65)
    assert center_offsets(227, 227, 128, 128) == (49, 49)
    assert center_offsets(224, 224, 128, 128) == (48, 48)
    big = EncodedFrame(SensorGeometry(640, 480), np.arange(640 * 480).reshape(480, 640) % 256,
                       Strategy.TBR, 0, 2500, 8, 8)
    assert np.array_equal(central_crop(big, 350, 350).values, big.values[65:415, 145:495])
    small = EncodedFrame(SensorGeometry(128, 128), np.ones((128, 128)), Strategy.TBR, 0, 2500, 8, 8)
    for size, off in ((227, 49), (224, 48)):
        padded = zero_pad(small, size, size).values
        assert padded[off:off + 128, off:off + 128].all()
        assert padded.sum() == 128 * 128


def test_ac8_parallel_determinism():
    s = generate(SyntheticSpec(duration_us=3_000_000, event_rate=300_000, seed=8))
    for strategy in Strategy:
        cfg = EncodingConfig(2500, 8, strategy)
        outputs = {k: efr(encode_stream(s, cfg, workers=k)) for k in (1, 2, 8)}
        assert outputs[1] == outputs[2] == outputs[8]


@pytest.mark.slow
def test_ac9_bench_throughput(tmp_path, capsys):
    s = generate(SyntheticSpec(duration_us=10_000_000, event_rate=1_000_000, seed=9))
    assert len(s) == 10**7
    path = tmp_path / "big.evt"
    save_events(s, path)
    del s
    code = main(["bench", "--input", str(path), "--strategy", "tbr", "--delta-t-us", "2500", "--bits", "8",
                 "--threads", "1"])
    out, _ = capsys.readouterr()
    assert code == 0
    report = json.loads(out)
    assert report["events"] == 10**7 and report["frames"] == 500
    assert report["events_per_s"] >= 1e6, report
