"""Compare native and numpy kernels on a synthetic stream.

    python benchmarks/compare_backends.py --events 10000000
"""
import argparse
import json

from evtbr import kernels
from evtbr.bench import run_bench
from evtbr.events import EncodingConfig, SensorGeometry
from evtbr.synth import SyntheticSpec, generate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--events", type=int, default=10_000_000)
    ap.add_argument("--duration-us", type=int, default=10_000_000)
    ap.add_argument("--width", type=int, default=128)
    ap.add_argument("--height", type=int, default=128)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    stream = generate(SyntheticSpec(
        geometry=SensorGeometry(args.width, args.height),
        duration_us=args.duration_us,
        event_rate=args.events / (args.duration_us / 1e6),
    ))
    for strategy in ("tbr", "polarity", "sae"):
        cfg = EncodingConfig(2500, 8, strategy)
        for name in sorted(kernels.BACKENDS):
            with kernels.use_backend(name):
                report = run_bench(stream, cfg, threads=args.threads, repeats=args.repeats)
            print(json.dumps({k: report[k] for k in ("backend", "strategy", "events", "frames", "events_per_s", "frames_per_s")}))


if __name__ == "__main__":
    main()
