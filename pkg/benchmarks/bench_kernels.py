"""Time the pure-Python kernels against the compiled extension.

Workloads match the full-scale studies: 300 000-frame signals, the default
delay range, and the word alphabets the two tasks actually produce.

Run with ``python benchmarks/bench_kernels.py`` (options: --frames, --repeats).
"""

import argparse
import time

import numpy as np

from spikecoding import kernels
from spikecoding.encoders import design_bsa_filter


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(frames):
    g = np.random.default_rng(0)
    z = g.random(frames)
    uniforms = g.random(frames)
    taps = design_bsa_filter(3)
    x_sym = g.integers(0, 8, size=frames)
    w_sym = g.integers(0, 256, size=frames)
    return [
        ("isc_encode", lambda k: k.isc_encode(z, 2.0, uniforms)),
        ("sod_encode", lambda k: k.sod_encode(z, 0.05)),
        ("bsa_encode", lambda k: k.bsa_encode(z, taps, 0.2)),
        ("lif_encode", lambda k: k.lif_encode(z, 0.6065306597126334, 1.5)),
        (
            "delay_block_counts",
            lambda k: k.delay_block_counts(x_sym, w_sym, 8, 256, -20, 50, 50, 4),
        ),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--frames", type=int, default=300_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "native" not in backends:
        print("compiled extension not available; timing the pure backend only")

    print(f"frames={args.frames}, repeats={args.repeats} (best-of)")
    header = f"{'kernel':<20}" + "".join(f"{name:>12}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, call in workloads(args.frames):
        times = {b: best_of(args.repeats, call, mod) for b, mod in backends.items()}
        line = f"{name:<20}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in backends)
        if len(backends) == 2:
            line += f"{times['pure'] / times['native']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
