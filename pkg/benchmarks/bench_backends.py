#!/usr/bin/env python3
"""Benchmark the GF(2) block-extraction kernels: compiled vs pure Python.

Runs the hot path (whole-block extraction on the reference 1729x2464
geometry with k=32, plus a smaller geometry) on every available backend
and prints per-backend throughput and the speedup ratio.

Usage: python benchmarks/bench_backends.py [--blocks N]
"""

import argparse
import time

import numpy as np

from qtoeplitz import backend
from qtoeplitz.bits import BitString
from qtoeplitz.extractor import ToeplitzConfig, subseed
from qtoeplitz.source import random_bits


def bench_backend(kern, cfg: ToeplitzConfig, blocks: int, rng_seed: int = 1):
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    seed = random_bits(rng, cfg.seed_bits)
    row_nbytes = (cfg.subseed_bits + 7) // 8
    rows = [subseed(seed, p, cfg).to_bytes() for p in range(cfg.steps)]
    table, stride = backend.pack_rows(rows, row_nbytes)
    data = [
        random_bits(rng, cfg.n).to_bytes() for _ in range(min(blocks, 64))
    ]
    # warmup
    kern.extract_block(table, stride, 0, cfg.steps, data[0], cfg.m, cfg.k)
    t0 = time.perf_counter()
    sink = 0
    for i in range(blocks):
        out = kern.extract_block(
            table, stride, 0, cfg.steps, data[i % len(data)], cfg.m, cfg.k
        )
        sink ^= out[0]
    elapsed = time.perf_counter() - t0
    return blocks * cfg.m / elapsed, elapsed, sink


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--blocks", type=int, default=2000, help="blocks per geometry")
    args = parser.parse_args()

    geometries = [
        ("reference 1729x2464 k=32", ToeplitzConfig(1729, 2464, 32)),
        ("small 96x256 k=16", ToeplitzConfig(96, 256, 16)),
    ]
    names = backend.available_backends()
    print(f"backends: {', '.join(names)}; blocks per geometry: {args.blocks}\n")
    for label, cfg in geometries:
        print(f"{label} (m={cfg.m}, n={cfg.n}, k={cfg.k}, steps={cfg.steps})")
        rates = {}
        for name in names:
            bps, elapsed, _ = bench_backend(backend.get_backend(name), cfg, args.blocks)
            rates[name] = bps
            print(f"  {name:>9}: {bps / 1e6:10.1f} Mbit/s  ({elapsed:.3f}s)")
        if "compiled" in rates and "pure" in rates:
            print(f"  {'speedup':>9}: {rates['compiled'] / rates['pure']:10.1f}x")
        print()


if __name__ == "__main__":
    main()
