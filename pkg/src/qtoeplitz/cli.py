"""Operator command line: simulate | extract | analyze | bench | seed-tool.

Every command is deterministic for a given config and rng seeds, except
the wall-clock timing fields in reports. Exit status is nonzero exactly
when an error was diagnosed, and diagnostics name the offending field or
file.
"""

from __future__ import annotations

import argparse
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, backend
from .analysis import bias_zscore, bitmap_render, export_for_suites, pair_stats, runs_zscore
from .bits import BitString, BitWriter
from .config import ConfigError, parse_run_config
from .extractor import ToeplitzConfig
from .pipeline import (
    DirectorySink,
    MemorySink,
    UnsafeConfigError,
    run_channels,
)
from .seedbank import bank_from_file, read_seed_file, write_seed_file
from .source import codes_to_bits, random_bits, read_samples


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _apply_backend(name) -> None:
    if name and name != "auto":
        backend.set_backend(name)


def _load_config(args):
    """Parse the config and apply CLI overrides.

    Paths inside the config resolve relative to the config file; paths
    given on the command line resolve relative to the working directory.
    Returns (config, seeds_path, out_dir).
    """
    cfg = parse_run_config(args.config)
    seeds_path = cfg.resolve(cfg.seeds)
    out_dir = cfg.resolve(cfg.out_dir)
    for ch in cfg.channels:
        if ch.seed_file is not None:
            ch.seed_file = str(cfg.resolve(ch.seed_file))
    if getattr(args, "seeds", None):
        seeds_path = Path(args.seeds)
        for ch in cfg.channels:
            ch.seed_file = None
    if getattr(args, "out", None):
        out_dir = Path(args.out)
    if getattr(args, "duration_blocks", None) is not None:
        cfg.duration_blocks = args.duration_blocks
    if getattr(args, "override_unsafe", False):
        for ch in cfg.channels:
            ch.override_unsafe = True
    return cfg, seeds_path, out_dir


def cmd_simulate(args) -> int:
    try:
        cfg, seeds_path, out_dir = _load_config(args)
        _apply_backend(args.backend)
        sink = DirectorySink(out_dir)
        report = run_channels(
            cfg.channels,
            cfg.duration_blocks,
            sink,
            seeds_path=seeds_path,
            wallclock_refresh_seconds=cfg.wallclock_refresh_seconds,
        )
    except FileNotFoundError as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(f"output write failed: {exc}")
    except (ConfigError, UnsafeConfigError, ValueError) as exc:
        return _fail(str(exc))
    print(f"wrote {report.total_bits} bits across {len(report.channels)} channel(s) to {out_dir}")
    for ch in report.channels:
        print(
            f"  channel {ch.index}: {ch.blocks} blocks, {ch.bits_out} bits, "
            f"ledger N={ch.ledger_n}, refreshes={ch.refreshes}"
        )
    return 0


def cmd_extract(args) -> int:
    try:
        cfg, seeds_path, out_dir = _load_config(args)
        _apply_backend(args.backend)
        channel = cfg.channels[0]
        channel.validate(0)
        if channel.seed_file is not None:
            seeds_path = Path(channel.seed_file)
        if seeds_path is None:
            return _fail("no seed file configured (config.seeds or --seeds)")
        seed_path = Path(seeds_path)
        if seed_path.is_dir():
            seed_path = seed_path / "channel0.qrs"
        if not seed_path.exists():
            return _fail(f"seed file not found: {seed_path}")
        bank = bank_from_file(
            seed_path,
            channel.security,
            expect_cfg=channel.cfg,
            lfsr_width=channel.lfsr_width,
            lfsr_taps=channel.lfsr_taps,
        )
        samples_path = Path(args.samples)
        if not samples_path.exists():
            return _fail(f"sample file not found: {samples_path}")
        block = read_samples(samples_path, channel.sample_rate, channel.full_scale)
        stream = codes_to_bits(block)
    except (ConfigError, UnsafeConfigError, ValueError) as exc:
        return _fail(str(exc))

    n = channel.cfg.n
    m = channel.cfg.m
    steps = channel.cfg.steps
    nblocks, remainder = divmod(len(stream), n)
    if nblocks == 0:
        return _fail(
            f"{samples_path}: {len(stream)} bits is less than one full {n}-bit block"
        )
    kern = backend.active_backend()
    writer = BitWriter()
    refresh_rng = np.random.Generator(np.random.PCG64(channel.rng_seed))
    for i in range(nblocks):
        y = bank.select_next_seed()
        data = stream.slice(i * n, n).to_bytes()
        out = kern.extract_block(
            bank.packed_table, bank.row_stride, y * steps, steps, data, m, channel.cfg.k
        )
        writer.append_value(int.from_bytes(out, "little"), m)
        if bank.record_use():
            bank.refresh(random_bits(refresh_rng, bank.b * channel.cfg.seed_bits))

    try:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = out_dir / "extracted.bin"
        out_path.write_bytes(writer.to_bytes())
        report_path = out_dir / "extract_report.txt"
        report_path.write_text(
            f"input_bits={len(stream)}\n"
            f"blocks={nblocks}\n"
            f"bits_out={nblocks * m}\n"
            f"remainder_bits={remainder}\n"
            f"ledger_n={bank.ledger.N}\n"
            f"refreshes={bank.ledger.refresh_count}\n"
        )
    except OSError as exc:
        return _fail(f"output write failed: {exc}")
    print(
        f"extracted {nblocks * m} bits from {nblocks} block(s) to {out_path} "
        f"({remainder} trailing bits retained unprocessed)"
    )
    return 0


def cmd_analyze(args) -> int:
    streams = []
    try:
        for path in args.streams:
            p = Path(path)
            if not p.exists():
                return _fail(f"stream file not found: {p}")
            data = p.read_bytes()
            if not data:
                return _fail(f"{p}: empty stream")
            streams.append((p, BitString.from_bytes(data, 8 * len(data))))
    except OSError as exc:
        return _fail(str(exc))

    failures = 0
    for p, bits in streams:
        z = bias_zscore(bits)
        r = runs_zscore(bits)
        verdict = "ok" if abs(z) < 4 and abs(r) < 4 else "FAIL"
        if verdict == "FAIL":
            failures += 1
        print(f"{p}: bits={len(bits)} bias_z={z:+.3f} runs_z={r:+.3f} [{verdict}]")

    for i in range(len(streams)):
        for j in range(i + 1, len(streams)):
            (pa, a), (pb, b) = streams[i], streams[j]
            n = min(len(a), len(b))
            st = pair_stats(a.slice(0, n), b.slice(0, n))
            corr_limit = 4.0 / (n ** 0.5)
            # plug-in MI under independence is ~ chi2(1)/(2 N ln2); 30/(2 N ln2)
            # is a fluctuation bound comparable to the 4-sigma correlation gate
            mi_limit = 30.0 / (2.0 * n * math.log(2.0))
            verdict = (
                "ok"
                if abs(st.correlation) < corr_limit and st.mutual_information < mi_limit
                else "FAIL"
            )
            if verdict == "FAIL":
                failures += 1
            print(
                f"{pa.name} x {pb.name}: corr={st.correlation:+.3e} "
                f"mi={st.mutual_information:.3e} bits n={n} [{verdict}]"
            )

    if args.bitmap:
        bitmap_dir = Path(args.bitmap)
        bitmap_dir.mkdir(parents=True, exist_ok=True)
        for p, bits in streams:
            if len(bits) < 64 * 64:
                print(f"{p}: too short for a 64x64 bitmap, skipped")
                continue
            out = bitmap_dir / (p.stem + ".pbm")
            out.write_bytes(bitmap_render(bits, 64, 64))
            print(f"wrote {out}")

    if args.export_suite:
        export_dir = Path(args.export_suite)
        export_dir.mkdir(parents=True, exist_ok=True)
        for p, bits in streams:
            out = export_dir / (p.stem + ".rng")
            count = export_for_suites(bits, out)
            print(f"wrote {count} bytes to {out}")

    return 1 if failures else 0


def cmd_bench(args) -> int:
    try:
        cfg, seeds_path, _ = _load_config(args)
        _apply_backend(args.backend)
        from .params import throughput_accounting

        theoretical = throughput_accounting(
            [(ch.cfg.m, ch.cfg.n, ch.sample_rate, ch.adc_bits) for ch in cfg.channels]
        )
        duration = cfg.duration_blocks if cfg.duration_blocks > 0 else 16
        sink = MemorySink()
        t0 = time.perf_counter()
        report = run_channels(cfg.channels, duration, sink, seeds_path=seeds_path)
        elapsed = time.perf_counter() - t0
    except (ConfigError, UnsafeConfigError, ValueError, FileNotFoundError) as exc:
        return _fail(str(exc))
    kernel_seconds = sum(ch.kernel_seconds for ch in report.channels)
    kernel_bps = report.total_bits / kernel_seconds if kernel_seconds > 0 else 0.0
    print(f"host: {platform.platform()} python={platform.python_version()}")
    print(f"backend: {report.backend_name}")
    print(f"theoretical_bps: {theoretical:.4e}")
    print(f"measured_end_to_end_bps: {report.total_bits / elapsed:.4e}")
    print(f"measured_kernel_bps: {kernel_bps:.4e}")
    print(f"blocks: {duration} per channel, total_bits: {report.total_bits}")
    return 0


def cmd_seed_tool(args) -> int:
    if args.seed_action == "create":
        try:
            cfg = ToeplitzConfig(args.m, args.n, args.k)
            if args.rng_seed is not None:
                rng = np.random.Generator(np.random.PCG64(args.rng_seed))
                seeds = [random_bits(rng, cfg.seed_bits) for _ in range(args.b)]
            else:
                import os

                seeds = [
                    BitString.from_bytes(
                        os.urandom((cfg.seed_bits + 7) // 8), cfg.seed_bits
                    )
                    for _ in range(args.b)
                ]
            write_seed_file(args.out, cfg, seeds)
        except ValueError as exc:
            return _fail(str(exc))
        print(f"wrote {args.b} seed(s) of {cfg.seed_bits} bits to {args.out}")
        return 0
    if args.seed_action == "inspect":
        try:
            path = Path(args.file)
            if not path.exists():
                return _fail(f"seed file not found: {path}")
            cfg, seeds = read_seed_file(path)
        except ValueError as exc:
            return _fail(str(exc))
        print(f"{path}: m={cfg.m} n={cfg.n} k={cfg.k} b={len(seeds)}")
        print(f"seed_bits={cfg.seed_bits} subseed_bits={cfg.subseed_bits} steps={cfg.steps}")
        import hashlib

        for i, s in enumerate(seeds):
            digest = hashlib.sha256(s.to_bytes()).hexdigest()[:16]
            print(f"seed[{i}]: ones={s.ones()}/{len(s)} sha256[:16]={digest}")
        return 0
    return _fail("unknown seed-tool action")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtoeplitz",
        description="Streaming Toeplitz-hashing randomness extraction toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON run configuration")
        p.add_argument("--seeds", help="seed file or directory (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument(
            "--duration-blocks", type=int, help="blocks per channel (overrides config)"
        )
        p.add_argument(
            "--override-unsafe",
            action="store_true",
            help="run even when m exceeds the leftover-hash bound",
        )
        p.add_argument(
            "--backend",
            choices=["auto", "compiled", "pure"],
            default="auto",
            help="kernel backend selection",
        )

    p = sub.add_parser("simulate", help="run simulated channels and write bitstreams")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", help="extract from a captured ADC sample file")
    p.add_argument("--samples", required=True, help="raw little-endian int16 capture")
    add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="statistical checks on bitstream files")
    p.add_argument("streams", nargs="+", help="raw packed bitstream files")
    p.add_argument("--bitmap", help="directory for 64x64 preview bitmaps")
    p.add_argument("--export-suite", help="directory for NIST/DieHard/TestU01 exports")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="measure software throughput vs theory")
    add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("seed-tool", help="create or inspect QRS1 seed files")
    seed_sub = p.add_subparsers(dest="seed_action", required=True)
    pc = seed_sub.add_parser("create", help="write a new seed file")
    pc.add_argument("--out", required=True)
    pc.add_argument("--m", type=int, required=True)
    pc.add_argument("--n", type=int, required=True)
    pc.add_argument("--k", type=int, required=True)
    pc.add_argument("--b", type=int, default=4, help="seed count (power of two)")
    pc.add_argument(
        "--rng-seed", type=int, default=None, help="deterministic material (default: OS entropy)"
    )
    pi = seed_sub.add_parser("inspect", help="print a seed file's header and digests")
    pi.add_argument("file")
    p.set_defaults(func=cmd_seed_tool)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
