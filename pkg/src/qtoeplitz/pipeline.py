"""Multi-channel orchestration: source -> blockwise extraction -> outputs.

Each channel owns its source state, seed bank and extractor exclusively;
the only cross-channel artifact is the aggregate stream, a round-robin
interleave of whole output blocks in channel order (channel 0's block i,
then channel 1's block i, ...). That merge order is the contract
regardless of how channels execute.

Per block, a channel selects a seed with its bank's LFSR, consumes n input
bits, extracts m output bits through the active kernel backend, then
records the use in the security ledger; if the ledger crosses the refresh
threshold the bank is rebuilt from fresh material before the next block.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import backend
from .bits import BitString, BitWriter
from .extractor import ToeplitzConfig
from .params import (
    EntropyEstimate,
    SecuritySpec,
    leftover_hash_output_length_log10,
    throughput_accounting,
)
from .seedbank import (
    DEFAULT_LFSR_TAPS,
    DEFAULT_LFSR_WIDTH,
    SeedBank,
    bank_from_file,
)
from .source import GaussianChannelSource, random_bits, width_conversion_factor


class UnsafeConfigError(ValueError):
    """Raised when a channel's output length exceeds the safe bound."""


@dataclass
class ChannelConfig:
    """Everything one channel needs: geometry, entropy, security, source."""

    cfg: ToeplitzConfig
    security: SecuritySpec
    sigma: float = 0.05
    full_scale: float = 1.0
    adc_bits: int = 16
    sample_rate: float = 250e6
    out_clock: Optional[float] = None
    hmin_per_sample: Optional[float] = None
    rng_seed: int = 0
    b: int = 4
    seed_file: Optional[str] = None
    override_unsafe: bool = False
    lfsr_width: int = DEFAULT_LFSR_WIDTH
    lfsr_taps: int = DEFAULT_LFSR_TAPS

    def entropy(self) -> EntropyEstimate:
        """Configured per-sample min-entropy, or the analytic model's value."""
        from .params import min_entropy_gaussian_adc

        h = self.hmin_per_sample
        if h is None:
            h = min_entropy_gaussian_adc(self.sigma, self.full_scale, self.adc_bits)
        return EntropyEstimate(hmin_per_sample=h, sample_bits=self.adc_bits)

    def leftover_bound(self) -> int:
        return leftover_hash_output_length_log10(
            self.cfg.n, self.entropy().hmin_per_bit, self.security.log10_eps_hash
        )

    def validate(self, index: int = 0) -> None:
        if self.sigma <= 0 or self.full_scale <= 0:
            raise ValueError(f"channel {index}: sigma and full_scale must be positive")
        if self.out_clock is not None:
            k = width_conversion_factor(self.sample_rate, self.adc_bits, self.out_clock)
            if k != self.cfg.k:
                raise ValueError(
                    f"channel {index}: out_clock implies k={k} but the matrix "
                    f"geometry uses k={self.cfg.k}"
                )
        bound = self.leftover_bound()
        if self.cfg.m > bound and not self.override_unsafe:
            raise UnsafeConfigError(
                f"channel {index}: m={self.cfg.m} exceeds the leftover-hash bound "
                f"{bound} for n={self.cfg.n}, hmin/bit="
                f"{self.entropy().hmin_per_bit:.6g}, log10(eps_hash)="
                f"{self.security.log10_eps_hash:g}; set override_unsafe to proceed"
            )


@dataclass
class ChannelStats:
    index: int
    m: int
    n: int
    k: int
    b: int
    blocks: int = 0
    bits_out: int = 0
    ledger_n: int = 0
    epsilon_log10: float = 0.0
    refreshes: int = 0
    leftover_bound: int = 0
    unsafe_override: bool = False
    samples_consumed: int = 0
    kernel_seconds: float = 0.0
    elapsed_seconds: float = 0.0

    @property
    def measured_bps(self) -> float:
        if self.elapsed_seconds <= 0:
            return 0.0
        return self.bits_out / self.elapsed_seconds


@dataclass
class RunReport:
    channels: List[ChannelStats]
    duration_blocks: int
    total_bits: int
    theoretical_bps: float
    backend_name: str
    elapsed_seconds: float = 0.0

    def to_text(self) -> str:
        """Key=value report; *_seconds and *bps fields are wall-clock."""
        lines = [
            f"run.channels={len(self.channels)}",
            f"run.duration_blocks={self.duration_blocks}",
            f"run.total_bits={self.total_bits}",
            f"run.theoretical_bps={self.theoretical_bps:.6e}",
            f"run.backend={self.backend_name}",
            f"run.elapsed_seconds={self.elapsed_seconds:.6f}",
        ]
        for ch in self.channels:
            p = f"channel.{ch.index}"
            lines += [
                f"{p}.m={ch.m}",
                f"{p}.n={ch.n}",
                f"{p}.k={ch.k}",
                f"{p}.b={ch.b}",
                f"{p}.blocks={ch.blocks}",
                f"{p}.bits_out={ch.bits_out}",
                f"{p}.ledger_n={ch.ledger_n}",
                f"{p}.epsilon_log10={ch.epsilon_log10:.6f}",
                f"{p}.refreshes={ch.refreshes}",
                f"{p}.leftover_bound={ch.leftover_bound}",
                f"{p}.unsafe_override={str(ch.unsafe_override).lower()}",
                f"{p}.samples_consumed={ch.samples_consumed}",
                f"{p}.kernel_seconds={ch.kernel_seconds:.6f}",
                f"{p}.elapsed_seconds={ch.elapsed_seconds:.6f}",
                f"{p}.measured_bps={ch.measured_bps:.6e}",
            ]
        return "\n".join(lines) + "\n"


class MemorySink:
    """Collects per-channel and aggregate bitstreams in memory."""

    def __init__(self):
        self._writers: Dict[int, BitWriter] = {}
        self._aggregate = BitWriter()
        self.report: Optional[RunReport] = None

    def start(self, num_channels: int) -> None:
        self._writers = {i: BitWriter() for i in range(num_channels)}
        self._aggregate = BitWriter()

    def write_block(self, channel: int, value: int, nbits: int) -> None:
        self._writers[channel].append_value(value, nbits)
        self._aggregate.append_value(value, nbits)

    def finish(self, report: RunReport) -> None:
        self.report = report

    def channel_bits(self, channel: int) -> BitString:
        return self._writers[channel].to_bitstring()

    def aggregate_bits(self) -> BitString:
        return self._aggregate.to_bitstring()


class DirectorySink(MemorySink):
    """Writes channel<i>.bin, aggregate.bin and report.txt into a directory.

    If a stream write fails, the report is still emitted, annotated with
    the error and the files that were completed, and the error re-raised.
    """

    def __init__(self, out_dir):
        super().__init__()
        self.out_dir = Path(out_dir)

    def finish(self, report: RunReport) -> None:
        super().finish(report)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        error = None
        written = []
        try:
            for i, writer in self._writers.items():
                path = self.out_dir / f"channel{i}.bin"
                path.write_bytes(writer.to_bytes())
                written.append(path.name)
            path = self.out_dir / "aggregate.bin"
            path.write_bytes(self._aggregate.to_bytes())
            written.append(path.name)
        except OSError as exc:
            error = exc
        text = report.to_text()
        if error is not None:
            text += f"run.error={error}\nrun.files_written={','.join(written)}\n"
        try:
            (self.out_dir / "report.txt").write_text(text)
        except OSError:
            pass
        if error is not None:
            raise error


class _ChannelRuntime:
    """One channel's live state during a run."""

    def __init__(
        self,
        index: int,
        config: ChannelConfig,
        bank: SeedBank,
        wallclock_refresh_seconds: Optional[float] = None,
    ):
        if bank.cfg != config.cfg:
            raise ValueError(
                f"channel {index}: seed bank geometry {bank.cfg} does not match "
                f"configured {config.cfg}"
            )
        self.index = index
        self.config = config
        self.bank = bank
        self._wallclock_period = wallclock_refresh_seconds
        self._last_refresh_t = time.monotonic()
        seq = np.random.SeedSequence(config.rng_seed)
        source_seq, refresh_seq = seq.spawn(2)
        self.source = GaussianChannelSource(
            config.sigma,
            config.full_scale,
            config.adc_bits,
            np.random.Generator(np.random.PCG64(source_seq)),
            config.sample_rate,
        )
        self._refresh_rng = np.random.Generator(np.random.PCG64(refresh_seq))
        self.stats = ChannelStats(
            index=index,
            m=config.cfg.m,
            n=config.cfg.n,
            k=config.cfg.k,
            b=bank.b,
            leftover_bound=config.leftover_bound(),
            unsafe_override=config.override_unsafe,
        )
        self._kernel = backend.active_backend()

    def next_block(self) -> int:
        cfg = self.config.cfg
        y = self.bank.select_next_seed()
        data = self.source.take_block(cfg.n).to_bytes((cfg.n + 7) // 8, "little")
        t0 = time.perf_counter()
        out = self._kernel.extract_block(
            self.bank.packed_table,
            self.bank.row_stride,
            y * cfg.steps,
            cfg.steps,
            data,
            cfg.m,
            cfg.k,
        )
        self.stats.kernel_seconds += time.perf_counter() - t0
        refresh_due = self.bank.record_use()
        if self._wallclock_period is not None:
            now = time.monotonic()
            if now - self._last_refresh_t >= self._wallclock_period:
                refresh_due = True
        if refresh_due:
            material = random_bits(self._refresh_rng, self.bank.b * cfg.seed_bits)
            self.bank.refresh(material)
            self._last_refresh_t = time.monotonic()
        self.stats.blocks += 1
        self.stats.bits_out += cfg.m
        return int.from_bytes(out, "little")

    def finish_stats(self) -> ChannelStats:
        self.stats.ledger_n = self.bank.ledger.N
        self.stats.epsilon_log10 = self.bank.ledger.epsilon_current_log10
        self.stats.refreshes = self.bank.ledger.refresh_count
        self.stats.samples_consumed = self.source.samples_drawn
        return self.stats


def _load_banks(
    channels: Sequence[ChannelConfig], seeds_path
) -> List[SeedBank]:
    banks = []
    base = Path(seeds_path) if seeds_path is not None else None
    for i, ch in enumerate(channels):
        if ch.seed_file is not None:
            path = Path(ch.seed_file)
        elif base is not None and base.is_dir():
            path = base / f"channel{i}.qrs"
        elif base is not None:
            path = base
        else:
            raise ValueError(f"channel {i}: no seed file configured")
        if not path.exists():
            raise FileNotFoundError(f"seed file not found: {path}")
        banks.append(
            bank_from_file(
                path,
                ch.security,
                expect_cfg=ch.cfg,
                lfsr_width=ch.lfsr_width,
                lfsr_taps=ch.lfsr_taps,
            )
        )
    return banks


def run_channels(
    channels: Sequence[ChannelConfig],
    duration: int,
    sink: MemorySink,
    banks: Optional[Sequence[SeedBank]] = None,
    seeds_path=None,
    wallclock_refresh_seconds: Optional[float] = None,
) -> RunReport:
    """Run every channel for ``duration`` blocks and aggregate the outputs.

    Each channel consumes n*duration input bits and emits m*duration output
    bits. Channels violating the leftover-hash bound (without override)
    abort the run before any output is produced. Setting a wall-clock
    refresh period layers timer-based seed renewal over the threshold
    mechanism at the cost of run-to-run determinism.
    """
    if not channels:
        raise ValueError("at least one channel is required")
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    for i, ch in enumerate(channels):
        ch.validate(i)
    if banks is None:
        banks = _load_banks(channels, seeds_path)
    if len(banks) != len(channels):
        raise ValueError("one seed bank per channel is required")

    runtimes = [
        _ChannelRuntime(i, ch, bank, wallclock_refresh_seconds)
        for i, (ch, bank) in enumerate(zip(channels, banks))
    ]
    sink.start(len(channels))

    t_start = time.perf_counter()
    per_channel_t = [0.0] * len(runtimes)
    for _ in range(duration):
        for rt in runtimes:
            t0 = time.perf_counter()
            value = rt.next_block()
            per_channel_t[rt.index] += time.perf_counter() - t0
            sink.write_block(rt.index, value, rt.config.cfg.m)
    elapsed = time.perf_counter() - t_start

    stats = []
    for rt in runtimes:
        st = rt.finish_stats()
        st.elapsed_seconds = per_channel_t[rt.index]
        stats.append(st)
    report = RunReport(
        channels=stats,
        duration_blocks=duration,
        total_bits=sum(st.bits_out for st in stats),
        theoretical_bps=throughput_accounting(
            [
                (ch.cfg.m, ch.cfg.n, ch.sample_rate, ch.adc_bits)
                for ch in channels
            ]
        ),
        backend_name=backend.active_name(),
        elapsed_seconds=elapsed,
    )
    sink.finish(report)
    return report


def aggregate(streams: Sequence[BitString], block_sizes: Sequence[int]) -> BitString:
    """Round-robin interleave of whole blocks in channel order."""
    if len(streams) != len(block_sizes):
        raise ValueError("one block size per stream is required")
    if not streams:
        raise ValueError("at least one stream is required")
    counts = []
    for i, (s, size) in enumerate(zip(streams, block_sizes)):
        if size < 1:
            raise ValueError(f"stream {i}: block size must be >= 1")
        if len(s) % size:
            raise ValueError(
                f"stream {i}: length {len(s)} is not a multiple of block size {size}"
            )
        counts.append(len(s) // size)
    if len(set(counts)) > 1:
        raise ValueError(f"ragged block counts across streams: {counts}")
    writer = BitWriter()
    for blk in range(counts[0]):
        for s, size in zip(streams, block_sizes):
            writer.append(s.slice(blk * size, size))
    return writer.to_bitstring()
