"""Seed lifecycle: storage, sub-seed tables, random selection, refresh.

A :class:`SeedBank` holds ``b`` seeds (b a power of two) and mirrors the
hardware two-level memory organization:

* level 1 — k-bit words, each seed occupying its own span of
  ceil((m+n-1)/k) words (the last word zero-padded);
* level 2 — (m+k-1)-bit sub-seed rows, b * n/k of them, built from level 1
  exclusively by sequential k-bit reads and windowed writes with a moving
  write-enable. No monolithic shift touches a whole seed.

Row ``y * (n/k) + p`` of level 2 must equal the shift-register reference
``extractor.subseed(seed_y, p)``; that dual-method equivalence is the
central correctness property of this module.

Seed selection per block comes from a Galois LFSR whose x-bit output space
is divided into b equal intervals. A :class:`SecurityLedger` counts uses
of the bank and raises the refresh flag once the composed security
parameter reaches the configured threshold.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, List, Tuple

from . import backend
from .bits import BitString
from .extractor import ToeplitzConfig
from .params import (
    SecuritySpec,
    compose_security_log10,
    refresh_use_limit,
)

DEFAULT_LFSR_WIDTH = 16
DEFAULT_LFSR_TAPS = 0xB400  # maximal-length for width 16

SEED_FILE_MAGIC = b"QRS1"


def galois_step(register: int, taps: int) -> int:
    """One Galois LFSR step: shift right, XOR taps if the LSB was set."""
    lsb = register & 1
    register >>= 1
    if lsb:
        register ^= taps
    return register


@dataclass(frozen=True)
class LfsrState:
    """Galois LFSR state: x-bit nonzero register plus feedback taps."""

    register: int
    taps: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= 64:
            raise ValueError("width must be in [1, 64]")
        if not 0 < self.register < (1 << self.width):
            raise ValueError("register must be a nonzero width-bit value")
        if not 0 < self.taps < (1 << self.width):
            raise ValueError("taps must be a nonzero width-bit mask")

    def next(self) -> Tuple["LfsrState", int]:
        """Advance one Galois step per output bit (width steps total).

        Returns the new state and the x-bit value, which is the register
        after the full word of steps.
        """
        reg = self.register
        for _ in range(self.width):
            reg = galois_step(reg, self.taps)
            if reg == 0:
                raise ValueError(
                    "LFSR reached the all-zero stuck state; taps are not maximal-length"
                )
        return LfsrState(reg, self.taps, self.width), reg


def select_seed(value: int, b: int, x: int) -> int:
    """Map an x-bit value to a seed index by equal-interval division.

    Equivalent to taking the top log2(b) bits of the value.
    """
    if b < 1 or b & (b - 1):
        raise ValueError("b must be a power of two")
    if b > (1 << x):
        raise ValueError("b must not exceed 2^x")
    if not 0 <= value < (1 << x):
        raise ValueError("value out of range for x bits")
    return value >> (x - (b.bit_length() - 1))


class SecurityLedger:
    """Tracks seed reuse: N uses compose to N*eps_hash + eps_seed."""

    def __init__(self, spec: SecuritySpec):
        self.spec = spec
        self.N = 0
        self.refresh_count = 0
        self._use_limit = refresh_use_limit(spec)

    @property
    def use_limit(self) -> int:
        """Smallest N at which the composed parameter reaches the threshold."""
        return self._use_limit

    @property
    def epsilon_current_log10(self) -> float:
        return compose_security_log10(
            self.N, self.spec.log10_eps_hash, self.spec.log10_eps_seed
        )

    def record_use(self) -> bool:
        """Count one use; True once the composed parameter has reached the threshold."""
        self.N += 1
        return self.N >= self._use_limit

    def reset_for_refresh(self) -> None:
        self.N = 0
        self.refresh_count += 1


class SeedBank:
    """b seeds with their level-1/level-2 memories, selector and ledger."""

    def __init__(
        self,
        cfg: ToeplitzConfig,
        seeds: List[BitString],
        spec: SecuritySpec,
        lfsr_width: int = DEFAULT_LFSR_WIDTH,
        lfsr_taps: int = DEFAULT_LFSR_TAPS,
    ):
        b = len(seeds)
        if b < 1 or b & (b - 1):
            raise ValueError(f"seed count b={b} must be a power of two")
        if b > (1 << lfsr_width):
            raise ValueError("seed count exceeds the LFSR value range")
        for i, s in enumerate(seeds):
            if len(s) != cfg.seed_bits:
                raise ValueError(
                    f"seed {i} has {len(s)} bits, expected {cfg.seed_bits}"
                )
        self.cfg = cfg
        self.b = b
        self.ledger = SecurityLedger(spec)
        self._lfsr_width = lfsr_width
        self._lfsr_taps = lfsr_taps
        self._install_seeds(seeds)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_material(
        cls,
        material: BitString,
        b: int,
        cfg: ToeplitzConfig,
        spec: SecuritySpec,
        lfsr_width: int = DEFAULT_LFSR_WIDTH,
        lfsr_taps: int = DEFAULT_LFSR_TAPS,
    ) -> "SeedBank":
        """Partition a contiguous material string into b seeds, in order."""
        if b < 1 or b & (b - 1):
            raise ValueError(f"seed count b={b} must be a power of two")
        if len(material) != b * cfg.seed_bits:
            raise ValueError(
                f"material must be exactly b*(m+n-1) = {b * cfg.seed_bits} bits, "
                f"got {len(material)}"
            )
        seeds = [
            material.slice(y * cfg.seed_bits, cfg.seed_bits) for y in range(b)
        ]
        return cls(cfg, seeds, spec, lfsr_width, lfsr_taps)

    def _install_seeds(self, seeds: List[BitString]) -> None:
        self.seeds = seeds
        self._load_level1()
        self.build_subseed_table()
        self.selector = LfsrState(
            self._initial_register(), self._lfsr_taps, self._lfsr_width
        )

    def _initial_register(self) -> int:
        """First nonzero x-bit window of the seed material (never a constant).

        Falls back to 1 in the degenerate case of all-zero material.
        """
        x = self._lfsr_width
        for seed in self.seeds:
            for start in range(0, len(seed) - x + 1, x):
                window = (seed.value >> start) & ((1 << x) - 1)
                if window:
                    return window
        return 1

    # -- two-level memory --------------------------------------------------

    @property
    def words_per_seed(self) -> int:
        """Level-1 words per seed: ceil((m+n-1)/k)."""
        return -(-self.cfg.seed_bits // self.cfg.k)

    def _load_level1(self) -> None:
        """Write the seeds into level-1 memory as k-bit words."""
        k = self.cfg.k
        kmask = (1 << k) - 1
        level1: List[int] = []
        for seed in self.seeds:
            v = seed.value
            for w in range(self.words_per_seed):
                level1.append((v >> (w * k)) & kmask)
        self.level1 = level1

    def build_subseed_table(self) -> None:
        """Fill level-2 memory from level-1 by k-bit reads and windowed writes.

        For each target row, k-bit words are read sequentially starting at
        the row's offset and written through a moving write-enable window
        until the (m+k-1)-bit row is complete — the memory-controller
        scheme, not the shift-register one.
        """
        if not getattr(self, "level1", None):
            raise ValueError("level-1 memory is not populated")
        cfg = self.cfg
        k = cfg.k
        sub_bits = cfg.subseed_bits
        level2: List[int] = []
        for y in range(self.b):
            base = y * self.words_per_seed
            for p in range(cfg.steps):
                row = 0
                pos = 0
                w = p
                while pos < sub_bits:
                    word = self.level1[base + w]
                    width = min(k, sub_bits - pos)
                    enable = ((1 << width) - 1) << pos
                    row = (row & ~enable) | ((word << pos) & enable)
                    pos += width
                    w += 1
                level2.append(row)
        self.level2 = level2
        row_nbytes = (sub_bits + 7) // 8
        rows = [r.to_bytes(row_nbytes, "little") for r in level2]
        self.packed_table, self.row_stride = backend.pack_rows(rows, row_nbytes)

    def level2_row(self, y: int, p: int) -> BitString:
        """Sub-seed stored at level-2 address y*(n/k) + p."""
        if not 0 <= y < self.b:
            raise ValueError(f"seed index {y} out of range [0, {self.b})")
        if not 0 <= p < self.cfg.steps:
            raise ValueError(f"step index {p} out of range [0, {self.cfg.steps})")
        return BitString.from_value(
            self.level2[y * self.cfg.steps + p], self.cfg.subseed_bits
        )

    # -- selection, accounting, refresh -------------------------------------

    def select_next_seed(self) -> int:
        """Advance the LFSR one word and map its value to a seed index."""
        self.selector, value = self.selector.next()
        return select_seed(value, self.b, self._lfsr_width)

    def record_use(self) -> bool:
        """Count one block extraction; True when a refresh is due."""
        return self.ledger.record_use()

    def refresh(self, material: BitString) -> None:
        """Replace all seeds, rebuild the tables and reset the use counter.

        Must not interleave with extraction: callers refresh only between
        a finalize and the next block's first step.
        """
        if len(material) != self.b * self.cfg.seed_bits:
            raise ValueError(
                f"material must be exactly b*(m+n-1) = {self.b * self.cfg.seed_bits} "
                f"bits, got {len(material)}"
            )
        seeds = [
            material.slice(y * self.cfg.seed_bits, self.cfg.seed_bits)
            for y in range(self.b)
        ]
        self._install_seeds(seeds)
        self.ledger.reset_for_refresh()


# -- seed file format -------------------------------------------------------
#
# magic "QRS1", then little-endian u32 m, n, k, b, then b seeds of
# ceil((m+n-1)/8) bytes each, LSB-first packed and zero-padded to a byte
# boundary independently.


def write_seed_file(path, cfg: ToeplitzConfig, seeds: List[BitString]) -> None:
    b = len(seeds)
    if b < 1 or b & (b - 1):
        raise ValueError(f"seed count b={b} must be a power of two")
    for i, s in enumerate(seeds):
        if len(s) != cfg.seed_bits:
            raise ValueError(f"seed {i} has {len(s)} bits, expected {cfg.seed_bits}")
    with open(path, "wb") as fh:
        fh.write(SEED_FILE_MAGIC)
        fh.write(struct.pack("<IIII", cfg.m, cfg.n, cfg.k, b))
        for s in seeds:
            fh.write(s.to_bytes())


def read_seed_file(path) -> Tuple[ToeplitzConfig, List[BitString]]:
    with open(path, "rb") as fh:
        return _read_seed_stream(fh, path)


def _read_seed_stream(fh: BinaryIO, path) -> Tuple[ToeplitzConfig, List[BitString]]:
    header = fh.read(4 + 16)
    if len(header) < 20 or header[:4] != SEED_FILE_MAGIC:
        raise ValueError(f"{path}: not a QRS1 seed file")
    m, n, k, b = struct.unpack("<IIII", header[4:])
    if b < 1 or b & (b - 1):
        raise ValueError(f"{path}: seed count b={b} must be a power of two")
    cfg = ToeplitzConfig(m, n, k)
    seed_nbytes = (cfg.seed_bits + 7) // 8
    seeds = []
    for i in range(b):
        raw = fh.read(seed_nbytes)
        if len(raw) != seed_nbytes:
            raise ValueError(f"{path}: truncated seed material (seed {i})")
        seeds.append(BitString.from_bytes(raw, cfg.seed_bits))
    if fh.read(1):
        raise ValueError(f"{path}: trailing bytes after seed material")
    return cfg, seeds


def bank_from_file(
    path,
    spec: SecuritySpec,
    expect_cfg: ToeplitzConfig | None = None,
    lfsr_width: int = DEFAULT_LFSR_WIDTH,
    lfsr_taps: int = DEFAULT_LFSR_TAPS,
) -> SeedBank:
    """Load a QRS1 file into a bank, optionally checking the geometry."""
    cfg, seeds = read_seed_file(path)
    if expect_cfg is not None and cfg != expect_cfg:
        raise ValueError(
            f"{path}: seed file geometry (m={cfg.m}, n={cfg.n}, k={cfg.k}) does not "
            f"match the configured (m={expect_cfg.m}, n={expect_cfg.n}, k={expect_cfg.k})"
        )
    return SeedBank(cfg, seeds, spec, lfsr_width, lfsr_taps)
