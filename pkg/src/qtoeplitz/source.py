"""Simulated entropy source: Gaussian noise, ADC quantization, width conversion.

Stands in for the optical front end. Each channel is an independent
zero-mean Gaussian voltage source digitized by a mid-tread ADC with
saturating end codes. The deterministic generator here is a test fixture
for reproducible simulation, not an entropy claim.

Code bit packing: every a-bit code is emitted LSB-first in two's
complement, codes concatenated in sample order. Width conversion re-frames
that stream into k-bit words, k = sample_rate * bits / out_clock, dropping
and reordering nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .bits import BitString


@dataclass
class SampleBlock:
    """Signed ADC codes plus acquisition metadata."""

    codes: np.ndarray
    sample_rate: float
    bits: int
    full_scale: float

    def __post_init__(self):
        if not 1 <= self.bits <= 32:
            raise ValueError("bits must be in [1, 32]")
        if self.sample_rate <= 0 or self.full_scale <= 0:
            raise ValueError("sample_rate and full_scale must be positive")
        lo = -(1 << (self.bits - 1))
        hi = (1 << (self.bits - 1)) - 1
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.size and (codes.min() < lo or codes.max() > hi):
            raise ValueError(f"codes outside the {self.bits}-bit range [{lo}, {hi}]")
        self.codes = codes


def gaussian_source(sigma: float, count: int, rng_seed=None) -> np.ndarray:
    """``count`` i.i.d. zero-mean Gaussian voltages, deterministic per seed.

    ``rng_seed`` may be an integer seed or an existing numpy Generator.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if count < 0:
        raise ValueError("count must be nonnegative")
    if isinstance(rng_seed, np.random.Generator):
        rng = rng_seed
    else:
        rng = np.random.Generator(np.random.PCG64(rng_seed))
    return rng.normal(0.0, sigma, size=count)


def adc_quantize(
    voltages, full_scale: float, bits: int, sample_rate: float = 1.0
) -> SampleBlock:
    """Uniform mid-tread quantization with saturating end codes.

    code = clamp(round(v / delta), -2^(bits-1), 2^(bits-1)-1) with
    delta = full_scale / 2^bits. Ties round half-to-even.
    """
    if full_scale <= 0:
        raise ValueError("full_scale must be positive")
    if not 1 <= bits <= 32:
        raise ValueError("bits must be in [1, 32]")
    delta = full_scale / 2.0**bits
    lo = float(-(1 << (bits - 1)))
    hi = float((1 << (bits - 1)) - 1)
    codes = np.clip(np.rint(np.asarray(voltages, dtype=np.float64) / delta), lo, hi)
    return SampleBlock(
        codes.astype(np.int64), sample_rate=sample_rate, bits=bits, full_scale=full_scale
    )


def codes_to_bits(block: SampleBlock) -> BitString:
    """Concatenate the codes' two's-complement bit patterns, LSB-first."""
    return BitString.from_bytes(_codes_to_bytes(block), block.codes.size * block.bits)


def _codes_to_bytes(block: SampleBlock) -> bytes:
    a = block.bits
    codes = block.codes
    if a == 8:
        return codes.astype(np.int8).tobytes()
    if a == 16:
        return codes.astype("<i2").tobytes()
    if a == 32:
        return codes.astype("<i4").tobytes()
    mask = (1 << a) - 1
    value = 0
    pos = 0
    for c in codes.tolist():
        value |= (c & mask) << pos
        pos += a
    return value.to_bytes((pos + 7) // 8, "little")


def width_conversion_factor(sample_rate: float, bits: int, out_clock: float) -> int:
    """Output word width k = sample_rate * bits / out_clock; must be integral."""
    if sample_rate <= 0 or out_clock <= 0:
        raise ValueError("rates must be positive")
    k = sample_rate * bits / out_clock
    k_int = round(k)
    if k_int < 1 or abs(k - k_int) > 1e-9 * max(1.0, abs(k)):
        raise ValueError(
            f"sample_rate*bits/out_clock = {k} is not a positive integer"
        )
    return k_int


def width_convert(block: SampleBlock, out_clock: float) -> List[int]:
    """Re-frame the code bitstream into k-bit words, conserving every bit.

    The trailing word is zero-padded if the total bit count is not a
    multiple of k.
    """
    k = width_conversion_factor(block.sample_rate, block.bits, out_clock)
    stream = int.from_bytes(_codes_to_bytes(block), "little")
    total = block.codes.size * block.bits
    kmask = (1 << k) - 1
    return [(stream >> (i * k)) & kmask for i in range(-(-total // k))]


# -- raw capture files -------------------------------------------------------
#
# Little-endian signed 16-bit two's-complement codes, no header (the common
# ADC capture dump layout).


def write_samples(path, block: SampleBlock) -> None:
    if block.bits != 16:
        raise ValueError("raw capture files hold 16-bit codes")
    with open(path, "wb") as fh:
        fh.write(block.codes.astype("<i2").tobytes())


def read_samples(
    path, sample_rate: float = 250e6, full_scale: float = 1.0
) -> SampleBlock:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) % 2:
        raise ValueError(f"{path}: length {len(raw)} is not a multiple of 2 bytes")
    codes = np.frombuffer(raw, dtype="<i2").astype(np.int64)
    return SampleBlock(codes, sample_rate=sample_rate, bits=16, full_scale=full_scale)


def random_bits(rng: np.random.Generator, nbits: int) -> BitString:
    """Uniform random bits from a numpy Generator (for seeds and fixtures)."""
    if nbits < 0:
        raise ValueError("nbits must be nonnegative")
    return BitString.from_bytes(rng.bytes((nbits + 7) // 8), nbits)


class GaussianChannelSource:
    """Incremental per-block bit supply for one simulated channel.

    Draws exactly the samples needed to cover each request, quantizes them
    and appends the code bits to an internal buffer. Deterministic for a
    given Generator and request sequence.
    """

    def __init__(
        self,
        sigma: float,
        full_scale: float,
        bits: int,
        rng: np.random.Generator,
        sample_rate: float = 1.0,
    ):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.sigma = sigma
        self.full_scale = full_scale
        self.bits = bits
        self.sample_rate = sample_rate
        self._rng = rng
        self._buf = 0
        self._nbuf = 0
        self.samples_drawn = 0

    def take_block(self, nbits: int) -> int:
        """Return the next ``nbits`` of the code bitstream as an integer."""
        while self._nbuf < nbits:
            need = -(-(nbits - self._nbuf) // self.bits)
            volts = self._rng.normal(0.0, self.sigma, size=need)
            block = adc_quantize(volts, self.full_scale, self.bits, self.sample_rate)
            chunk = int.from_bytes(_codes_to_bytes(block), "little")
            self._buf |= chunk << self._nbuf
            self._nbuf += need * self.bits
            self.samples_drawn += need
        out = self._buf & ((1 << nbits) - 1)
        self._buf >>= nbits
        self._nbuf -= nbits
        return out
