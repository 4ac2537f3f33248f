"""Toeplitz-hashing extraction engine.

An m x n binary Toeplitz matrix is defined by a seed of m+n-1 bits. With
0-indexed rows r and columns c, entry (r, c) is seed bit ``m-1-r+c``: the
first column read top to bottom is seed bits m-1 .. 0 and the first row is
seed bits m-1 .. m+n-2.

Two independent routes compute the product:

* :func:`toeplitz_direct` — the reference: each output bit is the parity
  of (seed >> (m-1-r)) AND input. Used as the oracle everything else is
  checked against.
* the streaming route — the matrix is split into n/k sub-matrices of size
  m x k (n a multiple of k). Each sub-matrix is determined by an
  (m+k-1)-bit window of the seed and multiplies one k-bit input block per
  step; the m-bit partial products XOR-accumulate into the final output.
  :class:`ExtractorState` exposes the step machine; the kernel backends
  run whole blocks in one call.

The matrix is never materialized; per step only the sub-seed window is
touched, so memory stays O(m+k) regardless of n.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from . import backend
from .bits import BitString


@dataclass(frozen=True)
class ToeplitzConfig:
    """Block geometry: m output bits, n input bits, k-bit sub-blocks."""

    m: int
    n: int
    k: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 1 <= self.k <= self.n:
            raise ValueError("k must satisfy 1 <= k <= n")
        if self.n % self.k != 0:
            raise ValueError(f"n ({self.n}) must be an integer multiple of k ({self.k})")
        if self.m > self.n:
            warnings.warn(
                f"extraction ratio m/n = {self.m}/{self.n} exceeds 1; "
                "no input entropy level can justify this output length",
                stacklevel=2,
            )

    @property
    def seed_bits(self) -> int:
        return self.m + self.n - 1

    @property
    def subseed_bits(self) -> int:
        return self.m + self.k - 1

    @property
    def steps(self) -> int:
        return self.n // self.k


def toeplitz_direct(seed: BitString, data: BitString, cfg: ToeplitzConfig) -> BitString:
    """Reference full-matrix product; output bit r = parity of row r AND data."""
    if len(seed) != cfg.seed_bits:
        raise ValueError(f"seed must be {cfg.seed_bits} bits, got {len(seed)}")
    if len(data) != cfg.n:
        raise ValueError(f"input must be {cfg.n} bits, got {len(data)}")
    s = seed.value
    d = data.value
    out = 0
    for r in range(cfg.m):
        out |= (((s >> (cfg.m - 1 - r)) & d).bit_count() & 1) << r
    return BitString.from_value(out, cfg.m)


def subseed(seed: BitString, p: int, cfg: ToeplitzConfig) -> BitString:
    """The (m+k-1)-bit seed window that builds step p's sub-matrix.

    Window p covers seed bits p*k .. p*k+m+k-2 and reproduces columns
    p*k .. (p+1)*k-1 of the full matrix.
    """
    if len(seed) != cfg.seed_bits:
        raise ValueError(f"seed must be {cfg.seed_bits} bits, got {len(seed)}")
    if not 0 <= p < cfg.steps:
        raise ValueError(f"step index {p} out of range [0, {cfg.steps})")
    return seed.slice(p * cfg.k, cfg.subseed_bits)


def submatrix_multiply(sub: BitString, block: BitString, m: int, k: int) -> BitString:
    """Product of one m x k sub-matrix (from sub-seed ``sub``) with ``block``.

    Column j of the sub-matrix is sub bits j .. j+m-1 arranged so entry
    (r, j) is sub bit m-1-r+j, matching :func:`toeplitz_direct` on the
    corresponding window of the full matrix.
    """
    if len(sub) != m + k - 1:
        raise ValueError(f"sub-seed must be {m + k - 1} bits, got {len(sub)}")
    if len(block) != k:
        raise ValueError(f"block must be {k} bits, got {len(block)}")
    out = backend.active_backend().submatrix_product(sub.to_bytes(), block.to_bytes(), m, k)
    return BitString.from_bytes(out, m)


class ExtractorState:
    """Streaming accumulator for one channel's blockwise extraction.

    Feed n/k sub-matrix products with :meth:`step`, then :meth:`finalize`
    to emit the m-bit block output; the accumulator resets for the next
    block. Instances are single-owner: no internal locking.
    """

    def __init__(self, cfg: ToeplitzConfig):
        self.cfg = cfg
        self._acc = 0
        self._step = 0

    @property
    def step_index(self) -> int:
        return self._step

    @property
    def accumulator(self) -> BitString:
        return BitString.from_value(self._acc, self.cfg.m)

    def step(self, sub: BitString, block: BitString) -> None:
        """Accumulate one sub-matrix product: acc ^= sub_matrix(sub) * block."""
        if self._step >= self.cfg.steps:
            raise ValueError(
                f"already consumed {self.cfg.steps} steps; call finalize() first"
            )
        product = submatrix_multiply(sub, block, self.cfg.m, self.cfg.k)
        self._acc ^= product.value
        self._step += 1

    def finalize(self) -> BitString:
        """Emit the completed m-bit output and reset for the next block."""
        if self._step != self.cfg.steps:
            raise ValueError(
                f"finalize after {self._step} of {self.cfg.steps} steps"
            )
        out = BitString.from_value(self._acc, self.cfg.m)
        self._acc = 0
        self._step = 0
        return out


def extract_blockwise(seed: BitString, data: BitString, cfg: ToeplitzConfig) -> BitString:
    """Full streaming pass over one n-bit block using the step machine."""
    if len(data) != cfg.n:
        raise ValueError(f"input must be {cfg.n} bits, got {len(data)}")
    state = ExtractorState(cfg)
    for p in range(cfg.steps):
        state.step(subseed(seed, p, cfg), data.slice(p * cfg.k, cfg.k))
    return state.finalize()
