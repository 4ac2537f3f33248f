"""Information-theoretic parameter math for the extraction pipeline.

Covers min-entropy estimation, leftover-hash output sizing, Toeplitz
collision probability, composition of security parameters across seed
reuse, and theoretical throughput accounting.

Security parameters are tiny (1e-50 scale) while use counts run to 1e14,
so the refresh arithmetic is carried in the log10 domain with an exact
integer path when the configured exponents are whole numbers. Naive float
accumulation of ``N * eps`` would otherwise decide the refresh boundary by
rounding luck.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

_LOG2_10 = math.log2(10.0)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SecuritySpec:
    """Security parameters, stored as log10 of the probabilities.

    ``log10_eps_hash`` bounds a single hash use, ``log10_eps_seed`` the
    supplied seed material, and ``log10_eps_threshold`` is the composed
    level at which the seed must be refreshed.
    """

    log10_eps_hash: float
    log10_eps_seed: float
    log10_eps_threshold: float
    universality: float = 1.0

    def __post_init__(self):
        for name in ("log10_eps_hash", "log10_eps_seed", "log10_eps_threshold"):
            v = getattr(self, name)
            if not math.isfinite(v) or v > 0.0:
                raise ValueError(f"{name} must be finite and <= 0 (a probability <= 1)")
        if self.log10_eps_threshold <= self.log10_eps_hash:
            raise ValueError(
                "log10_eps_threshold must exceed log10_eps_hash, "
                "otherwise refresh fires immediately"
            )
        if self.universality < 1.0:
            raise ValueError("universality must be >= 1")

    @property
    def eps_hash(self) -> float:
        """Linear-domain value; underflows to 0.0 below ~1e-308."""
        return 10.0 ** self.log10_eps_hash

    @property
    def eps_seed(self) -> float:
        return 10.0 ** self.log10_eps_seed

    @property
    def eps_threshold(self) -> float:
        return 10.0 ** self.log10_eps_threshold


@dataclass(frozen=True)
class EntropyEstimate:
    """Min-entropy of one ADC sample and its per-bit normalization."""

    hmin_per_sample: float
    sample_bits: int

    def __post_init__(self):
        if not 1 <= self.sample_bits <= 64:
            raise ValueError("sample_bits out of range")
        if not 0.0 <= self.hmin_per_sample <= self.sample_bits:
            raise ValueError(
                "hmin_per_sample must lie in [0, sample_bits]"
            )

    @property
    def hmin_per_bit(self) -> float:
        return self.hmin_per_sample / self.sample_bits


def min_entropy_from_histogram(counts: Sequence[int]) -> float:
    """Min-entropy -log2(p_max) of the empirical distribution in ``counts``."""
    total = 0
    peak = 0
    for c in counts:
        if c < 0:
            raise ValueError("histogram counts must be nonnegative")
        total += c
        if c > peak:
            peak = c
    if total <= 0:
        raise ValueError("histogram is empty or all-zero")
    return -math.log2(peak / total)


def _phi(z: float) -> float:
    """Standard normal CDF."""
    if z == math.inf:
        return 1.0
    if z == -math.inf:
        return 0.0
    return 0.5 * (1.0 + math.erf(z / _SQRT2))


def min_entropy_gaussian_adc(sigma: float, full_scale: float, bits: int) -> float:
    """Min-entropy of one ADC code for a zero-mean Gaussian input.

    The quantizer is uniform mid-tread over ``[-full_scale/2, +full_scale/2)``
    with ``2**bits`` codes and saturating end codes. The density is symmetric
    and unimodal, so the most probable code is either the one straddling zero
    or a saturated end code; only those candidates are evaluated.
    """
    if sigma <= 0 or full_scale <= 0:
        raise ValueError("sigma and full_scale must be positive")
    if not 1 <= bits <= 32:
        raise ValueError("bits must be in [1, 32]")
    delta = full_scale / 2.0**bits
    qmin = -(1 << (bits - 1))
    qmax = (1 << (bits - 1)) - 1

    def mass(q: int) -> float:
        lo = -math.inf if q == qmin else (q - 0.5) * delta
        hi = math.inf if q == qmax else (q + 0.5) * delta
        return _phi(hi / sigma) - _phi(lo / sigma)

    p_max = max(mass(q) for q in {0, qmin, qmax})
    return -math.log2(p_max)


def leftover_hash_output_length(n: int, hmin_per_bit: float, eps_hash: float) -> int:
    """Largest safe output length: floor(n*h - 2*log2(1/eps)), clamped at 0."""
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0.0 <= hmin_per_bit <= 1.0:
        raise ValueError("hmin_per_bit must lie in [0, 1]")
    if not 0.0 < eps_hash <= 1.0:
        raise ValueError("eps_hash must lie in (0, 1]")
    raw = n * hmin_per_bit + 2.0 * math.log2(eps_hash)
    return max(0, math.floor(raw))


def leftover_hash_output_length_log10(
    n: int, hmin_per_bit: float, log10_eps_hash: float
) -> int:
    """Same bound with the security parameter given as a log10 exponent.

    Avoids the linear-domain underflow for exponents below -307.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0.0 <= hmin_per_bit <= 1.0:
        raise ValueError("hmin_per_bit must lie in [0, 1]")
    if log10_eps_hash > 0.0:
        raise ValueError("log10_eps_hash must be <= 0")
    raw = n * hmin_per_bit + 2.0 * log10_eps_hash * _LOG2_10
    return max(0, math.floor(raw))


def collision_probability(m: int, n: int) -> float:
    """Collision probability m * 2^(-n+1) of an m x n Toeplitz hash.

    Exact in binary floating point while representable; underflows to 0.0
    for n beyond ~1074 (use :func:`collision_probability_log2` there).
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    return math.ldexp(float(m), -n + 1)


def collision_probability_log2(m: int, n: int) -> float:
    """log2 of the collision probability: log2(m) - n + 1."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    return math.log2(m) - n + 1


def compose_security(N: int, eps_hash: float, eps_seed: float) -> float:
    """Composed security parameter N*eps_hash + eps_seed (linear domain)."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return N * eps_hash + eps_seed


def compose_security_log10(
    N: int, log10_eps_hash: float, log10_eps_seed: float
) -> float:
    """log10 of N*eps_hash + eps_seed without leaving the log domain."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N == 0:
        return log10_eps_seed
    a = math.log10(N) + log10_eps_hash
    b = log10_eps_seed
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log10(1.0 + 10.0 ** (lo - hi))


def refresh_use_limit(spec: SecuritySpec) -> int:
    """Smallest N with N*eps_hash + eps_seed >= eps_threshold.

    Exact big-integer arithmetic when all three log10 exponents are whole
    numbers (the usual configuration, e.g. -50/-50/-36); otherwise a float
    approximation good to ~15 significant digits.
    """
    a = spec.log10_eps_hash
    b = spec.log10_eps_seed
    t = spec.log10_eps_threshold
    if all(float(v).is_integer() for v in (a, b, t)):
        g = int(min(a, b, t))
        P = 10 ** (int(t) - g)
        S = 10 ** (int(b) - g)
        H = 10 ** (int(a) - g)
        if P <= S:
            return 0
        return -((S - P) // H)  # ceil((P - S) / H)
    # threshold and seed terms relative to one hash use
    gap = 1.0 - 10.0 ** (b - t)
    if gap <= 0.0:
        return 0
    e = t - a
    ip = math.floor(e)
    x = gap * 10.0 ** (e - ip)  # in (0, 10)
    if ip <= 17:
        return max(0, math.ceil(x * 10**ip))
    lead = math.ceil(x * 10**17)
    return lead * 10 ** (ip - 17)


def throughput_accounting(
    channels: Sequence[Tuple[int, int, float, int]]
) -> float:
    """Theoretical steady-state extracted rate, bits/second.

    Each channel is ``(m, n, sample_rate_hz, sample_bits)``; the channel
    contributes ``sample_rate * sample_bits * m / n``.
    """
    total = 0.0
    for m, n, rate, bits in channels:
        if m < 1 or n < 1 or m > n:
            raise ValueError(f"channel geometry ({m}, {n}) must satisfy 1 <= m <= n")
        if rate <= 0 or bits < 1:
            raise ValueError("sample rate and bit depth must be positive")
        total += rate * bits * (m / n)
    return total
