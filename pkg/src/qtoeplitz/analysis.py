"""Statistical validation of extracted bitstreams.

Pairwise statistics (Pearson correlation, mutual information), per-stream
bias and runs checks, bitmap rendering for visual inspection, and raw
binary export for the external statistical test suites. All pairwise and
bias statistics reduce to popcounts on the packed representation, so they
run at machine speed on multi-megabit streams.

The mutual information estimator is the plug-in empirical one without bias
correction; for two binary streams of N bits its expected positive bias is
about 1/(2*N*ln 2), so thresholds on it must be stated with the sample
size in mind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

from .bits import BitString


@dataclass(frozen=True)
class ChannelPairStats:
    correlation: float
    mutual_information: float
    sample_count: int


def statistical_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Half the L1 distance between the normalized histograms p and q."""
    if len(p) != len(q):
        raise ValueError(f"domain size mismatch: {len(p)} vs {len(q)}")
    tp = float(sum(p))
    tq = float(sum(q))
    if tp <= 0 or tq <= 0:
        raise ValueError("histograms must have positive totals")
    return 0.5 * sum(abs(a / tp - b / tq) for a, b in zip(p, q))


def _joint_counts(a: BitString, b: BitString) -> Tuple[int, int, int, int]:
    """(n00, n01, n10, n11) with the first index from ``a``."""
    n = len(a)
    n11 = (a.value & b.value).bit_count()
    na = a.ones()
    nb = b.ones()
    n10 = na - n11
    n01 = nb - n11
    n00 = n - na - nb + n11
    return n00, n01, n10, n11


def cross_correlation(a: BitString, b: BitString) -> float:
    """Pearson coefficient of two bit streams under the {0,1} embedding."""
    n = len(a)
    if n != len(b):
        raise ValueError(f"length mismatch: {n} vs {len(b)}")
    if n < 2:
        raise ValueError("need at least 2 bits")
    na = a.ones()
    nb = b.ones()
    if na in (0, n) or nb in (0, n):
        raise ValueError("correlation is undefined for a constant sequence")
    n11 = (a.value & b.value).bit_count()
    pa = na / n
    pb = nb / n
    cov = n11 / n - pa * pb
    return cov / math.sqrt(pa * (1.0 - pa) * pb * (1.0 - pb))


def mutual_information(a: BitString, b: BitString) -> float:
    """Plug-in empirical mutual information in bits over {0,1} x {0,1}."""
    n = len(a)
    if n != len(b):
        raise ValueError(f"length mismatch: {n} vs {len(b)}")
    if n < 1:
        raise ValueError("need at least 1 bit")
    n00, n01, n10, n11 = _joint_counts(a, b)
    row = (n00 + n01, n10 + n11)  # a = 0, 1
    col = (n00 + n10, n01 + n11)  # b = 0, 1
    total = 0.0
    for cnt, r, c in (
        (n00, row[0], col[0]),
        (n01, row[0], col[1]),
        (n10, row[1], col[0]),
        (n11, row[1], col[1]),
    ):
        if cnt:
            total += (cnt / n) * math.log2(cnt * n / (r * c))
    return max(0.0, total)


def pair_stats(a: BitString, b: BitString) -> ChannelPairStats:
    return ChannelPairStats(
        correlation=cross_correlation(a, b),
        mutual_information=mutual_information(a, b),
        sample_count=len(a),
    )


def bias_zscore(bits: BitString) -> float:
    """z = (2*ones - N) / sqrt(N); zero for a perfectly balanced stream."""
    n = len(bits)
    if n < 100:
        raise ValueError("need at least 100 bits for a meaningful z-score")
    return (2 * bits.ones() - n) / math.sqrt(n)


def runs_zscore(bits: BitString) -> float:
    """Wald–Wolfowitz runs test statistic (normal approximation)."""
    n = len(bits)
    if n < 100:
        raise ValueError("need at least 100 bits for a meaningful z-score")
    ones = bits.ones()
    zeros = n - ones
    if ones == 0 or zeros == 0:
        raise ValueError("runs test is undefined for a constant sequence")
    # transitions = popcount(x XOR (x >> 1)) over n-1 adjacent pairs
    v = bits.value
    runs = 1 + ((v ^ (v >> 1)) & ((1 << (n - 1)) - 1)).bit_count()
    mean = 1.0 + 2.0 * ones * zeros / n
    var = 2.0 * ones * zeros * (2.0 * ones * zeros - n) / (n * n * (n - 1.0))
    return (runs - mean) / math.sqrt(var)


# -- bitmap rendering ---------------------------------------------------------


def bitmap_render(
    bits: BitString, width: int, height: int, ascii_format: bool = False
) -> bytes:
    """Render the first width*height bits as a portable bitmap, row-major.

    Bit 1 maps to a black pixel (the P4 convention). ``ascii_format``
    selects P1 instead of the packed P4.
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be >= 1")
    if len(bits) < width * height:
        raise ValueError(
            f"need {width * height} bits for a {width}x{height} bitmap, got {len(bits)}"
        )
    header = f"{'P1' if ascii_format else 'P4'}\n{width} {height}\n".encode()
    if ascii_format:
        rows = []
        for r in range(height):
            row = bits.slice(r * width, width)
            rows.append(" ".join(str(bit) for bit in row))
        return header + "\n".join(rows).encode() + b"\n"
    row_nbytes = (width + 7) // 8
    body = bytearray()
    for r in range(height):
        row = bits.slice(r * width, width)
        packed = bytearray(row_nbytes)
        for c in range(width):
            if row[c]:
                packed[c // 8] |= 1 << (7 - c % 8)
        body += packed
    return header + bytes(body)


def parse_pbm(data: bytes) -> Tuple[int, int, BitString]:
    """Parse a P1/P4 bitmap back to (width, height, row-major bits)."""
    if data[:2] not in (b"P1", b"P4"):
        raise ValueError("not a P1/P4 portable bitmap")
    ascii_format = data[:2] == b"P1"
    # header: magic, whitespace, width, whitespace, height, single whitespace
    pos = 2
    fields = []
    while len(fields) < 2:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    width, height = fields
    pos += 1  # single whitespace after the header
    out = []
    if ascii_format:
        for tok in data[pos:].split():
            out.append(int(tok))
        out = out[: width * height]
    else:
        row_nbytes = (width + 7) // 8
        for r in range(height):
            rowb = data[pos + r * row_nbytes : pos + (r + 1) * row_nbytes]
            for c in range(width):
                out.append((rowb[c // 8] >> (7 - c % 8)) & 1)
    return width, height, BitString(out)


# -- export for external test suites -----------------------------------------


def export_for_suites(bits: BitString, path) -> int:
    """Write raw LSB-first packed bytes for NIST/DieHard/TestU01 runs.

    Returns the byte count written. A final partial byte is zero-padded.
    """
    if len(bits) == 0:
        raise ValueError("refusing to export an empty stream")
    data = bits.to_bytes()
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def read_exported(path, nbits: int | None = None) -> BitString:
    """Read back an exported stream (whole bytes unless ``nbits`` is given)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if nbits is None:
        nbits = 8 * len(data)
    return BitString.from_bytes(data, nbits)
