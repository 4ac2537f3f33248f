"""Pure-Python GF(2) kernels, big-integer based.

Same contract as the compiled ``_kernels`` extension. The product of an
m x k Toeplitz sub-matrix with a k-bit block is accumulated in reversed
output order (accumulator bit r' holds output bit m-1-r'), because in that
order the contribution of input bit j is simply the sub-seed shifted right
by j. One bit reversal at the end restores the natural order.

All byte arguments are LSB-first packed (bit i of byte j is global bit
8*j + i).
"""

from __future__ import annotations

NAME = "pure"

# byte -> bit-reversed byte
_REV = bytes(
    ((i * 0x0202020202 & 0x010884422010) % 1023) & 0xFF for i in range(256)
)


def _reverse_bits(x: int, m: int) -> int:
    """Reverse the low m bits of x (x must have no bits above m)."""
    nb = (m + 7) // 8
    rev = int.from_bytes(x.to_bytes(nb, "little").translate(_REV), "big")
    return rev >> (8 * nb - m)


def submatrix_product(sub: bytes, block: bytes, m: int, k: int) -> bytes:
    """GF(2) product of the m x k sub-matrix built from ``sub`` with ``block``.

    Column j of the sub-matrix is sub[j .. j+m-1] read bottom-to-top, i.e.
    matrix entry (r, j) is sub bit m-1-r+j.
    """
    s = int.from_bytes(sub, "little") & ((1 << (m + k - 1)) - 1)
    d = int.from_bytes(block, "little") & ((1 << k) - 1)
    acc = 0
    while d:
        j = (d & -d).bit_length() - 1
        d &= d - 1
        acc ^= s >> j
    acc &= (1 << m) - 1
    return _reverse_bits(acc, m).to_bytes((m + 7) // 8, "little")


def extract_block(
    table: bytes,
    stride: int,
    first_row: int,
    steps: int,
    data: bytes,
    m: int,
    k: int,
) -> bytes:
    """One full block of streaming extraction: n = steps*k input bits.

    ``table`` holds sub-seed rows packed at byte offset ``row * stride``;
    rows ``first_row .. first_row+steps-1`` are consumed in step order and
    the per-step products are XOR-accumulated into the m-bit output.
    """
    if len(table) < (first_row + steps) * stride:
        raise ValueError("sub-seed table too short for the requested rows")
    if len(data) < (steps * k + 7) // 8:
        raise ValueError("data shorter than one full block")
    d = int.from_bytes(data, "little")
    kmask = (1 << k) - 1
    acc = 0
    for p in range(steps):
        off = (first_row + p) * stride
        s = int.from_bytes(table[off : off + stride], "little")
        blk = (d >> (p * k)) & kmask
        while blk:
            j = (blk & -blk).bit_length() - 1
            blk &= blk - 1
            acc ^= s >> j
    acc &= (1 << m) - 1
    return _reverse_bits(acc, m).to_bytes((m + 7) // 8, "little")
