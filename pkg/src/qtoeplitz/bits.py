"""Bit-exact sequences and the GF(2) primitives the extractor is built on.

A :class:`BitString` is an immutable, ordered sequence of bits.  The packing
convention is LSB-first within each byte: global bit ``i`` lives in byte
``i // 8`` at bit position ``i % 8``.  Every file format in this package
inherits that convention, and it makes the byte serialization of a string
identical to the little-endian bytes of its integer value.

Internally a string is a Python integer (bit ``i`` of the integer is bit
``i`` of the sequence) plus a length, so XOR, AND and popcount run at
machine speed regardless of length.
"""

from __future__ import annotations

from typing import Iterable, Iterator


class BitString:
    """Immutable bit sequence with LSB-first byte packing."""

    __slots__ = ("_value", "_length")

    def __init__(self, bits: Iterable[int] = ()):
        value = 0
        length = 0
        for b in bits:
            b = int(b)
            if b not in (0, 1):
                raise ValueError(f"bit values must be 0 or 1, got {b!r}")
            value |= b << length
            length += 1
        self._value = value
        self._length = length

    @classmethod
    def from_value(cls, value: int, length: int) -> "BitString":
        """Wrap an integer whose bit ``i`` is sequence bit ``i``."""
        if length < 0:
            raise ValueError("length must be nonnegative")
        if value < 0 or value >> length:
            raise ValueError("value has bits beyond the stated length")
        self = cls.__new__(cls)
        self._value = value
        self._length = length
        return self

    @classmethod
    def from_bytes(cls, data: bytes, length: int) -> "BitString":
        """Unpack ``length`` bits from LSB-first packed bytes.

        Bits at positions >= ``length`` in the final byte are ignored.
        """
        if length < 0:
            raise ValueError("length must be nonnegative")
        if len(data) < (length + 7) // 8:
            raise ValueError(
                f"need {(length + 7) // 8} bytes for {length} bits, got {len(data)}"
            )
        value = int.from_bytes(data, "little") & ((1 << length) - 1)
        return cls.from_value(value, length)

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls.from_value(0, length)

    @classmethod
    def from01(cls, text: str) -> "BitString":
        """Parse a string like ``"10110"`` (index 0 first)."""
        return cls(int(c) for c in text)

    @property
    def value(self) -> int:
        return self._value

    def to_bytes(self) -> bytes:
        """Pack LSB-first; the final partial byte is zero-padded."""
        return self._value.to_bytes((self._length + 7) // 8, "little")

    def to01(self) -> str:
        return "".join(str((self._value >> i) & 1) for i in range(self._length))

    def slice(self, start: int, nbits: int) -> "BitString":
        """Bits ``start .. start+nbits-1``, preserving order."""
        if start < 0 or nbits < 0 or start + nbits > self._length:
            raise ValueError(
                f"slice [{start}, {start + nbits}) out of range for length {self._length}"
            )
        return BitString.from_value((self._value >> start) & ((1 << nbits) - 1), nbits)

    def ones(self) -> int:
        """Population count."""
        return self._value.bit_count()

    def __len__(self) -> int:
        return self._length

    def __bool__(self) -> bool:
        return self._length > 0

    def __getitem__(self, index):
        if isinstance(index, slice):
            start, stop, step = index.indices(self._length)
            if step != 1:
                raise ValueError("only contiguous slices are supported")
            return self.slice(start, max(0, stop - start))
        if index < 0:
            index += self._length
        if not 0 <= index < self._length:
            raise IndexError("bit index out of range")
        return (self._value >> index) & 1

    def __iter__(self) -> Iterator[int]:
        v = self._value
        for _ in range(self._length):
            yield v & 1
            v >>= 1

    def __xor__(self, other: "BitString") -> "BitString":
        if self._length != other._length:
            raise ValueError(
                f"length mismatch: {self._length} vs {other._length}"
            )
        return BitString.from_value(self._value ^ other._value, self._length)

    def __invert__(self) -> "BitString":
        mask = (1 << self._length) - 1
        return BitString.from_value(self._value ^ mask, self._length)

    def __add__(self, other: "BitString") -> "BitString":
        """Concatenation; ``self`` occupies the lower bit positions."""
        return BitString.from_value(
            self._value | (other._value << self._length),
            self._length + other._length,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._length == other._length and self._value == other._value

    def __hash__(self) -> int:
        return hash((self._length, self._value))

    def __repr__(self) -> str:
        if self._length <= 64:
            return f"BitString('{self.to01()}')"
        head = "".join(str((self._value >> i) & 1) for i in range(48))
        return f"BitString('{head}...', length={self._length})"


def dot_parity(a: BitString, b: BitString) -> int:
    """GF(2) inner product: parity of popcount(a AND b)."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return (a.value & b.value).bit_count() & 1


class BitWriter:
    """Accumulates bit fields into a packed LSB-first byte stream.

    Appends are O(field size); completed bytes are flushed eagerly so the
    working integer stays below 8 bits plus one field.
    """

    def __init__(self):
        self._buf = bytearray()
        self._pending = 0
        self._npending = 0

    def append_value(self, value: int, nbits: int) -> None:
        if nbits < 0 or value < 0 or value >> nbits:
            raise ValueError("value has bits beyond the stated width")
        acc = self._pending | (value << self._npending)
        total = self._npending + nbits
        nbytes = total // 8
        if nbytes:
            self._buf += (acc & ((1 << (8 * nbytes)) - 1)).to_bytes(nbytes, "little")
            acc >>= 8 * nbytes
        self._pending = acc
        self._npending = total % 8

    def append(self, bits: BitString) -> None:
        self.append_value(bits.value, len(bits))

    @property
    def bit_length(self) -> int:
        return 8 * len(self._buf) + self._npending

    def to_bytes(self) -> bytes:
        """Packed bytes; a final partial byte is zero-padded."""
        out = bytes(self._buf)
        if self._npending:
            out += bytes([self._pending])
        return out

    def to_bitstring(self) -> BitString:
        return BitString.from_bytes(self.to_bytes(), self.bit_length)
