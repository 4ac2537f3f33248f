# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(2) kernels for bit-packed Toeplitz block extraction.

Same contract as ``_pykernels``: products are accumulated in reversed
output order (bit r' of the accumulator is output bit m-1-r'), so each set
input bit j contributes the sub-seed row shifted right by j; a single byte
table pass at the end reverses the result into natural order.

Buffers are LSB-first packed bytes. Little-endian hosts only: 64-bit loads
are done through memcpy on the packed bytes.
"""

from libc.stdint cimport uint8_t, uint64_t
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy, memset

from cpython.bytes cimport PyBytes_AS_STRING, PyBytes_FromStringAndSize

NAME = "compiled"

cdef extern from *:
    """
    #include <stdint.h>
    #include <string.h>
    static inline uint64_t qt_load64(const uint8_t *p) {
        uint64_t v;
        memcpy(&v, p, 8);
        return v;
    }
    static inline int qt_ctz64(uint64_t x) {
    #if defined(__GNUC__) || defined(__clang__)
        return __builtin_ctzll(x);
    #else
        int n = 0;
        while (!(x & 1)) { x >>= 1; n++; }
        return n;
    #endif
    }
    """
    uint64_t qt_load64(const uint8_t *p) nogil
    int qt_ctz64(uint64_t x) nogil

cdef uint8_t _REV[256]

cdef void _init_rev_table() noexcept:
    cdef int i, b, r
    for i in range(256):
        r = 0
        for b in range(8):
            if i & (1 << b):
                r |= 1 << (7 - b)
        _REV[i] = <uint8_t>r

_init_rev_table()


cdef inline void _xor_row_shifted(
    uint64_t *acc, const uint8_t *base, int sh, Py_ssize_t mwords
) noexcept nogil:
    """acc ^= the bit field starting at byte ``base``, bit offset ``sh`` < 8."""
    cdef Py_ssize_t w
    if sh == 0:
        for w in range(mwords):
            acc[w] ^= qt_load64(base + 8 * w)
    else:
        for w in range(mwords):
            acc[w] ^= (qt_load64(base + 8 * w) >> sh) | (
                (<uint64_t> base[8 * w + 8]) << (64 - sh)
            )


cdef int _extract_core(
    const uint8_t *table,
    Py_ssize_t stride,
    Py_ssize_t first_row,
    Py_ssize_t steps,
    const uint8_t *dbuf,
    Py_ssize_t m,
    Py_ssize_t k,
    uint8_t *out,
) noexcept nogil:
    cdef Py_ssize_t mwords = (m + 63) >> 6
    cdef Py_ssize_t out_nbytes = (m + 7) >> 3
    cdef uint64_t *acc = <uint64_t *> malloc(mwords * 8)
    if acc == NULL:
        return -1
    memset(acc, 0, mwords * 8)

    cdef const uint8_t *rowbase
    cdef Py_ssize_t p, gb, done, chunkbits, j
    cdef int sh
    cdef uint64_t chunk
    cdef int tz
    for p in range(steps):
        rowbase = table + (first_row + p) * stride
        done = 0
        while done < k:
            chunkbits = k - done
            if chunkbits > 64:
                chunkbits = 64
            gb = p * k + done
            sh = gb & 7
            chunk = qt_load64(dbuf + (gb >> 3)) >> sh
            if sh != 0 and chunkbits > 64 - sh:
                chunk |= (<uint64_t> dbuf[(gb >> 3) + 8]) << (64 - sh)
            if chunkbits < 64:
                chunk &= ((<uint64_t> 1) << chunkbits) - 1
            while chunk != 0:
                tz = qt_ctz64(chunk)
                chunk &= chunk - 1
                j = done + tz
                _xor_row_shifted(acc, rowbase + (j >> 3), j & 7, mwords)
            done += chunkbits

    if m & 63:
        acc[mwords - 1] &= ((<uint64_t> 1) << (m & 63)) - 1

    # shift left so that bit m-1 lands on the top bit of the final byte,
    # then reverse byte order and bits within each byte
    cdef int pad = <int> (8 * out_nbytes - m)
    cdef Py_ssize_t w
    if pad:
        for w in range(mwords - 1, 0, -1):
            acc[w] = (acc[w] << pad) | (acc[w - 1] >> (64 - pad))
        acc[0] <<= pad
    cdef const uint8_t *accb = <const uint8_t *> acc
    cdef Py_ssize_t i
    for i in range(out_nbytes):
        out[i] = _REV[accb[out_nbytes - 1 - i]]
    free(acc)
    return 0


def extract_block(
    const uint8_t[::1] table,
    Py_ssize_t stride,
    Py_ssize_t first_row,
    Py_ssize_t steps,
    const uint8_t[::1] data,
    Py_ssize_t m,
    Py_ssize_t k,
):
    """One full block of streaming extraction: n = steps*k input bits.

    ``table`` must be packed by ``backend.pack_rows`` (padded rows plus
    trailing slack for the 64-bit loads).
    """
    if m < 1 or k < 1 or steps < 1:
        raise ValueError("m, k and steps must be >= 1")
    cdef Py_ssize_t mwords = (m + 63) >> 6
    if table.shape[0] < (first_row + steps - 1) * stride + ((k - 1) >> 3) + 8 * mwords + 9:
        raise ValueError("sub-seed table too short for the requested rows")
    cdef Py_ssize_t dlen = (steps * k + 7) >> 3
    if data.shape[0] < dlen:
        raise ValueError("data shorter than one full block")

    cdef uint8_t *dbuf = <uint8_t *> malloc(dlen + 16)
    if dbuf == NULL:
        raise MemoryError()
    memcpy(dbuf, &data[0], dlen)
    memset(dbuf + dlen, 0, 16)

    cdef Py_ssize_t out_nbytes = (m + 7) >> 3
    out = PyBytes_FromStringAndSize(NULL, out_nbytes)
    cdef uint8_t *outp = <uint8_t *> PyBytes_AS_STRING(out)
    cdef int rc
    with nogil:
        rc = _extract_core(&table[0], stride, first_row, steps, dbuf, m, k, outp)
    free(dbuf)
    if rc != 0:
        raise MemoryError()
    return out


def submatrix_product(const uint8_t[::1] sub, const uint8_t[::1] block, Py_ssize_t m, Py_ssize_t k):
    """GF(2) product of the m x k sub-matrix built from ``sub`` with ``block``."""
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    cdef Py_ssize_t row_nbytes = (m + k - 1 + 7) >> 3
    cdef Py_ssize_t blk_nbytes = (k + 7) >> 3
    if sub.shape[0] < row_nbytes:
        raise ValueError("sub-seed shorter than m+k-1 bits")
    if block.shape[0] < blk_nbytes:
        raise ValueError("block shorter than k bits")

    cdef Py_ssize_t mwords = (m + 63) >> 6
    cdef Py_ssize_t scratch_len = row_nbytes + 8 * mwords + 16
    cdef uint8_t *row = <uint8_t *> malloc(scratch_len)
    cdef uint8_t *dbuf = <uint8_t *> malloc(blk_nbytes + 16)
    if row == NULL or dbuf == NULL:
        free(row)
        free(dbuf)
        raise MemoryError()
    memset(row, 0, scratch_len)
    memcpy(row, &sub[0], row_nbytes)
    # drop any packing bits beyond m+k-1 in the last meaningful byte
    if (m + k - 1) & 7:
        row[row_nbytes - 1] &= <uint8_t> ((1 << ((m + k - 1) & 7)) - 1)
    memcpy(dbuf, &block[0], blk_nbytes)
    memset(dbuf + blk_nbytes, 0, 16)
    if k & 7:
        dbuf[blk_nbytes - 1] &= <uint8_t> ((1 << (k & 7)) - 1)

    cdef Py_ssize_t out_nbytes = (m + 7) >> 3
    out = PyBytes_FromStringAndSize(NULL, out_nbytes)
    cdef uint8_t *outp = <uint8_t *> PyBytes_AS_STRING(out)
    cdef int rc
    with nogil:
        rc = _extract_core(row, scratch_len, 0, 1, dbuf, m, k, outp)
    free(row)
    free(dbuf)
    if rc != 0:
        raise MemoryError()
    return out
