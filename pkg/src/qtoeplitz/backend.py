"""Kernel backend selection: compiled extension with pure-Python fallback.

The compiled ``_kernels`` extension is preferred when it imported cleanly
and the host is little-endian (the extension does raw 64-bit loads on
packed bytes). Selection can be forced with the ``QTOEPLITZ_BACKEND``
environment variable (``compiled`` or ``pure``) or at runtime with
:func:`set_backend`.
"""

from __future__ import annotations

import os
import sys
from typing import List, Optional, Sequence, Tuple

from . import _pykernels

_compiled = None
if sys.byteorder == "little":
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

_BACKENDS = {"pure": _pykernels}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def available_backends() -> List[str]:
    return sorted(_BACKENDS)


def get_backend(name: Optional[str] = None):
    """Return a kernel module by name, or the active one if name is None."""
    if name is None or name == "auto":
        return _active
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"backend {name!r} not available (have: {', '.join(available_backends())})"
        ) from None


def set_backend(name: str):
    """Switch the process-wide active backend; returns the module."""
    global _active
    _active = get_backend(name)
    return _active


def active_backend():
    return _active


def active_name() -> str:
    return _active.NAME


def has_compiled() -> bool:
    return "compiled" in _BACKENDS


_env = os.environ.get("QTOEPLITZ_BACKEND", "").strip().lower()
if _env in ("", "auto"):
    _active = _compiled if _compiled is not None else _pykernels
else:
    _active = get_backend(_env)


# Trailing slack so the compiled kernel's 64-bit loads near the end of a row
# stay inside the buffer; reads that spill past a row's meaningful bits only
# ever touch accumulator positions >= m, which the final mask clears.
_ROW_SLACK = 8


def pack_rows(rows: Sequence[bytes], row_nbytes: int) -> Tuple[bytes, int]:
    """Pack equal-width rows into one padded buffer for the kernels.

    Returns ``(table, stride)``; row ``i`` starts at byte ``i * stride``.
    """
    stride = row_nbytes + (-row_nbytes % 8) + _ROW_SLACK
    buf = bytearray(stride * len(rows) + 16)
    for i, row in enumerate(rows):
        if len(row) != row_nbytes:
            raise ValueError("all rows must be exactly row_nbytes long")
        start = i * stride
        buf[start : start + row_nbytes] = row
    return bytes(buf), stride
