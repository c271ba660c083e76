"""Working-precision management for all big-float computation.

Every numeric result in this library is produced under an explicit mpfr
precision.  The default (192 bits) is far beyond double precision because
distance-to-nearest-integer values of n*alpha at n ~ 10^6, and lattice bases
with entries spanning e^{-90} .. e^{+90}, lose all significance in 64-bit
floats.  Callers may raise the precision globally or per-computation; results
that depend on it record the bit count they were produced under.
"""

from __future__ import annotations

import contextlib

import gmpy2

DEFAULT_BITS = 192
MIN_BITS = 128

_bits = DEFAULT_BITS


def precision_bits() -> int:
    """Return the currently configured working precision in bits."""
    return _bits


def set_precision_bits(bits: int) -> None:
    """Set the global working precision (at least MIN_BITS)."""
    global _bits
    if bits < MIN_BITS:
        raise ValueError(f"precision must be >= {MIN_BITS} bits, got {bits}")
    _bits = int(bits)


@contextlib.contextmanager
def workprec(bits: int | None = None):
    """Context manager activating an mpfr context at the given precision.

    With bits=None the configured global precision is used.  Numeric code in
    this package runs inside one of these blocks; nested blocks may raise the
    precision locally (e.g. for very skew lattice bases) without touching the
    global setting.
    """
    eff = _bits if bits is None else max(int(bits), MIN_BITS)
    with gmpy2.context(precision=eff):
        yield eff


@contextlib.contextmanager
def temp_precision(bits: int):
    """Temporarily change the *global* configured precision (tests only)."""
    global _bits
    old = _bits
    set_precision_bits(bits)
    try:
        yield
    finally:
        _bits = old
