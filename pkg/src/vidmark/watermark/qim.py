"""Parity quantisation (QIM) of non-negative scalars.

A value is snapped to the centre ``c*delta + delta/2`` of the nearest cell
whose index ``c`` has parity equal to the bit; equidistant cells resolve to
the lower one and negative indices are not allowed.
"""

import numpy as np

from ..errors import DomainError


def _check(value, delta):
    if not np.all(np.asarray(delta) > 0):
        raise DomainError("QIM step must be positive")
    if np.any(np.asarray(value) < 0):
        raise DomainError("QIM operates on non-negative values")


def qim_embed_array(values, bits, delta):
    values = np.asarray(values, dtype=np.float64)
    bits = np.asarray(bits, dtype=np.int64)
    _check(values, delta)
    x = values / delta - 0.5
    f = np.floor(x).astype(np.int64)
    lo = f - np.mod(f - bits, 2)
    hi = lo + 2
    c = np.where(x - lo <= hi - x, lo, hi)
    c = np.where(c < 0, bits, c)
    return c * delta + delta / 2


def qim_extract_array(values, delta):
    values = np.asarray(values, dtype=np.float64)
    _check(values, delta)
    return (np.floor(values / delta).astype(np.int64) % 2).astype(np.uint8)


def qim_embed(value: float, bit: int, delta: float) -> float:
    return float(qim_embed_array(value, bit, delta))


def qim_extract(value: float, delta: float) -> int:
    return int(qim_extract_array(value, delta))
