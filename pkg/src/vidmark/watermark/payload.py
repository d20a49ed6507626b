"""Payload framing: 32-bit check tag, 16-bit width, 16-bit height, then the
row-major watermark bits (all fields big-endian)."""

import numpy as np

from ..errors import FramingError
from ..media_io import WatermarkImage

HEADER_BITS = 64


def _uint_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def _bits_uint(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def build_payload(w: WatermarkImage, tag: int) -> np.ndarray:
    if not 0 <= tag < 1 << 32:
        raise FramingError("check tag must fit in 32 bits")
    if w.width >= 1 << 16 or w.height >= 1 << 16:
        raise FramingError("watermark dimensions must fit in 16 bits")
    return np.concatenate([
        _uint_bits(tag, 32),
        _uint_bits(w.width, 16),
        _uint_bits(w.height, 16),
        w.bits.ravel().astype(np.uint8),
    ])


def parse_header(bits) -> tuple[int, int, int]:
    """``(tag, width, height)`` from the first 64 payload bits."""
    bits = np.asarray(bits)
    if bits.size < HEADER_BITS:
        raise FramingError(f"payload needs at least {HEADER_BITS} bits, got {bits.size}")
    return _bits_uint(bits[:32]), _bits_uint(bits[32:48]), _bits_uint(bits[48:64])


def payload_length(width: int, height: int) -> int:
    return HEADER_BITS + width * height


def parse_payload(bits) -> tuple[int, WatermarkImage]:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    tag, width, height = parse_header(bits)
    if width < 1 or height < 1:
        raise FramingError(f"invalid watermark dimensions {width}x{height}")
    need = payload_length(width, height)
    if bits.size < need:
        raise FramingError(f"payload declares {width}x{height} but carries {bits.size - 64} bits")
    return tag, WatermarkImage.from_flat(width, height, bits[HEADER_BITS:need])
