"""One-level orthonormal 2-D Haar transform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True, eq=False)
class SubbandSet:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(b) for b in (self.ll, self.lh, self.hl, self.hh)}
        if len(shapes) != 1 or len(next(iter(shapes))) != 2:
            raise DimensionError(f"subbands must share one 2-D shape, got {shapes}")

    @property
    def shape(self):
        return self.ll.shape


def haar_forward(p) -> SubbandSet:
    """Split ``p`` into 2x2 blocks [[a, b], [c, d]] and return

    ``ll = (a+b+c+d)/2, lh = (a-b+c-d)/2, hl = (a+b-c-d)/2, hh = (a-b-c+d)/2``.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2:
        raise DimensionError("haar_forward expects a 2-D plane")
    h, w = p.shape
    if h % 2 or w % 2 or h == 0 or w == 0:
        raise DimensionError(f"haar_forward needs even dimensions, got {w}x{h}")
    a = p[0::2, 0::2]
    b = p[0::2, 1::2]
    c = p[1::2, 0::2]
    d = p[1::2, 1::2]
    return SubbandSet(
        ll=(a + b + c + d) / 2,
        lh=(a - b + c - d) / 2,
        hl=(a + b - c - d) / 2,
        hh=(a - b - c + d) / 2,
    )


def haar_inverse(s: SubbandSet) -> np.ndarray:
    ll, lh, hl, hh = (np.asarray(x, dtype=np.float64) for x in (s.ll, s.lh, s.hl, s.hh))
    if not (ll.shape == lh.shape == hl.shape == hh.shape) or ll.ndim != 2:
        raise DimensionError("subband shapes disagree")
    h, w = ll.shape
    out = np.empty((2 * h, 2 * w))
    out[0::2, 0::2] = (ll + lh + hl + hh) / 2
    out[0::2, 1::2] = (ll - lh + hl - hh) / 2
    out[1::2, 0::2] = (ll + lh - hl - hh) / 2
    out[1::2, 1::2] = (ll - lh - hl + hh) / 2
    return out
