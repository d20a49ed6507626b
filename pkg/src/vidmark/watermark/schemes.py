"""Per-frame embedding schemes operating on the luma plane.

block      QIM on the largest singular value of 8x8 pixel blocks (blind)
dwt_block  the same on the Haar LL band, where an 8x8 pixel block is a 4x4
           LL block (blind)
diagonal   relative scaling of the full-frame singular values (semi-blind:
           extraction needs the original singular values)

Blocks carry bits in centre-out order (square rings around the frame centre,
row-major inside a ring) so a payload smaller than the capacity sits in the
middle of the frame, away from the borders that crops remove.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .. import linalg
from ..errors import CapacityError, DimensionError, DomainError, SemiBlindError
from ..media_io import Plane
from ..transforms import SubbandSet, haar_forward, haar_inverse
from .qim import qim_embed_array, qim_extract_array

BLOCK = 8
TAIL_SLOTS = 8
SCHEMES = ("block", "diagonal", "dwt_block")


def normalize_scheme(name: str) -> str:
    key = name.replace("-", "_").lower()
    if key not in SCHEMES:
        raise DomainError(f"unknown scheme {name!r}; choose from {', '.join(SCHEMES)}")
    return key


def _as_float(luma) -> np.ndarray:
    arr = luma.samples if isinstance(luma, Plane) else luma
    return np.asarray(arr, dtype=np.float64)


def _to_plane(arr: np.ndarray) -> Plane:
    return Plane(np.clip(np.rint(arr), 0, 255).astype(np.uint8))


@lru_cache(maxsize=32)
def block_order(grid_h: int, grid_w: int) -> np.ndarray:
    """Flat block indices sorted centre-out."""
    r, c = np.mgrid[0:grid_h, 0:grid_w]
    ring = np.maximum(np.abs(2 * r + 1 - grid_h), np.abs(2 * c + 1 - grid_w))
    order = np.lexsort((c.ravel(), r.ravel(), ring.ravel()))
    order.setflags(write=False)
    return order


def _grid(shape, bs):
    return shape[0] // bs, shape[1] // bs


def _blocks(arr, bs):
    gh, gw = _grid(arr.shape, bs)
    return arr[:gh * bs, :gw * bs].reshape(gh, bs, gw, bs).swapaxes(1, 2).reshape(-1, bs, bs)


def _put_blocks(arr, blocks, bs):
    gh, gw = _grid(arr.shape, bs)
    arr[:gh * bs, :gw * bs] = blocks.reshape(gh, gw, bs, bs).swapaxes(1, 2).reshape(gh * bs, gw * bs)


def capacity(scheme: str, width: int, height: int) -> int:
    scheme = normalize_scheme(scheme)
    if scheme == "block":
        return (height // BLOCK) * (width // BLOCK)
    if scheme == "dwt_block":
        if width % 2 or height % 2:
            return 0
        half = BLOCK // 2
        return (height // 2 // half) * (width // 2 // half)
    return min(width, height)


def embed_blocks(arr: np.ndarray, bits, delta: float, bs: int = BLOCK) -> np.ndarray:
    """Float-domain block embedding; returns a modified copy of ``arr``."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    gh, gw = _grid(arr.shape, bs)
    available = gh * gw
    if bits.size > available:
        raise CapacityError(bits.size, available)
    out = np.array(arr, dtype=np.float64, copy=True)
    if bits.size == 0:
        return out
    blocks = _blocks(out, bs)
    sel = block_order(gh, gw)[:bits.size]
    u, s, v = linalg.svd_batch(blocks[sel])
    s1 = s[:, 0]
    target = qim_embed_array(s1, bits, delta)
    # replacing s1 in the reconstruction is a rank-one update
    blocks[sel] += (target - s1)[:, None, None] * u[:, :, 0, None] * v[:, None, :, 0]
    _put_blocks(out, blocks, bs)
    return out


def block_s1(arr: np.ndarray, start: int, stop: int, bs: int = BLOCK) -> np.ndarray:
    """Largest singular value of the blocks at order positions [start, stop)."""
    gh, gw = _grid(arr.shape, bs)
    if stop > gh * gw:
        raise CapacityError(stop, gh * gw)
    sel = block_order(gh, gw)[start:stop]
    if sel.size == 0:
        return np.zeros(0)
    _, s, _ = linalg.svd_batch(_blocks(np.asarray(arr, dtype=np.float64), bs)[sel])
    return s[:, 0]


def extract_blocks(arr: np.ndarray, nbits: int, delta: float, bs: int = BLOCK, start: int = 0):
    return qim_extract_array(block_s1(arr, start, start + nbits, bs), delta)


def embed_block_frame(luma, bits, delta: float = 16.0) -> Plane:
    return _to_plane(embed_blocks(_as_float(luma), bits, delta))


def extract_block_frame(luma, nbits: int, delta: float = 16.0, start: int = 0) -> np.ndarray:
    return extract_blocks(_as_float(luma), nbits, delta, start=start)


def _ll(arr):
    if arr.shape[0] % 2 or arr.shape[1] % 2:
        raise DimensionError(
            f"dwt_block needs even luma dimensions, got {arr.shape[1]}x{arr.shape[0]}"
        )
    return haar_forward(arr)


def embed_dwt_frame(luma, bits, delta: float = 16.0) -> Plane:
    bands = _ll(_as_float(luma))
    ll = embed_blocks(bands.ll, bits, delta, BLOCK // 2)
    return _to_plane(haar_inverse(SubbandSet(ll, bands.lh, bands.hl, bands.hh)))


def extract_dwt_frame(luma, nbits: int, delta: float = 16.0, start: int = 0) -> np.ndarray:
    return extract_blocks(_ll(_as_float(luma)).ll, nbits, delta, BLOCK // 2, start)


# ------------------------------------------------------------------ diagonal


def embed_diag_frame(luma, bits, alpha: float = 0.016) -> tuple[Plane, np.ndarray]:
    """Scale ``s_i`` by ``1 + alpha`` (bit 1) or ``1 - alpha`` (bit 0).

    Returns the watermarked plane and the original ``s_1..s_K`` that
    extraction compares against.
    """
    arr = _as_float(luma)
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    k = min(arr.shape)
    if bits.size > k:
        raise CapacityError(bits.size, k)
    f = linalg.svd(arr)
    ref = f.s[:bits.size].copy()
    s = f.s.copy()
    s[:bits.size] *= 1.0 + alpha * (2.0 * bits - 1.0)
    out = linalg.reconstruct(linalg.SvdFactors(f.u, s, f.v))
    return _to_plane(out), ref


def decode_diagonal(observed, reference, alpha: float) -> np.ndarray:
    """Bits from observed singular values given the originals.

    Observed values are first matched to reference indices (minimum total
    squared distance to either embedding target): embedding can reorder
    close singular values, and a plain index-wise comparison then reads the
    wrong pair.  Without reordering the matching is the identity and this is
    ``observed[i] > reference[i]``, which is also what an unmarked spectrum
    (one closer to the reference than to any embedding target) decodes by.
    """
    observed = np.asarray(observed, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    k = reference.size
    if k == 0:
        return np.zeros(0, dtype=np.uint8)
    if observed.size < k:
        raise CapacityError(k, observed.size, "singular values")
    # unmodified values past K can interleave with the embedded ones; they
    # get their own slots, free for any value up to s_K (which no original
    # tail value exceeds) so a marked index cannot claim one for free
    tail = min(observed.size - k, TAIL_SLOTS)
    cols_obs = observed[:k + tail]
    lo = reference * (1.0 - alpha)
    hi = reference * (1.0 + alpha)
    cost = np.minimum(
        (cols_obs[None, :] - lo[:, None]) ** 2,
        (cols_obs[None, :] - hi[:, None]) ** 2,
    )
    if tail:
        excess = np.maximum(cols_obs - reference[-1], 0.0) ** 2
        cost = np.vstack([cost, np.broadcast_to(excess, (tail, cols_obs.size))])
    rows, cols = linear_sum_assignment(cost)
    marked = rows < k
    # presence test: when the unmarked spectrum explains the observation at
    # least as well as any marked one, fall back to the index-wise rule
    if np.sum((observed[:k] - reference) ** 2) <= cost[rows[marked], cols[marked]].sum():
        return (observed[:k] > reference).astype(np.uint8)
    matched = np.empty(k)
    matched[rows[marked]] = cols_obs[cols[marked]]
    return (matched > reference).astype(np.uint8)


def extract_diag_frame(luma, reference, alpha: float = 0.016) -> np.ndarray:
    if reference is None:
        raise SemiBlindError(
            "the diagonal scheme is semi-blind: extraction requires the .wmref sidecar "
            "written at embed time"
        )
    observed = linalg.svd(_as_float(luma)).s
    return decode_diagonal(observed, reference, alpha)
