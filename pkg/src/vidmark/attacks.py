"""Deterministic attack simulator.

Stochastic attacks draw from splitmix64 substreams split by frame index, so
their output depends only on ``(video, spec)`` and not on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft, ndimage

from .errors import ParameterError
from .keying import GOLDEN, MASK64, SplitMix64
from .media_io import C420, Frame, Plane, VideoSequence

KINDS = (
    "gaussian_noise", "blur", "crop", "resize", "rotate",
    "frame_drop", "frame_average", "jpeg_quantize",
)

# ITU T.81 Annex K luminance table
JPEG_LUMA = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.int64)


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    sigma: float = 0.0
    radius: int = 1
    rect: tuple | None = None  # (x, y, w, h) in luma pixels
    keep: float | None = None  # centred crop: fraction of width and height kept
    factor: float = 0.5
    degrees: float = 0.0
    rate: float = 0.0
    indices: tuple | None = None
    window: int = 2
    quality: int = 75
    seed: int = 0

    def __post_init__(self):
        kind = self.kind.replace("-", "_").lower()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ParameterError(f"unknown attack {self.kind!r}")
        if self.sigma < 0 or not math.isfinite(self.sigma):
            raise ParameterError("sigma must be a finite value >= 0")
        if not 0 < self.factor <= 1:
            raise ParameterError("resize factor must lie in (0, 1]")
        if not 1 <= self.quality <= 100:
            raise ParameterError("quality must lie in [1, 100]")
        if not 0 <= self.rate < 1:
            raise ParameterError("drop rate must lie in [0, 1)")
        if self.window < 1:
            raise ParameterError("window must be >= 1")
        if self.radius != 1:
            raise ParameterError("only the 3x3 box blur (radius 1) is supported")
        if not math.isfinite(self.degrees):
            raise ParameterError("degrees must be finite")
        if self.keep is not None and not 0 < self.keep <= 1:
            raise ParameterError("crop keep fraction must lie in (0, 1]")
        if kind == "crop" and self.rect is None and self.keep is None:
            raise ParameterError("crop needs rect or keep")
        if self.indices is not None:
            object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def label(self) -> str:
        k = self.kind
        detail = {
            "gaussian_noise": f"sigma={self.sigma:g}",
            "blur": "3x3",
            "crop": f"keep={self.keep:g}" if self.keep is not None else f"rect={self.rect}",
            "resize": f"factor={self.factor:g}",
            "rotate": f"degrees={self.degrees:g}",
            "frame_drop": f"indices={list(self.indices)}" if self.indices is not None else f"rate={self.rate:g}",
            "frame_average": f"window={self.window}",
            "jpeg_quantize": f"quality={self.quality}",
        }[k]
        return f"{k}({detail})"


# ------------------------------------------------------------------ helpers


def _u8(x: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def _planes(frame: Frame):
    return frame.y.samples, frame.cb.samples, frame.cr.samples


def _rebuild(frame: Frame, y, cb, cr) -> Frame:
    return Frame(Plane(y), Plane(cb), Plane(cr), frame.subsampling)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def splitmix_block(seed: int, count: int) -> np.ndarray:
    """The first ``count`` splitmix64 outputs from ``seed``, vectorised."""
    steps = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(np.uint64(seed & MASK64) + steps * np.uint64(GOLDEN))


def gaussian_block(seed: int, count: int) -> np.ndarray:
    """Box-Muller normals from a splitmix64 stream."""
    pairs = (count + 1) // 2
    raw = splitmix_block(seed, 2 * pairs) >> np.uint64(11)
    scale = 1.0 / (1 << 53)
    u1 = (raw[0::2].astype(np.float64) + 1.0) * scale  # (0, 1]
    u2 = raw[1::2].astype(np.float64) * scale
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(2 * np.pi * u2)
    z[1::2] = r * np.sin(2 * np.pi * u2)
    return z[:count]


def jpeg_table(quality: int) -> np.ndarray:
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    return np.clip((JPEG_LUMA * scale + 50) // 100, 1, 255)


def _bilinear(plane: np.ndarray, rows: np.ndarray, cols: np.ndarray, mode: str, cval: float):
    return ndimage.map_coordinates(
        plane.astype(np.float64), [rows, cols], order=1, mode=mode, cval=cval
    )


def _resample(plane: np.ndarray, shape) -> np.ndarray:
    h, w = plane.shape
    oh, ow = shape
    r = (np.arange(oh) + 0.5) * (h / oh) - 0.5
    c = (np.arange(ow) + 0.5) * (w / ow) - 0.5
    rr, cc = np.meshgrid(r, c, indexing="ij")
    return _bilinear(plane, rr, cc, "nearest", 0.0)


# ------------------------------------------------------------ per-frame ops


def _noise(frame: Frame, sigma: float, seed: int, index: int) -> Frame:
    if sigma == 0:
        return frame
    stream = SplitMix64(seed).split(index).state
    planes = _planes(frame)
    total = sum(p.size for p in planes)
    z = gaussian_block(stream, total) * sigma
    out, pos = [], 0
    for p in planes:
        out.append(_u8(p + z[pos:pos + p.size].reshape(p.shape)))
        pos += p.size
    return _rebuild(frame, *out)


def _box(p: np.ndarray) -> np.ndarray:
    padded = np.pad(p.astype(np.float64), 1, mode="edge")
    h, w = p.shape
    acc = sum(padded[i:i + h, j:j + w] for i in range(3) for j in range(3))
    return _u8(acc / 9.0)


def _crop_rect(spec: AttackSpec, w: int, h: int):
    if spec.rect is not None:
        x, y, rw, rh = spec.rect
    else:
        rw, rh = round(w * spec.keep), round(h * spec.keep)
        x, y = (w - rw) // 2, (h - rh) // 2
    return x, y, rw, rh


def _crop(frame: Frame, spec: AttackSpec) -> Frame:
    x, y, rw, rh = _crop_rect(spec, frame.width, frame.height)
    out = []
    for p, fill, sub in zip(_planes(frame), (0, 128, 128), (1, 2, 2)):
        s = sub if frame.subsampling == C420 else 1
        q = np.full_like(p, fill)
        ys = slice(max(0, y // s), max(0, -(-(y + rh) // s)))
        xs = slice(max(0, x // s), max(0, -(-(x + rw) // s)))
        q[ys, xs] = p[ys, xs]
        out.append(q)
    return _rebuild(frame, *out)


def _resize(frame: Frame, factor: float) -> Frame:
    if factor == 1:
        return frame
    out = []
    for p in _planes(frame):
        small = (max(1, round(p.shape[0] * factor)), max(1, round(p.shape[1] * factor)))
        out.append(_u8(_resample(_resample(p, small), p.shape)))
    return _rebuild(frame, *out)


def _rotate(frame: Frame, degrees: float) -> Frame:
    if degrees % 360 == 0:
        return frame
    th = math.radians(degrees)
    cos, sin = math.cos(th), math.sin(th)
    out = []
    for p, fill in zip(_planes(frame), (0.0, 128.0, 128.0)):
        h, w = p.shape
        cy, cx = (h - 1) / 2, (w - 1) / 2
        rr, cc = np.mgrid[0:h, 0:w].astype(np.float64)
        # inverse mapping: output pixel -> source coordinate
        sr = cy + (rr - cy) * cos - (cc - cx) * sin
        sc = cx + (rr - cy) * sin + (cc - cx) * cos
        # snap float drift so exact multiples of 90 degrees stay on the grid
        sr, sc = np.round(sr, 9), np.round(sc, 9)
        out.append(_u8(_bilinear(p, sr, sc, "constant", fill)))
    return _rebuild(frame, *out)


def _jpeg(frame: Frame, quality: int) -> Frame:
    q = jpeg_table(quality).astype(np.float64)
    y = frame.y.samples.astype(np.float64)
    h, w = y.shape
    ph, pw = -(-h // 8) * 8, -(-w // 8) * 8
    padded = np.pad(y, ((0, ph - h), (0, pw - w)), mode="edge") - 128.0
    blocks = padded.reshape(ph // 8, 8, pw // 8, 8).swapaxes(1, 2)
    coef = fft.dctn(blocks, type=2, axes=(-2, -1), norm="ortho")
    coef = np.round(coef / q) * q
    rec = fft.idctn(coef, type=2, axes=(-2, -1), norm="ortho")
    rec = rec.swapaxes(1, 2).reshape(ph, pw)[:h, :w] + 128.0
    return frame.with_luma(_u8(rec))


# -------------------------------------------------------------------- entry


def apply_attack(seq: VideoSequence, spec: AttackSpec) -> VideoSequence:
    k = spec.kind
    frames = list(seq.frames)
    if k == "gaussian_noise":
        frames = [_noise(f, spec.sigma, spec.seed, i) for i, f in enumerate(frames)]
    elif k == "blur":
        frames = [_rebuild(f, *(_box(p) for p in _planes(f))) for f in frames]
    elif k == "crop":
        frames = [_crop(f, spec) for f in frames]
    elif k == "resize":
        frames = [_resize(f, spec.factor) for f in frames]
    elif k == "rotate":
        frames = [_rotate(f, spec.degrees) for f in frames]
    elif k == "jpeg_quantize":
        frames = [_jpeg(f, spec.quality) for f in frames]
    elif k == "frame_average":
        frames = _average(frames, spec.window)
    elif k == "frame_drop":
        if spec.indices is not None:
            drop = set(spec.indices)
        else:
            rng = SplitMix64(spec.seed)
            drop = {i for i in range(len(frames)) if rng.uniform() < spec.rate}
        frames = [f for i, f in enumerate(frames) if i not in drop]
        if seq.frames and not frames:
            raise ParameterError("degenerate output: frame_drop removed every frame")
    return seq.replace_frames(frames)


def _average(frames, window):
    if window == 1:
        return frames
    out = []
    stacks = [np.stack([p for p in planes]) for planes in zip(*(_planes(f) for f in frames))] if frames else []
    for t, f in enumerate(frames):
        lo = max(0, t - window + 1)
        out.append(_rebuild(f, *(_u8(s[lo:t + 1].astype(np.float64).mean(axis=0)) for s in stacks)))
    return out


def apply_chain(seq: VideoSequence, specs) -> VideoSequence:
    for spec in specs:
        seq = apply_attack(seq, spec)
    return seq
