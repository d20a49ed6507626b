"""Synthetic test videos and watermarks.

Two families:

smooth       low-frequency gradients and blobs with mild texture; this is
             the typical host for the blind block schemes.
conditioned  frames built from an explicit singular spectrum, well clear of
             the 8-bit rounding floor; the semi-blind diagonal scheme needs
             this, since it perturbs every one of the full-frame singular values.

Every frame carries small independent noise so the rounding errors of
different frames are uncorrelated, while the content stays one scene.
"""

from __future__ import annotations

import numpy as np

from .media_io import C420, VideoSequence, WatermarkImage, frames_from_luma


def _u8(x):
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def smooth_base(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    y, x = np.mgrid[0:height, 0:width] / max(height, width)
    img = 70 + 90 * x + 40 * y
    for _ in range(4):
        cy, cx = rng.uniform(0, 1, 2)
        r = rng.uniform(0.1, 0.3)
        img += rng.uniform(-35, 35) * np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2 * r * r))
    fy, fx = rng.uniform(2, 6, 2)
    img += 10 * np.sin(2 * np.pi * fx * x) * np.cos(2 * np.pi * fy * y)
    return img


def _orthogonal_with_const(n: int, rng: np.random.Generator) -> np.ndarray:
    # first column is the constant vector, the rest a random orthonormal complement
    m = rng.standard_normal((n, n))
    m[:, 0] = 1.0
    q, _ = np.linalg.qr(m)
    q[:, 0] = np.abs(q[:, 0])
    return q


def conditioned_base(height: int, width: int, rng: np.random.Generator,
                     top: float = 700.0, bottom: float = 100.0) -> np.ndarray:
    """Mid-gray plus a zero-mean part with a geometric singular spectrum
    from ``top`` down to ``bottom``."""
    k = min(height, width)
    u = _orthogonal_with_const(height, rng)[:, 1:k]
    v = _orthogonal_with_const(width, rng)[:, 1:k]
    s = np.geomspace(top, bottom, k - 1)
    return 128.0 + (u * s) @ v.T


def synthetic_video(frames: int = 30, height: int = 128, width: int = 128, seed: int = 0,
                    kind: str = "smooth", noise: float = 1.0, subsampling: str = C420,
                    scenes: int = 1) -> VideoSequence:
    """``scenes`` > 1 splits the frames into runs with unrelated content."""
    rng = np.random.default_rng(seed)
    make = {"smooth": smooth_base, "conditioned": conditioned_base}[kind]
    bases = [make(height, width, rng) for _ in range(scenes)]
    lumas = []
    for t in range(frames):
        base = bases[t * scenes // frames]
        lumas.append(_u8(base + noise * rng.standard_normal(base.shape)))
    return frames_from_luma(lumas, subsampling)


def random_mark(height: int = 8, width: int = 8, seed: int = 0) -> WatermarkImage:
    rng = np.random.default_rng(seed)
    return WatermarkImage(rng.integers(0, 2, (height, width), dtype=np.uint8))
