"""Imperceptibility and robustness measures, report files, and the
console-style singular value dump."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionError
from .media_io import Plane, VideoSequence, WatermarkImage

INF = math.inf


def _arr(x):
    if isinstance(x, Plane):
        return x.samples
    if isinstance(x, WatermarkImage):
        return x.bits
    return np.asarray(x)


def psnr(a, b, peak: float = 255.0) -> float:
    """``10 log10(peak^2 / MSE)``; ``inf`` for identical inputs."""
    a, b = _arr(a).astype(np.float64), _arr(b).astype(np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"psnr: shapes differ {a.shape} vs {b.shape}")
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return INF
    return float(10.0 * np.log10(peak * peak / mse))


def _pm1(w, w_hat):
    a, b = _arr(w), _arr(w_hat)
    if a.shape != b.shape:
        raise DimensionError(f"watermark shapes differ {a.shape} vs {b.shape}")
    if a.size == 0:
        raise DimensionError("empty watermark")
    return 2.0 * a.astype(np.float64) - 1.0, 2.0 * b.astype(np.float64) - 1.0


def nc(w, w_hat) -> float:
    """Normalized correlation of the +/-1 mapped bitmaps."""
    a, b = _pm1(w, w_hat)
    return float(np.dot(a.ravel(), b.ravel()) / a.size)


def ber(w, w_hat) -> float:
    a, b = _arr(w), _arr(w_hat)
    if a.shape != b.shape:
        raise DimensionError(f"watermark shapes differ {a.shape} vs {b.shape}")
    if a.size == 0:
        raise DimensionError("empty watermark")
    return float(np.count_nonzero(a != b) / a.size)


@dataclass
class MetricsReport:
    rows: list = field(default_factory=list)  # (frame index, psnr dB)
    nc: float | None = None
    ber: float | None = None
    status: str = "ok"
    trial: object = None
    frames_used: tuple = ()

    @property
    def mean_psnr(self) -> float | None:
        if not self.rows:
            return None
        vals = [p for _, p in self.rows]
        if any(math.isinf(p) for p in vals):
            finite = [p for p in vals if not math.isinf(p)]
            return INF if not finite else float(np.mean(finite))
        return float(np.mean(vals))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["frame", "psnr_db"])
        for idx, p in self.rows:
            wr.writerow([idx, _fmt(p)])
        wr.writerow(["#aggregate", "mean_psnr", "nc", "ber", "status"])
        wr.writerow(["#aggregate", _fmt(self.mean_psnr), _fmt(self.nc), _fmt(self.ber), self.status])
        return buf.getvalue()


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.6f}"


def frame_psnr_rows(original: VideoSequence, marked: VideoSequence, frames=None):
    """Per-frame luma PSNR; by default only over frames that differ, or over
    every frame (all infinite) when nothing differs."""
    if (original.width, original.height, len(original)) != (marked.width, marked.height, len(marked)):
        raise DimensionError("videos differ in dimensions or frame count")
    if frames is None:
        frames = [i for i, (a, b) in enumerate(zip(original.frames, marked.frames)) if a.y != b.y]
        if not frames:
            frames = range(len(original))
    return [(i, psnr(original.frames[i].y, marked.frames[i].y)) for i in frames]


def singular_report(a) -> str:
    """U, S, V, the 2-norm and the singular values in a fixed 6-decimal layout."""
    a = linalg.as_matrix(a)
    f = linalg.svd(a)
    parts = [
        "A =", linalg.format_matrix(a),
        "A = U S V^T",
        "U =", linalg.format_matrix(f.u),
        "S =", linalg.format_matrix(np.diag(f.s)),
        "V =", linalg.format_matrix(f.v),
        f"2-norm = {float(f.s[0])!r}",
        "singular values =",
        "  " + "  ".join(f"{x:f}" for x in f.s),
    ]
    return "\n".join(parts) + "\n"


def ber_bar_svg(labels, values, title="BER per attack", width=640, bar_h=22) -> str:
    """Minimal static horizontal bar chart."""
    labels = [str(l) for l in labels]
    values = [float(v) for v in values]
    left, top = 180, 40
    plot_w = width - left - 60
    height = top + bar_h * len(values) + 30
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<text x="{width // 2}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>',
    ]
    for i, (lab, v) in enumerate(zip(labels, values)):
        y = top + i * bar_h
        w = max(0.0, min(1.0, v)) * plot_w
        out.append(f'<text x="{left - 6}" y="{y + bar_h * 0.7:.1f}" text-anchor="end">{_esc(lab)}</text>')
        out.append(f'<rect x="{left}" y="{y + 3}" width="{w:.1f}" height="{bar_h - 6}" fill="#4477aa"/>')
        out.append(f'<text x="{left + w + 4:.1f}" y="{y + bar_h * 0.7:.1f}">{v:.3f}</text>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - 30}" stroke="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
