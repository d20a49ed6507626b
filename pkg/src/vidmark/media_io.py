"""Raw video (YUV4MPEG2) and netpbm (P1-P6) I/O plus BT.601 colour conversion.

Planes are stored as ``(height, width)`` uint8 numpy arrays; a parsed
structure is treated as immutable (arrays are flagged read-only).
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import BinaryIO, Sequence

import numpy as np

from .errors import FormatError, TruncationError, UnsupportedError

Y4M_MAGIC = b"YUV4MPEG2"
FRAME_TAG = b"FRAME"
C444 = "444"
C420 = "420"

# header colourspace token -> subsampling; all 4:2:0 sitings are treated alike
_COLORSPACES = {
    "444": C444,
    "420": C420,
    "420jpeg": C420,
    "420paldv": C420,
    "420mpeg2": C420,
}

MAX_HEADER = 4096


def _frozen(arr, dtype=np.uint8):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Plane:
    """One 8-bit sample plane."""

    samples: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.samples)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise FormatError(f"plane must be a non-empty 2-D array, got shape {a.shape}")
        if a.dtype != np.uint8:
            if np.any(a < 0) or np.any(a > 255):
                raise FormatError("plane samples must lie in [0, 255]")
        object.__setattr__(self, "samples", _frozen(a))

    @classmethod
    def from_flat(cls, width: int, height: int, samples) -> "Plane":
        flat = np.asarray(samples, dtype=np.uint8).ravel()
        if flat.size != width * height:
            raise FormatError(
                f"plane expects {width * height} samples, got {flat.size}"
            )
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Plane):
            return NotImplemented
        return np.array_equal(self.samples, other.samples)


def chroma_shape(width: int, height: int, subsampling: str) -> tuple[int, int]:
    """Chroma plane ``(height, width)`` for a given luma size."""
    if subsampling == C444:
        return height, width
    if subsampling == C420:
        return (height + 1) // 2, (width + 1) // 2
    raise UnsupportedError(f"unsupported subsampling {subsampling!r}")


@dataclass(frozen=True, eq=False)
class Frame:
    y: Plane
    cb: Plane
    cr: Plane
    subsampling: str = C420

    def __post_init__(self):
        ch = chroma_shape(self.y.width, self.y.height, self.subsampling)
        if self.subsampling == C420 and (self.y.width % 2 or self.y.height % 2):
            raise FormatError("4:2:0 frames need even luma dimensions")
        for name, p in (("cb", self.cb), ("cr", self.cr)):
            if p.samples.shape != ch:
                raise FormatError(
                    f"{name} plane is {p.samples.shape}, expected {ch} for C{self.subsampling}"
                )

    @property
    def width(self) -> int:
        return self.y.width

    @property
    def height(self) -> int:
        return self.y.height

    def with_luma(self, luma) -> "Frame":
        if not isinstance(luma, Plane):
            luma = Plane(luma)
        return Frame(luma, self.cb, self.cr, self.subsampling)

    def payload_size(self) -> int:
        h, w = chroma_shape(self.width, self.height, self.subsampling)
        return self.width * self.height + 2 * w * h

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self.subsampling == other.subsampling
            and self.y == other.y
            and self.cb == other.cb
            and self.cr == other.cr
        )


@dataclass(frozen=True, eq=False)
class VideoSequence:
    width: int
    height: int
    fps_num: int = 25
    fps_den: int = 1
    subsampling: str = C420
    frames: tuple = ()
    # header tokens we pass through untouched (I, A, X...)
    extra: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "extra", tuple(self.extra))
        if self.width < 1 or self.height < 1:
            raise FormatError("video dimensions must be positive")
        if self.fps_num < 1 or self.fps_den < 1:
            raise FormatError("frame rate terms must be positive")
        for i, f in enumerate(self.frames):
            if (f.width, f.height, f.subsampling) != (self.width, self.height, self.subsampling):
                raise FormatError(f"frame {i} does not match the sequence header")

    def __len__(self):
        return len(self.frames)

    def replace_frames(self, frames) -> "VideoSequence":
        return VideoSequence(
            self.width, self.height, self.fps_num, self.fps_den,
            self.subsampling, tuple(frames), self.extra,
        )

    def __eq__(self, other):
        if not isinstance(other, VideoSequence):
            return NotImplemented
        return (
            (self.width, self.height, self.fps_num, self.fps_den, self.subsampling)
            == (other.width, other.height, other.fps_num, other.fps_den, other.subsampling)
            and self.extra == other.extra
            and len(self.frames) == len(other.frames)
            and all(a == b for a, b in zip(self.frames, other.frames))
        )


@dataclass(frozen=True, eq=False)
class WatermarkImage:
    """Binary bitmap; 1 means black (netpbm convention)."""

    bits: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.bits)
        if a.ndim != 2 or a.size < 1:
            raise FormatError(f"watermark must be a non-empty 2-D array, got shape {a.shape}")
        if not np.all((a == 0) | (a == 1)):
            raise FormatError("watermark bits must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(a))

    @classmethod
    def from_flat(cls, width: int, height: int, bits) -> "WatermarkImage":
        flat = np.asarray(bits, dtype=np.uint8).ravel()
        if width < 1 or height < 1 or flat.size != width * height:
            raise FormatError(f"watermark {width}x{height} needs {width * height} bits")
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def __eq__(self, other):
        if not isinstance(other, WatermarkImage):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


@dataclass(frozen=True, eq=False)
class RGBImage:
    r: Plane
    g: Plane
    b: Plane

    def __eq__(self, other):
        if not isinstance(other, RGBImage):
            return NotImplemented
        return self.r == other.r and self.g == other.g and self.b == other.b


# --------------------------------------------------------------------- Y4M


def _read_line(stream: BinaryIO, limit=MAX_HEADER) -> bytes:
    buf = bytearray()
    while True:
        c = stream.read(1)
        if not c:
            break
        if c == b"\n":
            return bytes(buf)
        buf += c
        if len(buf) > limit:
            raise FormatError("header line too long")
    raise TruncationError("unexpected end of stream inside a header line")


def _parse_int(token: str, what: str) -> int:
    if not re.fullmatch(r"[0-9]+", token):
        raise FormatError(f"bad {what} value {token!r}")
    return int(token)


def parse_y4m(stream) -> VideoSequence:
    """Parse a YUV4MPEG2 stream (``bytes`` or a binary file object)."""
    if isinstance(stream, (bytes, bytearray, memoryview)):
        stream = io.BytesIO(bytes(stream))
    magic = stream.read(len(Y4M_MAGIC))
    if magic != Y4M_MAGIC:
        raise FormatError("bad magic: not a YUV4MPEG2 stream")
    try:
        header = _read_line(stream).decode("ascii")
    except UnicodeDecodeError as exc:
        raise FormatError("header is not ASCII") from exc
    if header and not header.startswith(" "):
        raise FormatError("bad magic: expected a space after YUV4MPEG2")

    width = height = None
    fps_num, fps_den = 25, 1
    subsampling = C420
    extra = []
    for tok in header.split():
        key, val = tok[0], tok[1:]
        if key == "W":
            width = _parse_int(val, "width")
        elif key == "H":
            height = _parse_int(val, "height")
        elif key == "F":
            num, sep, den = val.partition(":")
            if not sep:
                raise FormatError(f"bad frame rate {val!r}")
            fps_num, fps_den = _parse_int(num, "frame rate"), _parse_int(den, "frame rate")
        elif key == "C":
            if val not in _COLORSPACES:
                raise UnsupportedError(f"unsupported colorspace C{val}")
            subsampling = _COLORSPACES[val]
        else:
            extra.append(tok)
    if width is None or height is None:
        raise FormatError("header lacks W or H")
    if width < 1 or height < 1:
        raise FormatError("video dimensions must be positive")
    if fps_num < 1 or fps_den < 1:
        raise FormatError("frame rate terms must be positive")
    if subsampling == C420 and (width % 2 or height % 2):
        raise FormatError("4:2:0 video needs even dimensions")

    ch, cw = chroma_shape(width, height, subsampling)
    luma_n, chroma_n = width * height, cw * ch
    frame_bytes = luma_n + 2 * chroma_n
    frames = []
    while True:
        tag = stream.read(len(FRAME_TAG))
        if not tag:
            break
        idx = len(frames)
        if tag != FRAME_TAG:
            if len(tag) < len(FRAME_TAG) and FRAME_TAG.startswith(tag):
                raise TruncationError(f"truncated FRAME marker at frame {idx}", idx)
            raise FormatError(f"expected FRAME marker at frame {idx}")
        rest = _read_line(stream)
        if rest and not rest.startswith(b" "):
            raise FormatError(f"malformed FRAME marker at frame {idx}")
        data = stream.read(frame_bytes)
        if len(data) != frame_bytes:
            raise TruncationError(
                f"truncated payload at frame {idx}: {len(data)} of {frame_bytes} bytes",
                idx,
            )
        buf = np.frombuffer(data, dtype=np.uint8)
        y = buf[:luma_n].reshape(height, width)
        cb = buf[luma_n:luma_n + chroma_n].reshape(ch, cw)
        cr = buf[luma_n + chroma_n:].reshape(ch, cw)
        frames.append(Frame(Plane(y), Plane(cb), Plane(cr), subsampling))
    return VideoSequence(width, height, fps_num, fps_den, subsampling, frames, extra)


def _header_bytes(seq: VideoSequence) -> bytes:
    ctag = "C444" if seq.subsampling == C444 else "C420jpeg"
    toks = [f"W{seq.width}", f"H{seq.height}", f"F{seq.fps_num}:{seq.fps_den}"]
    toks += list(seq.extra)
    toks.append(ctag)
    return Y4M_MAGIC + b" " + " ".join(toks).encode("ascii") + b"\n"


def write_y4m(seq: VideoSequence, sink: BinaryIO | None = None) -> bytes | None:
    """Serialize ``seq``; returns bytes when no sink is given."""
    out = io.BytesIO() if sink is None else sink
    out.write(_header_bytes(seq))
    for f in seq.frames:
        out.write(FRAME_TAG + b"\n")
        out.write(f.y.samples.tobytes())
        out.write(f.cb.samples.tobytes())
        out.write(f.cr.samples.tobytes())
    if sink is None:
        return out.getvalue()
    return None


def read_y4m_file(path) -> VideoSequence:
    with open(path, "rb") as fh:
        return parse_y4m(fh)


def write_y4m_file(seq: VideoSequence, path) -> None:
    with open(path, "wb") as fh:
        write_y4m(seq, fh)


# --------------------------------------------------------------------- PNM

_PNM_MAGICS = {b"P1", b"P2", b"P3", b"P4", b"P5", b"P6"}


_WS = frozenset(b" \t\n\r\v\f")


class _Tokens:
    """Header tokenizer that honours ``#`` comments and leaves the stream
    positioned right after the single whitespace ending the last token."""

    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def next(self) -> bytes:
        d, n = self.data, len(self.data)
        while self.pos < n:
            c = d[self.pos]
            if c == 0x23:  # '#'
                while self.pos < n and d[self.pos] not in (0x0A, 0x0D):
                    self.pos += 1
            elif c in _WS:
                self.pos += 1
            else:
                break
        start = self.pos
        while self.pos < n and d[self.pos] not in _WS and d[self.pos] != 0x23:
            self.pos += 1
        if start == self.pos:
            raise FormatError("unexpected end of PNM header")
        return d[start:self.pos]

    def int(self, what: str) -> int:
        tok = self.next()
        if not tok.isdigit():
            raise FormatError(f"bad PNM {what}: {tok!r}")
        return int(tok)

    def skip_single_ws(self):
        if self.pos >= len(self.data) or self.data[self.pos] not in _WS:
            raise FormatError("PNM header must end with one whitespace byte")
        self.pos += 1


def read_pnm(stream):
    """Decode P1-P6.

    P1/P4 -> :class:`WatermarkImage`, P2/P5 -> :class:`Plane`,
    P3/P6 -> :class:`RGBImage`.
    """
    data = stream if isinstance(stream, (bytes, bytearray)) else stream.read()
    data = bytes(data)
    magic = data[:2]
    if magic not in _PNM_MAGICS:
        raise FormatError("bad magic: not a PNM image")
    toks = _Tokens(data, 2)
    width = toks.int("width")
    height = toks.int("height")
    if width < 1 or height < 1:
        raise FormatError("PNM dimensions must be positive")
    if width * height > 1 << 28:
        raise FormatError("PNM dimensions unreasonably large")
    bitmap = magic in (b"P1", b"P4")
    channels = 3 if magic in (b"P3", b"P6") else 1
    if not bitmap:
        maxval = toks.int("maxval")
        if maxval != 255:
            raise UnsupportedError(f"unsupported maxval {maxval} (only 255)")
    n = width * height * channels

    if magic in (b"P1", b"P2", b"P3"):
        if magic == b"P1":
            # P1 digits need no separators
            body = re.sub(rb"#[^\n\r]*", b"", data[toks.pos:])
            digits = re.sub(rb"\s", b"", body)
            if len(digits) < n or not set(digits[:n]) <= {0x30, 0x31}:
                raise FormatError("P1 payload does not match dimensions")
            vals = np.frombuffer(digits[:n], dtype=np.uint8) - 0x30
        else:
            vals = np.empty(n, dtype=np.int64)
            for i in range(n):
                vals[i] = toks.int("sample")
            if np.any(vals > 255):
                raise FormatError("sample exceeds maxval")
    else:
        toks.skip_single_ws()
        raw = data[toks.pos:]
        if magic == b"P4":
            row_bytes = (width + 7) // 8
            need = row_bytes * height
            if len(raw) < need:
                raise FormatError("P4 payload shorter than declared dimensions")
            packed = np.frombuffer(raw[:need], dtype=np.uint8).reshape(height, row_bytes)
            vals = np.unpackbits(packed, axis=1)[:, :width].ravel()
        else:
            if len(raw) < n:
                raise FormatError("PNM payload shorter than declared dimensions")
            vals = np.frombuffer(raw[:n], dtype=np.uint8)

    if bitmap:
        return WatermarkImage.from_flat(width, height, vals)
    if channels == 1:
        return Plane.from_flat(width, height, vals)
    rgb = np.asarray(vals, dtype=np.uint8).reshape(height, width, 3)
    return RGBImage(Plane(rgb[..., 0]), Plane(rgb[..., 1]), Plane(rgb[..., 2]))


def write_pnm(image, variant: str | None = None, sink: BinaryIO | None = None):
    """Encode ``image``; binary variants (P4/P5/P6) are the default."""
    if isinstance(image, WatermarkImage):
        variant = variant or "P4"
        allowed = ("P1", "P4")
    elif isinstance(image, Plane):
        variant = variant or "P5"
        allowed = ("P2", "P5")
    elif isinstance(image, RGBImage):
        variant = variant or "P6"
        allowed = ("P3", "P6")
    else:
        raise TypeError(f"cannot encode {type(image).__name__} as PNM")
    if variant not in allowed:
        raise FormatError(f"variant {variant} does not fit {type(image).__name__}")

    ref = image.r if isinstance(image, RGBImage) else image
    w, h = ref.width, ref.height
    head = f"{variant}\n{w} {h}\n"
    if variant not in ("P1", "P4"):
        head += "255\n"
    out = bytearray(head.encode("ascii"))
    if variant == "P4":
        out += np.packbits(image.bits, axis=1).tobytes()
    elif variant == "P1":
        out += b"\n".join(b" ".join(b"%d" % v for v in row) for row in image.bits) + b"\n"
    elif variant == "P5":
        out += image.samples.tobytes()
    elif variant == "P6":
        out += np.stack([image.r.samples, image.g.samples, image.b.samples], -1).tobytes()
    else:
        if variant == "P2":
            rows = image.samples
        else:
            rows = np.stack(
                [image.r.samples, image.g.samples, image.b.samples], -1
            ).reshape(h, w * 3)
        out += b"\n".join(b" ".join(b"%d" % v for v in row) for row in rows) + b"\n"

    if sink is None:
        return bytes(out)
    sink.write(bytes(out))
    return None


def read_pnm_file(path):
    with open(path, "rb") as fh:
        return read_pnm(fh)


def write_pnm_file(image, path, variant=None):
    with open(path, "wb") as fh:
        write_pnm(image, variant, fh)


# ----------------------------------------------------------------- colour


def rgb_to_ycbcr(r, g, b):
    """BT.601 full-range RGB -> YCbCr; works on scalars or arrays."""
    r, g, b = (np.asarray(c, dtype=np.float64) for c in (r, g, b))
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return tuple(_to_u8(c) for c in (y, cb, cr))


def ycbcr_to_rgb(y, cb, cr):
    y, cb, cr = (np.asarray(c, dtype=np.float64) for c in (y, cb, cr))
    r = y + 1.402 * (cr - 128.0)
    g = y - 0.344136 * (cb - 128.0) - 0.714136 * (cr - 128.0)
    b = y + 1.772 * (cb - 128.0)
    return tuple(_to_u8(c) for c in (r, g, b))


def _to_u8(x):
    # round half away from zero; inputs are non-negative after clamping anyway
    out = np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)
    return int(out) if out.ndim == 0 else out


def rgb_image_to_frame(img: RGBImage, subsampling: str = C444) -> Frame:
    y, cb, cr = rgb_to_ycbcr(img.r.samples, img.g.samples, img.b.samples)
    if subsampling == C420:
        cb, cr = _subsample(cb), _subsample(cr)
    return Frame(Plane(y), Plane(cb), Plane(cr), subsampling)


def _subsample(p: np.ndarray) -> np.ndarray:
    h, w = p.shape
    q = p.astype(np.float64)
    return np.floor(q.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3)) + 0.5).astype(np.uint8)


def frames_from_luma(lumas: Sequence[np.ndarray], subsampling: str = C420,
                     fps: tuple[int, int] = (25, 1)) -> VideoSequence:
    """Build a sequence from luma arrays with neutral (128) chroma."""
    lumas = [np.asarray(l) for l in lumas]
    if not lumas:
        raise FormatError("need at least one frame")
    h, w = lumas[0].shape
    ch = chroma_shape(w, h, subsampling)
    grey = Plane(np.full(ch, 128, dtype=np.uint8))
    frames = [Frame(Plane(l), grey, grey, subsampling) for l in lumas]
    return VideoSequence(w, h, fps[0], fps[1], subsampling, frames)
