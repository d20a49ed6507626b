"""SVD-based video watermarking: Y4M/PNM I/O, embedding schemes, attacks and metrics."""

from .errors import (
    AuthenticationError,
    CapacityError,
    FormatError,
    LockoutError,
    ParameterError,
    VidmarkError,
)
from .keying import KeyMaterial, TrialStore, derive_key, select_frames
from .linalg import svd, two_norm
from .media_io import (
    Frame,
    Plane,
    VideoSequence,
    WatermarkImage,
    parse_y4m,
    read_pnm,
    read_y4m_file,
    write_pnm,
    write_y4m,
    write_y4m_file,
)
from .metrics import ber, nc, psnr
from .watermark import EmbedConfig, embed_video, extract_video

__version__ = "0.1.0"

__all__ = [
    "AuthenticationError", "CapacityError", "EmbedConfig", "FormatError", "Frame",
    "KeyMaterial", "LockoutError", "ParameterError", "Plane", "TrialStore", "VideoSequence",
    "VidmarkError", "WatermarkImage", "ber", "derive_key", "embed_video", "extract_video",
    "nc", "parse_y4m", "psnr", "read_pnm", "read_y4m_file", "select_frames", "svd",
    "two_norm", "write_pnm", "write_y4m", "write_y4m_file",
]
