"""Embedding / extraction engine."""

from .payload import build_payload, parse_payload
from .pipeline import EmbedConfig, EmbedResult, embed_video, extract_video, plan_frames
from .qim import qim_embed, qim_extract
from .scenes import detect_scenes
from .schemes import (
    capacity,
    decode_diagonal,
    embed_block_frame,
    embed_diag_frame,
    embed_dwt_frame,
    extract_block_frame,
    extract_diag_frame,
    extract_dwt_frame,
)
from .sidecar import DiagonalReference

__all__ = [
    "DiagonalReference", "EmbedConfig", "EmbedResult", "build_payload", "capacity",
    "decode_diagonal", "detect_scenes", "embed_block_frame", "embed_diag_frame",
    "embed_dwt_frame", "embed_video", "extract_block_frame", "extract_diag_frame",
    "extract_dwt_frame", "extract_video", "parse_payload", "plan_frames", "qim_embed",
    "qim_extract",
]
