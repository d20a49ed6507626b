"""Whole-video embedding and extraction."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import (
    AuthenticationError,
    CapacityError,
    DimensionError,
    ExtractionFailedError,
    LockoutError,
    ParameterError,
    SemiBlindError,
)
from ..keying import KeyMaterial, TrialState, TrialStore, check_trial, select_frames
from ..media_io import VideoSequence, WatermarkImage
from ..metrics import MetricsReport, ber, frame_psnr_rows, nc
from .payload import HEADER_BITS, build_payload, parse_header, parse_payload, payload_length
from .scenes import DEFAULT_THRESHOLD, detect_scenes
from .schemes import (
    capacity,
    embed_block_frame,
    embed_diag_frame,
    embed_dwt_frame,
    extract_block_frame,
    extract_diag_frame,
    extract_dwt_frame,
    normalize_scheme,
)
from .sidecar import DiagonalReference


@dataclass(frozen=True)
class EmbedConfig:
    scheme: str = "block"
    delta: float = 16.0
    block_size: int = 8
    frames_per_scene: int = 1
    scene_threshold: float = DEFAULT_THRESHOLD
    realign_budget: int = 16
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scheme", normalize_scheme(self.scheme))
        if not self.delta > 0:
            raise ParameterError("delta must be positive")
        if self.block_size != 8:
            raise ParameterError("block_size is fixed at 8")
        if self.frames_per_scene < 1:
            raise ParameterError("frames_per_scene must be at least 1")
        if self.realign_budget < 0 or self.workers < 1:
            raise ParameterError("realign_budget must be >= 0 and workers >= 1")

    @property
    def alpha(self) -> float:
        """Relative strength of the diagonal scheme."""
        return self.delta / 1000.0


@dataclass
class EmbedResult:
    video: VideoSequence
    reference: DiagonalReference | None
    frames: tuple
    capacity: int
    payload_bits: int
    report: MetricsReport

    def __iter__(self):
        # allows ``video, reference = embed_video(...)``
        return iter((self.video, self.reference))


def plan_frames(seq: VideoSequence, key: KeyMaterial, config: EmbedConfig) -> list[int]:
    """Scene-wise stratified selection of host frames."""
    out = []
    for j, (a, b) in enumerate(detect_scenes(seq, config.scene_threshold)):
        m = min(config.frames_per_scene, b - a)
        out.extend(a + i for i in select_frames(key, b - a, m, stream=j))
    return out


def _check_fit(seq: VideoSequence, nbits: int, config: EmbedConfig) -> int:
    if config.scheme == "dwt_block" and (seq.width % 2 or seq.height % 2):
        raise DimensionError(
            f"dwt_block needs even luma dimensions, got {seq.width}x{seq.height}"
        )
    cap = capacity(config.scheme, seq.width, seq.height)
    if nbits > cap:
        raise CapacityError(nbits, cap)
    return cap


def _map(fn, items, workers):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def embed_video(seq: VideoSequence, watermark: WatermarkImage, key: KeyMaterial,
                config: EmbedConfig | None = None) -> EmbedResult:
    config = config or EmbedConfig()
    if len(seq) == 0:
        raise ParameterError("cannot embed into an empty video")
    bits = build_payload(watermark, key.check_tag)
    cap = _check_fit(seq, bits.size, config)
    chosen = plan_frames(seq, key, config)

    def work(idx):
        luma = seq.frames[idx].y
        if config.scheme == "block":
            return embed_block_frame(luma, bits, config.delta), None
        if config.scheme == "dwt_block":
            return embed_dwt_frame(luma, bits, config.delta), None
        return embed_diag_frame(luma, bits, config.alpha)

    results = _map(work, chosen, config.workers)
    frames = list(seq.frames)
    reference = DiagonalReference("diagonal", config.delta) if config.scheme == "diagonal" else None
    for idx, (plane, ref) in zip(chosen, results):
        frames[idx] = frames[idx].with_luma(plane)
        if reference is not None:
            reference.add(idx, ref)
    out = seq.replace_frames(frames)
    report = MetricsReport(rows=frame_psnr_rows(seq, out, chosen), frames_used=tuple(chosen))
    return EmbedResult(out, reference, tuple(chosen), cap, int(bits.size), report)


class _Reader:
    """Per-frame bit extraction with caching, so realignment scans and
    repeated header reads stay cheap."""

    def __init__(self, seq, config, reference):
        self.seq = seq
        self.config = config
        self.reference = reference
        self.cap = capacity(config.scheme, seq.width, seq.height)
        self._cache = {}

    def read(self, frame: int, nbits: int, anchor: int | None = None) -> np.ndarray:
        key = (frame, anchor)
        have = self._cache.get(key)
        if have is not None and have.size >= nbits:
            return have[:nbits]
        luma = self.seq.frames[frame].y
        cfg = self.config
        if cfg.scheme == "diagonal":
            ref = self.reference.frames[anchor]
            bits = extract_diag_frame(luma, ref, cfg.alpha)
        else:
            start = 0 if have is None else have.size
            fn = extract_block_frame if cfg.scheme == "block" else extract_dwt_frame
            more = fn(luma, nbits - start, cfg.delta, start=start)
            bits = more if have is None else np.concatenate([have, more])
        self._cache[key] = bits
        return bits[:nbits]


def _majority(rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    ones = rows.sum(axis=0) * 2
    n = rows.shape[0]
    # ties go to the first contributing frame
    return np.where(ones > n, 1, np.where(ones < n, 0, rows[0])).astype(np.uint8)


def _offsets(budget: int):
    yield 0
    for d in range(1, budget + 1):
        yield -d
        yield d


def _extract(seq, key, config, reference, expected_dims):
    if len(seq) == 0:
        raise ExtractionFailedError("video has no frames")
    if config.scheme == "diagonal":
        if reference is None:
            raise SemiBlindError(
                "the diagonal scheme is semi-blind: pass the .wmref sidecar written at embed time"
            )
        anchors = sorted(reference.frames)
    else:
        anchors = plan_frames(seq, key, config)
    reader = _Reader(seq, config, reference)
    n = len(seq)

    def header_ok(bits):
        tag, w, h = parse_header(bits)
        if tag != key.check_tag or w < 1 or h < 1:
            return False
        if payload_length(w, h) > reader.cap:
            return False
        return expected_dims is None or (w, h) == tuple(expected_dims)

    def header_len(bits):
        _, w, h = parse_header(bits)
        return payload_length(w, h)

    def payload_bits(sources):
        # sources: (frame, anchor) pairs already known to carry the tag
        head = _majority([reader.read(f, HEADER_BITS, a) for f, a in sources])
        need = header_len(head)
        return _majority([reader.read(f, need, a) for f, a in sources])

    # 1. majority over the planned frames at their nominal positions
    direct = [(a, a) for a in anchors if a < n]
    if direct:
        head = _majority([reader.read(f, HEADER_BITS, a) for f, a in direct])
        if header_ok(head):
            return payload_bits(direct), direct

    # 2. realignment: any frame near an anchor whose own tag verifies
    verified, seen = [], set()
    for a in anchors:
        for d in _offsets(config.realign_budget):
            f = a + d
            if not 0 <= f < n or f in seen:
                continue
            if header_ok(reader.read(f, HEADER_BITS, a)):
                verified.append((f, a))
                seen.add(f)
                break
    if verified:
        return payload_bits(verified), verified
    if not direct and not any(0 <= a < n for a in anchors):
        raise ExtractionFailedError("no candidate host frame survives in this video")
    raise AuthenticationError("check tag mismatch: wrong key or watermark destroyed")


def extract_video(seq: VideoSequence, key: KeyMaterial, config: EmbedConfig | None = None,
                  expected_dims=None, reference: DiagonalReference | None = None,
                  trials: TrialStore | None = None, asset_id: str | None = None,
                  original_mark: WatermarkImage | None = None):
    """Recover the watermark; returns ``(WatermarkImage, MetricsReport)``.

    With ``trials`` and ``asset_id`` the attempt is charged against the
    asset's trial budget: a tag mismatch counts as a failure, and a locked
    asset refuses extraction outright.
    """
    config = config or EmbedConfig()
    if trials is None:
        return _finish(*_extract(seq, key, config, reference, expected_dims), original_mark, None)
    if asset_id is None:
        raise ParameterError("asset_id is required when a trial store is used")
    with trials.session() as table:
        state = table.get(asset_id, TrialState(asset_id))
        if state.locked:
            raise LockoutError(
                f"asset {asset_id} is locked after {state.failures} failed key attempts"
            )
        try:
            bits, used = _extract(seq, key, config, reference, expected_dims)
        except AuthenticationError:
            table[asset_id] = check_trial(state, False)
            raise
        table[asset_id] = state = check_trial(state, True)
    return _finish(bits, used, original_mark, state)


def _finish(bits, used, original_mark, state):
    _, mark = parse_payload(bits)
    report = MetricsReport(frames_used=tuple(f for f, _ in used), trial=state)
    if original_mark is not None and original_mark.bits.shape == mark.bits.shape:
        report.nc = nc(original_mark, mark)
        report.ber = ber(original_mark, mark)
    return mark, report
