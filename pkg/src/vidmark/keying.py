"""Key schedule, stratified frame selection and the extraction trial limiter.

FNV-1a-64 and splitmix64 give bit-exact determinism across platforms.
Neither is a cryptographic primitive: the key provides obscurity, not
strength.
"""

from __future__ import annotations

import fcntl
import os
from contextlib import contextmanager
from dataclasses import dataclass, replace

from . import _backend
from .errors import FormatError, ParameterError

MASK64 = (1 << 64) - 1
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
GOLDEN = 0x9E3779B97F4A7C15
MAX_FAILURES = 3
DEFAULT_TRIALS_PATH = ".wm_trials"


def fnv1a64(data: bytes) -> int:
    return _backend.kernel().fnv1a64_update(FNV_OFFSET, bytes(data))


def prng_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(next_state, value)``."""
    state = (state + GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class SplitMix64:
    """Stateful wrapper around :func:`prng_next`."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, value = prng_next(self.state)
        return value

    def uniform(self) -> float:
        """Float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def split(self, index: int) -> "SplitMix64":
        """Independent substream keyed by ``index``."""
        _, seed = prng_next(self.state ^ ((index * 0xD1B54A32D192ED03) & MASK64))
        return SplitMix64(seed)


@dataclass(frozen=True)
class KeyMaterial:
    seed: int
    check_tag: int


def derive_key(passphrase) -> KeyMaterial:
    if isinstance(passphrase, str):
        passphrase = passphrase.encode("utf-8")
    seed = fnv1a64(bytes(passphrase))
    _, first = prng_next(seed)
    return KeyMaterial(seed=seed, check_tag=first & 0xFFFFFFFF)


@dataclass(frozen=True)
class SelectionPlan:
    frame_indices: tuple
    total_frames: int

    def __iter__(self):
        return iter(self.frame_indices)

    def __len__(self):
        return len(self.frame_indices)


def stratum(i: int, total: int, m: int) -> tuple[int, int]:
    return i * total // m, (i + 1) * total // m


def select_frames(key: KeyMaterial, total_frames: int, m: int, stream: int = 0) -> SelectionPlan:
    """One key-driven frame per stratum of ``total_frames / m`` frames.

    The draw is a fraction of the stratum width, so when frames are dropped
    the recomputed plan moves proportionally instead of jumping.
    """
    if m < 1 or m > total_frames:
        raise ParameterError(
            f"cannot select {m} frames from a {total_frames}-frame range"
        )
    # skip the draw that produced the check tag
    rng = SplitMix64(key.seed)
    rng.next_u64()
    rng = rng.split(stream)
    out = []
    for i in range(m):
        lo, hi = stratum(i, total_frames, m)
        out.append(lo + int(rng.uniform() * (hi - lo)))
    return SelectionPlan(tuple(out), total_frames)


# ----------------------------------------------------------- trial limiter


@dataclass(frozen=True)
class TrialState:
    asset_id: str
    failures: int = 0
    locked: bool = False


def check_trial(state: TrialState, key_ok: bool) -> TrialState:
    if state.locked:
        return state
    if key_ok:
        return replace(state, failures=0)
    failures = min(state.failures + 1, MAX_FAILURES)
    return replace(state, failures=failures, locked=failures >= MAX_FAILURES)


def asset_digest(data: bytes) -> str:
    return f"{fnv1a64(data):016x}"


def asset_digest_file(path) -> str:
    update = _backend.kernel().fnv1a64_update
    h = FNV_OFFSET
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h = update(h, chunk)
    return f"{h:016x}"


class TrialStore:
    """Sidecar file of ``<asset_id> <failures> <locked:0|1>`` lines.

    :meth:`session` holds an exclusive ``flock`` for its whole duration, so
    concurrent extractions of the same asset serialize.
    """

    def __init__(self, path=None):
        self.path = os.fspath(
            path or os.environ.get("WM_TRIALS_PATH") or DEFAULT_TRIALS_PATH
        )

    @staticmethod
    def _parse(text: str) -> dict:
        table = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3 or parts[2] not in ("0", "1") or not parts[1].isdigit():
                raise FormatError(f"{lineno}: malformed trial-state line {line!r}")
            failures = min(int(parts[1]), MAX_FAILURES)
            locked = parts[2] == "1" or failures >= MAX_FAILURES
            table[parts[0]] = TrialState(parts[0], failures, locked)
        return table

    @contextmanager
    def session(self):
        with open(self.path, "a+", encoding="ascii") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                fh.seek(0)
                table = self._parse(fh.read())
                try:
                    yield table
                finally:
                    # persist even when the body raised (a failed trial is recorded then)
                    fh.seek(0)
                    fh.truncate()
                    for aid in sorted(table):
                        st = table[aid]
                        fh.write(f"{aid} {st.failures} {int(st.locked)}\n")
                    fh.flush()
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def get(self, asset_id: str) -> TrialState:
        with self.session() as table:
            return table.get(asset_id, TrialState(asset_id))

    def record(self, asset_id: str, key_ok: bool) -> TrialState:
        with self.session() as table:
            st = check_trial(table.get(asset_id, TrialState(asset_id)), key_ok)
            table[asset_id] = st
            return st
