"""``.wmref`` sidecar holding the diagonal scheme's extraction reference.

Line 1 is ``WMREF1 <scheme> <delta>``; each further line is
``<frame_index> <K> <s1> ... <sK>`` with 17 significant digits, enough to
round-trip a float64 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError

MAGIC = "WMREF1"
SUFFIX = ".wmref"


@dataclass
class DiagonalReference:
    scheme: str = "diagonal"
    delta: float = 16.0
    frames: dict = field(default_factory=dict)

    def add(self, index: int, values) -> None:
        vals = np.asarray(values, dtype=np.float64)
        if np.any(vals < 0) or np.any(np.diff(vals) > 0):
            raise FormatError("reference singular values must be non-negative and non-increasing")
        self.frames[int(index)] = vals

    def __eq__(self, other):
        if not isinstance(other, DiagonalReference):
            return NotImplemented
        return (
            self.scheme == other.scheme
            and self.delta == other.delta
            and self.frames.keys() == other.frames.keys()
            and all(np.array_equal(self.frames[k], other.frames[k]) for k in self.frames)
        )

    def dumps(self) -> str:
        lines = [f"{MAGIC} {self.scheme} {self.delta!r}"]
        for idx in sorted(self.frames):
            vals = self.frames[idx]
            lines.append(" ".join([str(idx), str(vals.size)] + [f"{v:.17g}" for v in vals]))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "DiagonalReference":
        lines = [l for l in text.splitlines() if l.strip()]
        if not lines:
            raise FormatError("empty sidecar")
        head = lines[0].split()
        if len(head) != 3 or head[0] != MAGIC:
            raise FormatError("not a WMREF1 sidecar")
        try:
            ref = cls(scheme=head[1], delta=float(head[2]))
        except ValueError:
            raise FormatError(f"bad sidecar delta {head[2]!r}") from None
        for lineno, line in enumerate(lines[1:], 2):
            toks = line.split()
            try:
                idx, k = int(toks[0]), int(toks[1])
                vals = [float(t) for t in toks[2:]]
            except (ValueError, IndexError):
                raise FormatError(f"sidecar line {lineno} is malformed") from None
            if k != len(vals) or idx < 0:
                raise FormatError(f"sidecar line {lineno}: expected {k} values, got {len(vals)}")
            ref.add(idx, vals)
        return ref

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "DiagonalReference":
        with open(path, encoding="ascii") as fh:
            return cls.loads(fh.read())
