"""Thin SVD by one-sided (Hestenes) Jacobi, plus the debug matrix text format.

The rotation sweeps run in the compiled ``_core`` kernel when it is built
and in a vectorised numpy kernel otherwise (see ``_backend``).  Everything around the
sweeps (scaling, ordering, null-space completion, signs) is shared.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from .errors import DomainError, FormatError

TOL = 1e-12
MAX_SWEEPS = 30
# singular values below this (relative to the largest entry) are treated as exact zeros
_NULL = 1e-150

BACKEND = _backend.BACKEND


def available_backends():
    return _backend.available()


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """``a = u @ diag(s) @ v.T`` with ``u`` m x k, ``v`` n x k, k = min(m, n)."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def shape(self):
        return self.u.shape[0], self.v.shape[0]


def as_matrix(a) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix has non-finite entries")
    return arr


@lru_cache(maxsize=64)
def _schedule(n: int):
    """Round-robin pairing of ``n`` columns: n' - 1 rounds of n'/2 disjoint pairs."""
    players = list(range(n + (n % 2)))
    size = len(players)
    pp, qq = [], []
    for _ in range(size - 1):
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < n and b < n:
                pp.append(min(a, b))
                qq.append(max(a, b))
        players = [players[0], players[-1]] + players[1:-1]
    round_len = n // 2
    p = np.array(pp, dtype=np.int_)
    q = np.array(qq, dtype=np.int_)
    p.setflags(write=False)
    q.setflags(write=False)
    return p, q, max(round_len, 1)


def _complete(u: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Fill the columns of ``u`` not flagged ``valid`` with an orthonormal
    completion built from standard basis vectors."""
    m, k = u.shape
    basis = [u[:, j] for j in range(k) if valid[j]]
    for j in range(k):
        if valid[j]:
            continue
        best, best_norm = None, -1.0
        for i in range(m):
            e = np.zeros(m)
            e[i] = 1.0
            for _ in range(2):
                for b in basis:
                    e -= (b @ e) * b
            nrm = np.linalg.norm(e)
            if nrm > best_norm + 1e-12:
                best, best_norm = e, nrm
        best = best / best_norm
        u[:, j] = best
        basis.append(best)
    return u


def svd_batch(a, backend: str | None = None):
    """Thin SVD of every matrix in a ``(B, m, n)`` stack.

    Returns ``(u, s, v)`` with shapes ``(B, m, k)``, ``(B, k)``, ``(B, n, k)``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3 or a.shape[1] < 1 or a.shape[2] < 1:
        raise DomainError(f"expected a (B, m, n) stack, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    kernel = _backend.kernel(backend).jacobi_sweeps
    nb, m, n = a.shape
    wide = m < n
    if wide:
        a = a.transpose(0, 2, 1)
        m, n = n, m
    if nb == 0:
        return np.zeros((0, m, n)), np.zeros((0, n)), np.zeros((0, n, n))

    scale = np.abs(a).max(axis=(1, 2))
    safe = np.where(scale > 0, scale, 1.0)
    wt = np.ascontiguousarray(a.transpose(0, 2, 1) / safe[:, None, None])
    vt = np.repeat(np.eye(n)[None], nb, axis=0)
    p, q, round_len = _schedule(n)
    kernel(wt, vt, p, q, round_len, TOL, MAX_SWEEPS)

    norms = np.sqrt(np.einsum("bjm,bjm->bj", wt, wt))
    order = np.argsort(-norms, axis=1, kind="stable")
    s = np.take_along_axis(norms, order, axis=1)
    wt = np.take_along_axis(wt, order[:, :, None], axis=1)
    vt = np.take_along_axis(vt, order[:, :, None], axis=1)
    valid = s > _NULL
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(valid[:, :, None], wt / np.where(valid, s, 1.0)[:, :, None], 0.0)
    u = u.transpose(0, 2, 1).copy()
    v = vt.transpose(0, 2, 1).copy()
    s = np.where(valid, s, 0.0)
    for b in np.flatnonzero(~valid.all(axis=1)):
        _complete(u[b], valid[b])
    s *= scale[:, None]

    if wide:
        u, v = v, u
    # largest-magnitude entry of each u column is made positive
    idx = np.abs(u).argmax(axis=1)
    pivot = np.take_along_axis(u, idx[:, None, :], axis=1)
    sign = np.where(pivot < 0, -1.0, 1.0)
    return u * sign, s, v * sign


def svd(a, backend: str | None = None) -> SvdFactors:
    a = as_matrix(a)
    u, s, v = svd_batch(a[None], backend=backend)
    return SvdFactors(u[0], s[0], v[0])


def reconstruct(f: SvdFactors) -> np.ndarray:
    u, s, v = np.asarray(f.u), np.asarray(f.s), np.asarray(f.v)
    if u.ndim != 2 or v.ndim != 2 or s.ndim != 1:
        raise DomainError("malformed SVD factors")
    k = s.shape[0]
    if u.shape[1] != k or v.shape[1] != k:
        raise DomainError(
            f"factor shapes disagree: u {u.shape}, s ({k},), v {v.shape}"
        )
    return (u * s) @ v.T


def two_norm(a) -> float:
    return float(svd(a).s[0])


def singular_values(a) -> np.ndarray:
    return svd(a).s


# -------------------------------------------------------- debug text format


def parse_matrix_text(text: str) -> np.ndarray:
    """One row per line, whitespace-separated decimals; blank lines and
    ``#`` comments are ignored."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    if not rows:
        raise FormatError("empty matrix")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise FormatError(
                f"row {i + 1} has {len(r)} entries, expected {width}"
            )
    try:
        return as_matrix(rows)
    except DomainError as exc:
        raise FormatError(str(exc)) from None


def format_matrix(a, indent: str = "  ") -> str:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    # avoid printing "-0.000000"
    a = np.where(np.abs(a) < 5e-7, 0.0, a)
    return "\n".join(indent + "  ".join(f"{x:f}" for x in row) for row in a)
