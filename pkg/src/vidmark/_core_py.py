"""Pure-Python/numpy kernels, the fallback for the compiled ``_core``.

The Jacobi kernels share one contract::

    jacobi_sweeps(wt, vt, pairs_p, pairs_q, round_len, tol, max_sweeps) -> sweeps

``wt`` is ``(B, n, m)``: row ``j`` of ``wt[b]`` is column ``j`` of the working
matrix.  ``vt`` is ``(B, n, n)`` holding the accumulated right rotations the
same way.  Both are updated in place.  The pair schedule is a round-robin
tournament flattened round after round; every round has ``round_len``
disjoint pairs, so a round can be applied as one vectorised step here while
the compiled kernel walks the same pairs one at a time.
"""

import numpy as np


def jacobi_sweeps(wt, vt, pairs_p, pairs_q, round_len, tol, max_sweeps):
    npairs = len(pairs_p)
    if npairs == 0:
        return 0
    rounds = [
        (pairs_p[i:i + round_len], pairs_q[i:i + round_len])
        for i in range(0, npairs, round_len)
    ]
    sweeps = 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        while sweeps < max_sweeps:
            sweeps += 1
            rotated = False
            for p, q in rounds:
                wp = wt[:, p, :]
                wq = wt[:, q, :]
                alpha = np.einsum("bkm,bkm->bk", wp, wp)
                beta = np.einsum("bkm,bkm->bk", wq, wq)
                gamma = np.einsum("bkm,bkm->bk", wp, wq)
                rot = (gamma != 0.0) & (np.abs(gamma) > tol * np.sqrt(alpha * beta))
                if not rot.any():
                    continue
                rotated = True
                zeta = np.where(rot, (beta - alpha) / (2.0 * gamma), 0.0)
                t = np.where(zeta >= 0.0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = np.where(rot, 1.0 / np.sqrt(1.0 + t * t), 1.0)[..., None]
                s = np.where(rot, c[..., 0] * t, 0.0)[..., None]
                wt[:, p, :] = c * wp - s * wq
                wt[:, q, :] = s * wp + c * wq
                vp = vt[:, p, :]
                vq = vt[:, q, :]
                vt[:, p, :] = c * vp - s * vq
                vt[:, q, :] = s * vp + c * vq
            if not rotated:
                break
    return sweeps


def fnv1a64_update(h, data):
    """Continue an FNV-1a-64 hash over ``data``."""
    mask = (1 << 64) - 1
    for byte in bytes(data):
        h = ((h ^ byte) * 0x100000001B3) & mask
    return h
