"""Compiled vs numpy kernel timings for the hot paths.

    python3 benchmarks/bench_svd.py [--repeat N]

Each case runs on both backends that are importable and prints the best
wall time and the speedup of the compiled kernel.
"""

import argparse
import time

import numpy as np

from vidmark import _backend, keying, linalg
from vidmark.synthetic import random_mark, synthetic_video
from vidmark.watermark import EmbedConfig, embed_video


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(rng):
    blocks = rng.uniform(0, 255, (256, 8, 8))
    frame = rng.uniform(0, 255, (128, 128))
    small = rng.standard_normal((1000, 16, 12))
    video = synthetic_video(30, 128, 128, seed=1)
    mark = random_mark(8, 8, 1)
    key = keying.derive_key("bench")
    blob = rng.integers(0, 256, 1 << 20, dtype=np.uint8).tobytes()

    def fnv():
        return _backend.kernel().fnv1a64_update(keying.FNV_OFFSET, blob)

    return [
        ("svd 256 blocks 8x8", lambda b: linalg.svd_batch(blocks, backend=b)),
        ("svd 1000 random 16x12", lambda b: linalg.svd_batch(small, backend=b)),
        ("svd frame 128x128", lambda b: linalg.svd(frame, backend=b)),
        ("embed block, 30 frames", lambda b: _with(b, lambda: embed_video(video, mark, key, EmbedConfig()))),
        ("fnv1a64 1 MiB", lambda b: _with(b, fnv)),
    ]


def _with(backend, fn):
    old = _backend.BACKEND
    _backend.BACKEND = backend
    try:
        return fn()
    finally:
        _backend.BACKEND = old


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = _backend.available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'case':28s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in cases(np.random.default_rng(0)):
        t = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
        row = f"{name:28s}" + "".join(f"{t[b] * 1e3:10.1f}ms" for b in backends)
        if "cython" in t:
            row += f"  {t['python'] / t['cython']:8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
