"""Acceptance criteria, one check per criterion.

Run under pytest (each criterion is a test, and a PASS/FAIL line per
criterion is printed in the terminal summary) or directly:

    python3 tests/test_acceptance.py
"""

from __future__ import annotations

import csv
import io
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from vidmark import linalg
from vidmark.attacks import AttackSpec, apply_attack
from vidmark.cli import main as cli_main
from vidmark.errors import AuthenticationError, VidmarkError
from vidmark.keying import derive_key
from vidmark.media_io import (
    RGBImage,
    Plane,
    WatermarkImage,
    parse_y4m,
    read_pnm,
    write_pnm,
    write_y4m,
    write_y4m_file,
    write_pnm_file,
)
from vidmark.synthetic import random_mark, synthetic_video
from vidmark.transforms import haar_forward, haar_inverse
from vidmark.watermark import EmbedConfig, embed_video, extract_video
from vidmark.watermark.payload import HEADER_BITS, parse_header
from vidmark.watermark.schemes import extract_block_frame

HERE = Path(__file__).parent
REPORTS = HERE.parent / "reports"
RESULTS: list[tuple[str, bool, str]] = []


def _matrix(name):
    return linalg.parse_matrix_text((HERE / "data" / name).read_text())


# ----------------------------------------------------------------- checks


def c1_svd_oracle():
    t = time.perf_counter()
    fa = linalg.svd(_matrix("matrix_a.txt"))
    fb = linalg.svd(_matrix("matrix_b.txt"))
    dt = time.perf_counter() - t
    ok = (
        np.all(np.abs(fa.s[:3] - [15.423896, 0.557828, 0.028258]) <= 1e-5)
        and np.all(fa.s[3:] <= 1e-5)
        and abs(fa.s[0] - 15.423896392011654) <= 1e-6
        and np.all(np.abs(fb.s[:3] - [19.027182, 0.291300, 0.066064]) <= 1e-5)
        and abs(fb.s[0] - 19.027182027128866) <= 1e-6
        and dt < 1.0
    )
    detail = (f"A: s={np.round(fa.s[:3], 7).tolist()} |2-norm err|={abs(fa.s[0] - 15.423896392011654):.2e}; "
              f"B: s={np.round(fb.s[:3], 7).tolist()} |2-norm err|={abs(fb.s[0] - 19.027182027128866):.2e}; "
              f"{dt * 1e3:.1f} ms")
    return ok, detail


def c2_svd_properties(n=1000):
    rng = np.random.default_rng(2)
    worst_rec = worst_orth = 0.0
    ordered = True
    t = time.perf_counter()
    for _ in range(n):
        m, k = rng.integers(1, 17, 2)
        a = rng.standard_normal((m, k)) * 10 ** rng.uniform(-3, 3)
        f = linalg.svd(a)
        r = min(m, k)
        worst_rec = max(worst_rec, np.linalg.norm(a - linalg.reconstruct(f)) / max(1.0, np.linalg.norm(a)))
        worst_orth = max(worst_orth, np.max(np.abs(f.u.T @ f.u - np.eye(r))),
                         np.max(np.abs(f.v.T @ f.v - np.eye(r))))
        ordered &= bool(np.all(f.s >= 0) and np.all(np.diff(f.s) <= 0))
    dt = time.perf_counter() - t
    ok = worst_rec <= 1e-9 and worst_orth <= 1e-9 and ordered and dt < 10
    return ok, f"{n} matrices: residual {worst_rec:.1e}, orthonormality {worst_orth:.1e}, ordered={ordered}, {dt:.2f} s"


def c3_dwt(n=1000):
    rng = np.random.default_rng(3)
    worst_rec = worst_energy = 0.0
    for _ in range(n):
        h, w = 2 * rng.integers(1, 33, 2)
        p = rng.uniform(0, 255, (h, w))
        b = haar_forward(p)
        worst_rec = max(worst_rec, np.max(np.abs(haar_inverse(b) - p)))
        e = sum(np.sum(x * x) for x in (b.ll, b.lh, b.hl, b.hh))
        worst_energy = max(worst_energy, abs(e - np.sum(p * p)) / np.sum(p * p))
    ok = worst_rec <= 1e-12 and worst_energy <= 1e-9
    return ok, f"{n} planes: max sample error {worst_rec:.1e}, energy error {worst_energy:.1e}"


# criterion 4 configuration: 3 host frames per scene (majority of 3)
C4_FRAMES_PER_SCENE = 3
_C4_CACHE = {}


def _c4_runs():
    if _C4_CACHE:
        return _C4_CACHE
    key = derive_key("acceptance")
    mark = random_mark(8, 8, seed=8)
    t = time.perf_counter()
    for scheme, kind in (("block", "smooth"), ("diagonal", "conditioned"), ("dwt-block", "smooth")):
        # through the container, as a file would be
        video = parse_y4m(write_y4m(synthetic_video(30, 128, 128, seed=4, kind=kind)))
        cfg = EmbedConfig(scheme=scheme, delta=16.0, frames_per_scene=C4_FRAMES_PER_SCENE)
        res = embed_video(video, mark, key, cfg)
        marked = parse_y4m(write_y4m(res.video))
        got, rep = extract_video(marked, key, cfg, expected_dims=(8, 8),
                                 reference=res.reference, original_mark=mark)
        _C4_CACHE[scheme] = (rep.ber, rep.nc, res.report.mean_psnr, got == mark)
    _C4_CACHE["time"] = time.perf_counter() - t
    return _C4_CACHE


def c4_round_trip():
    runs = _c4_runs()
    schemes = ("block", "diagonal", "dwt-block")
    ok = all(runs[s][0] == 0.0 and runs[s][1] == 1.0 and runs[s][3] for s in schemes) and runs["time"] < 30
    detail = "; ".join(f"{s}: BER={runs[s][0]:g} NC={runs[s][1]:g}" for s in schemes)
    return ok, f"{detail}; {runs['time']:.2f} s"


def c5_psnr():
    runs = _c4_runs()
    schemes = ("block", "diagonal", "dwt-block")
    ok = all(runs[s][2] >= 38.0 for s in schemes)
    return ok, "; ".join(f"{s}: {runs[s][2]:.2f} dB" for s in schemes) + " (target >= 38 dB)"


def c6_frame_drop(trials=10):
    failures = []
    for seed in range(trials):
        key = derive_key(f"drop-{seed}")
        mark = random_mark(8, 8, seed)
        cfg = EmbedConfig(frames_per_scene=4)
        res = embed_video(synthetic_video(40, 128, 128, seed=seed), mark, key, cfg)
        rng = np.random.default_rng(seed)
        keep = int(rng.choice(res.frames))
        others = [i for i in range(40) if i not in res.frames]
        drop = [f for f in res.frames if f != keep] + rng.choice(others, 10, replace=False).tolist()
        attacked = apply_attack(res.video, AttackSpec("frame_drop", indices=drop))
        try:
            got, rep = extract_video(attacked, key, cfg, original_mark=mark)
            if rep.ber != 0.0:
                failures.append(seed)
        except VidmarkError:
            failures.append(seed)
    return not failures, (f"{trials} videos (40 frames, 4 hosts, 3 hosts + 10 others dropped): "
                          f"{trials - len(failures)} recovered with BER 0")


C7_TARGETS = [
    (AttackSpec("gaussian_noise", sigma=2, seed=11), "ber", 0.05),
    (AttackSpec("blur"), "ber", 0.20),
    (AttackSpec("jpeg_quantize", quality=75), "ber", 0.15),
    (AttackSpec("crop", keep=0.75), "tag", None),
]


def c7_attacks(seeds=5):
    rows = []
    ok = True
    for spec, kind, limit in C7_TARGETS:
        bers, tags = [], 0
        for seed in range(seeds):
            key = derive_key(f"attack-{seed}")
            mark = random_mark(8, 8, 100 + seed)
            cfg = EmbedConfig(scheme="block", delta=16.0, frames_per_scene=4)
            res = embed_video(synthetic_video(30, 128, 128, seed=50 + seed), mark, key, cfg)
            try:
                got, _ = extract_video(apply_attack(res.video, spec), key, cfg, expected_dims=(8, 8))
                tags += 1
                bers.append(float(np.mean(got.bits != mark.bits)))
            except AuthenticationError:
                bers.append(1.0)
        worst = max(bers)
        passed = tags == seeds if kind == "tag" else worst <= limit
        ok &= passed
        rows.append([spec.label(), "tag verifies" if kind == "tag" else f"BER <= {limit:g}",
                     f"{worst:.4f}", f"{tags}/{seeds}", "PASS" if passed else "FAIL"])
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["attack", "target", "worst_ber", "tag_verified", "result"])
    wr.writerows(rows)
    REPORTS.mkdir(exist_ok=True)
    (REPORTS / "attack_robustness.csv").write_text(buf.getvalue())
    return ok, "; ".join(f"{r[0]}: worst BER {r[2]}, tag {r[3]}" for r in rows)


def _quiet_cli(*argv):
    import contextlib

    with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
        return cli_main([str(a) for a in argv])


def c8_trials(wrong_keys=1000):
    with tempfile.TemporaryDirectory() as d:
        d = Path(d)
        write_y4m_file(synthetic_video(30, 128, 128, seed=9), d / "a.y4m")
        write_pnm_file(random_mark(8, 8, 9), d / "w.pbm")
        _quiet_cli("embed", "--in", d / "a.y4m", "--out", d / "b.y4m", "--mark", d / "w.pbm", "--key", "right")
        ext = ["extract", "--in", d / "b.y4m", "--out", d / "r.pbm", "--trials", d / "trials"]
        reset = [_quiet_cli(*ext, "--key", "w1"), _quiet_cli(*ext, "--key", "w2"),
                 _quiet_cli(*ext, "--key", "right"), _quiet_cli(*ext, "--key", "w3")]
        lock = [_quiet_cli(*ext, "--key", f"x{i}") for i in range(3)] + [_quiet_cli(*ext, "--key", "right")]
        reset_ok = reset == [3, 3, 0, 3]
        lock_ok = lock == [3, 3, 4, 4] or lock == [3, 3, 3, 4]
        # w3 left one failure: x0, x1 make it 3 and lock; the rest see exit 4
        from vidmark.media_io import read_y4m_file

        video = read_y4m_file(d / "b.y4m")
    # false positives: the tag every frame of the video carries, against random keys
    tags = {parse_header(extract_block_frame(f.y, HEADER_BITS))[0] for f in video.frames}
    rng = np.random.default_rng(8)
    matches = 0
    for _ in range(wrong_keys):
        k = derive_key(rng.integers(0, 256, 16, dtype=np.uint8).tobytes())
        matches += k.check_tag in tags
    # and the full extraction path for a sample of them
    for i in range(25):
        try:
            extract_video(video, derive_key(f"random-{i}"))
            matches += 1
        except AuthenticationError:
            pass
    ok = reset_ok and lock_ok and matches == 0
    return ok, (f"exit codes wrong/wrong/right/wrong = {reset}; 3 more wrong then right = {lock}; "
                f"{wrong_keys} random keys vs {len(tags)} frame tags: {matches} matches")


def c9_determinism():
    with tempfile.TemporaryDirectory() as d:
        d = Path(d)
        write_y4m_file(synthetic_video(30, 128, 128, seed=12), d / "a.y4m")
        write_y4m_file(synthetic_video(30, 128, 128, seed=12, kind="conditioned"), d / "c.y4m")
        write_pnm_file(random_mark(8, 8, 12), d / "w.pbm")
        same = []
        for scheme, src in (("block", "a.y4m"), ("dwt-block", "a.y4m"), ("diagonal", "c.y4m")):
            outs = []
            for i, workers in enumerate((1, 4, 1)):
                out = d / f"{scheme}-{i}.y4m"
                _quiet_cli("embed", "--in", d / src, "--out", out, "--mark", d / "w.pbm", "--key", "k",
                           "--scheme", scheme, "--frames-per-scene", "4", "--workers", workers)
                side = Path(str(out) + ".wmref")
                outs.append(out.read_bytes() + (side.read_bytes() if side.exists() else b""))
            same.append(len(set(outs)) == 1)
        for kind, extra in (("gaussian-noise", ["--sigma", "5"]), ("frame-drop", ["--rate", "0.3"]),
                            ("jpeg-quantize", ["--quality", "40"]), ("rotate", ["--degrees", "3"])):
            outs = []
            for i in range(2):
                out = d / f"att-{kind}-{i}.y4m"
                _quiet_cli("attack", "--in", d / "a.y4m", "--out", out, "--kind", kind, "--seed", "42", *extra)
                outs.append(out.read_bytes())
            same.append(outs[0] == outs[1])
    return all(same), f"{sum(same)}/{len(same)} embed/attack reruns byte-identical (embed with 1 and 4 workers)"


def _mutate(data: bytes, rng) -> bytes:
    b = bytearray(data)
    for _ in range(int(rng.integers(1, 5))):
        op = rng.integers(0, 6)
        pos = int(rng.integers(0, len(b) + 1)) if b else 0
        if op == 0 and b:
            b[min(pos, len(b) - 1)] = int(rng.integers(0, 256))
        elif op == 1:
            b[pos:pos] = rng.integers(0, 256, int(rng.integers(1, 8)), dtype=np.uint8).tobytes()
        elif op == 2:
            del b[pos:pos + int(rng.integers(1, 16))]
        elif op == 3:
            b = b[:pos]
        elif op == 4 and b:
            # digits are the interesting bytes in headers
            b[min(pos, len(b) - 1)] = int(rng.choice(list(b"0123456789 \n#-+:")))
        else:
            b += rng.integers(0, 256, int(rng.integers(1, 64)), dtype=np.uint8).tobytes()
    return bytes(b)


def c10_fuzz(n=12000):
    rng = np.random.default_rng(10)
    seeds_y4m = [
        write_y4m(synthetic_video(2, 8, 8, seed=1)),
        write_y4m(synthetic_video(1, 6, 4, seed=2, subsampling="444")),
        b"YUV4MPEG2 W4 H2 F30000:1001 It A1:1 C420jpeg XYSCSS=420JPEG\nFRAME Ixyz\n" + bytes(12),
    ]
    mark = WatermarkImage(rng.integers(0, 2, (5, 11)))
    plane = Plane(rng.integers(0, 256, (4, 3)))
    rgb = RGBImage(*(Plane(rng.integers(0, 256, (3, 2))) for _ in range(3)))
    seeds_pnm = [write_pnm(mark, "P1"), write_pnm(mark, "P4"), write_pnm(plane, "P2"),
                 write_pnm(plane, "P5"), write_pnm(rgb, "P3"), write_pnm(rgb, "P6"),
                 b"P2\n# comment\n2 1\n255\n0 255\n"]
    crashes, rejected, accepted = [], 0, 0
    for i in range(n):
        y4m = i % 2 == 0
        pool = seeds_y4m if y4m else seeds_pnm
        data = _mutate(pool[int(rng.integers(0, len(pool)))], rng)
        try:
            (parse_y4m if y4m else read_pnm)(data)
            accepted += 1
        except VidmarkError:
            rejected += 1
        except Exception as exc:  # noqa: BLE001
            crashes.append((type(exc).__name__, data[:40]))
    ok = not crashes and n >= 10_000
    return ok, f"{n} mutated inputs: {accepted} parsed, {rejected} structured rejections, {len(crashes)} crashes"


CRITERIA = [
    ("1 SVD oracle", c1_svd_oracle),
    ("2 SVD properties", c2_svd_properties),
    ("3 DWT reconstruction", c3_dwt),
    ("4 no-attack round trip", c4_round_trip),
    ("5 imperceptibility", c5_psnr),
    ("6 frame-drop survival", c6_frame_drop),
    ("7 attack robustness", c7_attacks),
    ("8 trial limiter", c8_trials),
    ("9 determinism", c9_determinism),
    ("10 format safety", c10_fuzz),
]


def _record(name, fn):
    ok, detail = fn()
    RESULTS.append((name, bool(ok), detail))
    return ok, detail


@pytest.mark.parametrize("name, fn", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, fn):
    ok, detail = _record(name, fn)
    assert ok, f"criterion {name}: {detail}"


def format_line(name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {name}: {detail}"


if __name__ == "__main__":
    failed = 0
    for name, fn in CRITERIA:
        ok, detail = _record(name, fn)
        failed += not ok
        print(format_line(name, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
