"""``vidmark`` command line.

Exit codes: 0 success, 2 usage or format error, 3 authentication failure,
4 lockout, 5 internal error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import linalg
from .attacks import KINDS, AttackSpec, apply_attack
from .errors import FormatError, ParameterError, VidmarkError
from .keying import TrialStore, asset_digest_file, derive_key
from .media_io import Plane, RGBImage, WatermarkImage, read_pnm_file, read_y4m_file, write_pnm_file, write_y4m_file
from .metrics import MetricsReport, ber, ber_bar_svg, frame_psnr_rows, nc, singular_report
from .watermark import DiagonalReference, EmbedConfig, embed_video, extract_video
from .watermark.sidecar import SUFFIX

EXIT_OK, EXIT_USAGE, EXIT_AUTH, EXIT_LOCKED, EXIT_INTERNAL = 0, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"{self.prog}: error: {message}") from None


def _add_key(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--key", help="passphrase")
    g.add_argument("--key-file", help="file whose raw bytes are the key")


def _add_config(p):
    p.add_argument("--scheme", default="block", help="block, diagonal or dwt-block")
    p.add_argument("--delta", type=float, default=16.0, help="QIM step (diagonal: alpha = delta/1000)")
    p.add_argument("--frames-per-scene", type=int, default=1)
    p.add_argument("--scene-threshold", type=float, default=12.0)
    p.add_argument("--workers", type=int, default=1)


def _add_attack(p, required_kind=True):
    p.add_argument("--kind", required=required_kind, help=", ".join(k.replace("_", "-") for k in KINDS))
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--rect", help="x,y,w,h kept by crop")
    p.add_argument("--keep", type=float, help="centred crop: kept fraction of each side")
    p.add_argument("--factor", type=float, default=0.5)
    p.add_argument("--degrees", type=float, default=0.0)
    p.add_argument("--rate", type=float, default=0.0)
    p.add_argument("--indices", help="comma-separated frame indices for frame-drop")
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--quality", type=int, default=75)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="vidmark", description="SVD video watermarking toolkit")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("embed", help="embed a PBM watermark into a Y4M video")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mark", required=True, help="watermark image (PBM, or PGM thresholded at 128)")
    p.add_argument("--sidecar", help=f"reference path for the diagonal scheme (default: <out>{SUFFIX})")
    _add_key(p)
    _add_config(p)

    p = sub.add_parser("extract", help="recover the watermark from a Y4M video")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True, help="recovered watermark (PBM)")
    p.add_argument("--sidecar", help="diagonal-scheme reference written at embed time")
    p.add_argument("--reference", help="original watermark, to report NC and BER")
    p.add_argument("--trials", help="trial-state file (default: $WM_TRIALS_PATH or ./.wm_trials)")
    p.add_argument("--asset-id", help="trial-state key (default: digest of the input file)")
    p.add_argument("--realign-budget", type=int, default=16)
    _add_key(p)
    _add_config(p)

    p = sub.add_parser("attack", help="apply a deterministic attack")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    _add_attack(p)

    p = sub.add_parser("evaluate", help="PSNR / NC / BER report, optionally over an attack sweep")
    p.add_argument("--original", required=True)
    p.add_argument("--marked", required=True)
    p.add_argument("--csv", help="report path (default: standard output)")
    p.add_argument("--svg", help="BER bar chart path")
    p.add_argument("--mark", help="original watermark")
    p.add_argument("--extracted", help="recovered watermark, compared with --mark")
    p.add_argument("--sweep", help="attack family and grid, e.g. gaussian-noise:sigma=0,2,5,10")
    p.add_argument("--sidecar")
    _add_key(p, required=False)
    _add_config(p)
    _add_attack(p, required_kind=False)

    p = sub.add_parser("svd", help="print the SVD of a text matrix")
    p.add_argument("matrix", help="text file, one row per line")
    return ap


# ------------------------------------------------------------------ helpers


def _key(args):
    if args.key is not None:
        return derive_key(args.key)
    with open(args.key_file, "rb") as fh:
        return derive_key(fh.read())


def _config(args) -> EmbedConfig:
    return EmbedConfig(
        scheme=args.scheme, delta=args.delta, frames_per_scene=args.frames_per_scene,
        scene_threshold=args.scene_threshold, workers=args.workers,
        realign_budget=getattr(args, "realign_budget", 16),
    )


def _read_mark(path) -> WatermarkImage:
    img = read_pnm_file(path)
    if isinstance(img, WatermarkImage):
        return img
    if isinstance(img, RGBImage):
        img = img.r
    if isinstance(img, Plane):
        # dark pixels are set bits, as in PBM
        return WatermarkImage((img.samples < 128).astype(np.uint8))
    raise FormatError(f"{path}: not an image")


def _ints(text, what, count=None):
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ParameterError(f"{what}: expected comma-separated integers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise ParameterError(f"{what}: expected {count} integers")
    return vals


def _attack_spec(args, kind=None, **override) -> AttackSpec:
    fields = dict(
        kind=kind or args.kind, sigma=args.sigma, factor=args.factor, degrees=args.degrees,
        rate=args.rate, window=args.window, quality=args.quality, seed=args.seed, keep=args.keep,
        rect=_ints(args.rect, "--rect", 4) if args.rect else None,
        indices=_ints(args.indices, "--indices") if args.indices else None,
    )
    fields.update(override)
    return AttackSpec(**fields)


def _fmt(x):
    if x is None:
        return "n/a"
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.4f}"


# ----------------------------------------------------------------- commands


def cmd_embed(args) -> int:
    seq = read_y4m_file(args.input)
    mark = _read_mark(args.mark)
    cfg = _config(args)
    res = embed_video(seq, mark, _key(args), cfg)
    write_y4m_file(res.video, args.out)
    print(f"capacity: {res.capacity} bits per frame, payload {res.payload_bits} bits")
    print("selected frames: " + " ".join(str(i) for i in res.frames))
    print(f"mean PSNR (modified frames): {_fmt(res.report.mean_psnr)} dB")
    if res.reference is not None:
        path = args.sidecar or args.out + SUFFIX
        res.reference.save(path)
        print(f"reference sidecar: {path}")
    return EXIT_OK


def cmd_extract(args) -> int:
    cfg = _config(args)
    reference = DiagonalReference.load(args.sidecar) if args.sidecar else None
    original = _read_mark(args.reference) if args.reference else None
    seq = read_y4m_file(args.input)
    store = TrialStore(args.trials)
    asset = args.asset_id or asset_digest_file(args.input)
    mark, report = extract_video(
        seq, _key(args), cfg, reference=reference, trials=store, asset_id=asset,
        original_mark=original,
    )
    write_pnm_file(mark, args.out)
    print(f"recovered {mark.width}x{mark.height} watermark from frames "
          + " ".join(str(i) for i in report.frames_used))
    if original is not None:
        if original.bits.shape != mark.bits.shape:
            print("reference watermark size differs; NC/BER not computed")
        else:
            print(f"NC = {_fmt(report.nc)}  BER = {_fmt(report.ber)}")
    return EXIT_OK


def cmd_attack(args) -> int:
    spec = _attack_spec(args)
    out = apply_attack(read_y4m_file(args.input), spec)
    write_y4m_file(out, args.out)
    print(f"{spec.label()}: {len(out)} frames written")
    return EXIT_OK


def _parse_sweep(text):
    try:
        kind, rest = text.split(":", 1)
        name, grid = rest.split("=", 1)
        values = [float(v) for v in grid.split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"--sweep: expected kind:param=v1,v2,..., got {text!r}") from None
    name = name.strip().replace("-", "_")
    allowed = {"sigma", "factor", "degrees", "rate", "window", "quality", "keep"}
    if name not in allowed or not values:
        raise ParameterError(f"--sweep: cannot sweep parameter {name!r}")
    if name in ("window", "quality"):
        values = [int(v) for v in values]
    return kind.strip(), name, values


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_evaluate(args) -> int:
    original = read_y4m_file(args.original)
    marked = read_y4m_file(args.marked)
    if args.sweep:
        return _sweep(args, original, marked)
    report = MetricsReport(rows=frame_psnr_rows(original, marked))
    if args.mark and args.extracted:
        w, w_hat = _read_mark(args.mark), _read_mark(args.extracted)
        report.nc, report.ber = nc(w, w_hat), ber(w, w_hat)
    _write(report.to_csv(), args.csv)
    if args.svg and report.ber is not None:
        _write(ber_bar_svg(["no attack"], [report.ber]), args.svg)
    if args.csv:
        print(f"mean PSNR: {_fmt(report.mean_psnr)} dB")
    return EXIT_OK


def _sweep(args, original, marked) -> int:
    import csv
    import io

    if args.key is None and args.key_file is None:
        raise ParameterError("--sweep needs --key or --key-file to extract")
    if not args.mark:
        raise ParameterError("--sweep needs --mark (the embedded watermark)")
    kind, name, values = _parse_sweep(args.sweep)
    key, cfg, mark = _key(args), _config(args), _read_mark(args.mark)
    reference = DiagonalReference.load(args.sidecar) if args.sidecar else None
    frame_psnr_rows(original, marked)  # dimension check
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["attack", "psnr_db", "nc", "ber", "status"])
    labels, bers, psnrs = [], [], []
    for v in values:
        spec = _attack_spec(args, kind=kind, **{name: v})
        attacked = apply_attack(marked, spec)
        p = None
        if len(attacked) == len(marked):
            p = MetricsReport(rows=frame_psnr_rows(marked, attacked, range(len(marked)))).mean_psnr
        try:
            got, _ = extract_video(attacked, key, cfg, expected_dims=mark.bits.shape[::-1],
                                   reference=reference)
            status = "ok"
            b = ber(mark, got) if got.bits.shape == mark.bits.shape else 1.0
            c = nc(mark, got) if got.bits.shape == mark.bits.shape else -1.0
        except VidmarkError as exc:
            if exc.exit_code != EXIT_AUTH:
                raise
            status, b, c = "tag-mismatch", 1.0, None
        labels.append(spec.label())
        bers.append(b)
        if p is not None:
            psnrs.append(p)
        wr.writerow([spec.label(), _cell(p), _cell(c), _cell(b), status])
    finite = [p for p in psnrs if not math.isinf(p)]
    mean_p = (float(np.mean(finite)) if finite else math.inf) if psnrs else None
    wr.writerow(["#aggregate", "mean_psnr", "nc", "ber", "status"])
    wr.writerow(["#aggregate", _cell(mean_p), "", _cell(float(np.mean(bers))), "sweep"])
    _write(buf.getvalue(), args.csv)
    if args.svg:
        _write(ber_bar_svg(labels, bers), args.svg)
    return EXIT_OK


def _cell(x):
    if x is None:
        return ""
    if math.isinf(x):
        return "inf"
    return f"{x:.6f}"


def cmd_svd(args) -> int:
    with open(args.matrix, encoding="utf-8") as fh:
        a = linalg.parse_matrix_text(fh.read())
    sys.stdout.write(singular_report(a))
    return EXIT_OK


COMMANDS = {
    "embed": cmd_embed, "extract": cmd_extract, "attack": cmd_attack,
    "evaluate": cmd_evaluate, "svd": cmd_svd,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return EXIT_OK
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except VidmarkError as exc:
        print(f"vidmark {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeDecodeError) as exc:
        print(f"vidmark {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"vidmark {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
