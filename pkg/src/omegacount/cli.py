"""Command-line interface.

Subcommands: bgsub, detect, count, calibrate, synth, bench. Data goes to
files under --out or to stdout; diagnostics go to stderr. Exit codes:
0 success, 1 usage error, 2 I/O error, 3 data or dimension error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .background import MogConfig, mask_to_frame, model_new, process_frame
from .bench import run_full_bench
from .contour import primary_contour
from .descriptors import OmegaConfig, calibrate_detailed
from .errors import OmegaCountError
from .mask import frame_to_mask
from .pipeline import (
    DetectionReport,
    detect_in_mask,
    process_sequence,
    render_annotations,
    report_to_jsonl,
)
from .pnm import decode_pnm, encode_pnm, load_sequence
from .synth import build_corpus, load_corpus_masks


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_resolution(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise UsageError(f"bad --resolution {text!r}, expected WxH") from None


def _load_config(path: str | None) -> tuple[MogConfig, OmegaConfig]:
    """One flat JSON object feeds both configs; each reads its own keys."""
    if not path:
        return MogConfig(), OmegaConfig()
    with open(path) as fh:
        text = fh.read()
    return MogConfig.from_json(text), OmegaConfig.from_json(text)


def build_parser() -> _Parser:
    parser = _Parser(prog="omegacount", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--min-area", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--no-timing", action="store_true")

    p = sub.add_parser("bgsub", help="subtract background; write masks as P5")
    p.add_argument("--in", dest="input_dir", required=True)
    p.add_argument("--pattern", default="*.pgm")
    common(p, out_required=True)

    for name in ("detect", "count"):
        p = sub.add_parser(name, help="detect and count people; JSONL reports")
        p.add_argument("--in", dest="input_dir")
        p.add_argument("--pattern", default="*.pgm")
        p.add_argument("--mask", help="single pre-segmented P5 mask instead of a sequence")
        p.add_argument("--burn-in", type=int, default=50)
        p.add_argument("--annotate", action="store_true", help="write annotated P6 frames")
        common(p)

    p = sub.add_parser("calibrate", help="grid-search descriptor thresholds on a corpus")
    p.add_argument("--manifest", required=True, help="corpus manifest.json")
    p.add_argument("--config", help="base config for non-searched fields")
    p.add_argument("--out", help="write the calibrated config JSON here")
    p.add_argument("--min-area", type=int, default=None)

    p = sub.add_parser("synth", help="generate a labeled synthetic corpus")
    p.add_argument("--n", type=int, required=True, help="masks per class")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--resolution", default="160x120")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="throughput benchmark per backend")
    p.add_argument("--resolution", default="160x120")
    p.add_argument("--n", type=int, default=200, help="measured frames")
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--threads", type=int, default=4,
                   help="thread count for the multi-threaded mode")
    return parser


def _cmd_bgsub(args) -> int:
    mog_cfg, _ = _load_config(args.config)
    seq = load_sequence(args.input_dir, args.pattern)
    if len(seq) == 0:
        print("empty sequence", file=sys.stderr)
        return 0
    os.makedirs(args.out, exist_ok=True)
    first = seq.frame(0)
    model = model_new(first.width, first.height, first.channels, first, mog_cfg)
    import time

    elapsed = []
    for index in range(len(seq)):
        frame = seq.frame(index) if index else first
        t0 = time.perf_counter()
        fg = process_frame(model, frame, threads=args.threads)
        elapsed.append((time.perf_counter() - t0) * 1000.0)
        with open(os.path.join(args.out, f"mask_{index:05d}.pgm"), "wb") as fh:
            fh.write(encode_pnm(mask_to_frame(fg)))
    summary = {"frames": len(seq), "backend": model._kernel.__module__.rsplit(".", 1)[-1]}
    if not args.no_timing:
        summary["mean_ms"] = sum(elapsed) / len(elapsed)
        summary["fps"] = 1000.0 * len(elapsed) / sum(elapsed)
    print(json.dumps(summary))
    return 0


def _emit_report(report: DetectionReport, args, out_stream) -> None:
    print(report_to_jsonl(report, with_timing=not args.no_timing), file=out_stream)


def _cmd_detect(args) -> int:
    mog_cfg, omega_cfg = _load_config(args.config)
    out_dir = args.out
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    reports_fh = open(os.path.join(out_dir, "reports.jsonl"), "w") if out_dir else sys.stdout

    try:
        if args.mask:
            with open(args.mask, "rb") as fh:
                mask = frame_to_mask(decode_pnm(fh.read()))
            report = detect_in_mask(mask, omega_cfg, min_area=args.min_area)
            _emit_report(report, args, reports_fh)
            if args.annotate and out_dir:
                annotated = render_annotations(mask_to_frame(mask), report)
                with open(os.path.join(out_dir, "annotated_00000.ppm"), "wb") as fh:
                    fh.write(encode_pnm(annotated))
            return 0
        if not args.input_dir:
            raise UsageError("need --in DIRECTORY or --mask FILE")
        seq = load_sequence(args.input_dir, args.pattern)
        if len(seq) == 0:
            print("empty sequence", file=sys.stderr)
            return 0
        for report in process_sequence(
            seq,
            mog_cfg,
            omega_cfg,
            min_area=args.min_area,
            burn_in=args.burn_in,
            threads=args.threads,
        ):
            _emit_report(report, args, reports_fh)
            if args.annotate and out_dir:
                frame = seq.frame(report.frame_index)
                annotated = render_annotations(frame, report)
                name = f"annotated_{report.frame_index:05d}.ppm"
                with open(os.path.join(out_dir, name), "wb") as fh:
                    fh.write(encode_pnm(annotated))
        return 0
    finally:
        if reports_fh is not sys.stdout:
            reports_fh.close()


def _cmd_calibrate(args) -> int:
    _, base = _load_config(args.config)
    samples = []
    for mask, label in load_corpus_masks(args.manifest):
        path = primary_contour(mask, min_area=args.min_area)
        samples.append((path, label))
    cfg, accuracy = calibrate_detailed(samples, base=base)
    print(f"training balanced accuracy: {accuracy:.4f}", file=sys.stderr)
    text = cfg.to_json()
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_synth(args) -> int:
    canvas = _parse_resolution(args.resolution)
    build_corpus(args.n, args.seed, args.out, canvas=canvas)
    print(f"wrote {2 * args.n} masks + manifest.json to {args.out}", file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    width, height = _parse_resolution(args.resolution)
    report = run_full_bench(
        width, height, frames=args.n, threads=args.threads, seed=args.seed
    )
    print(json.dumps(report, indent=2))
    return 0


_COMMANDS = {
    "bgsub": _cmd_bgsub,
    "detect": _cmd_detect,
    "count": _cmd_detect,
    "calibrate": _cmd_calibrate,
    "synth": _cmd_synth,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr, end="")
        return 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except OmegaCountError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
