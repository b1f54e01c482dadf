"""Command-line surface for the toolkit.

Subcommands: encode, decode, rescore, pnms, eval, ambiguity, synth.
Every command is deterministic given its flags and seed; report commands
(eval, ambiguity) render a figure next to their delimited output unless
--no-figures is passed. Failures print a one-line JSON object to stderr
and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import codec, evaluate, formats, protocols, rescore, suppression, synth

__all__ = ["RunConfig", "build_parser", "main"]


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Default knobs shared by the subcommands."""

    gamma: float = rescore.DEFAULT_GAMMA
    pnms_threshold: float = suppression.DEFAULT_PNMS_THRESHOLD
    nms_threshold: float = suppression.DEFAULT_NMS_THRESHOLD
    iou_thresh: float = evaluate.DEFAULT_IOU_THRESH
    grid_m: int = codec.DEFAULT_GRID_M
    seed: int = 0


DEFAULTS = RunConfig()


def _fail(message: str) -> None:
    raise RuntimeError(message)


def cmd_encode(args: argparse.Namespace) -> int:
    entries = formats.load_quads(args.infile)
    records: list[formats.KeyEdgeRecord] = []
    skipped = 0
    for i, (quad, score) in enumerate(entries):
        try:
            ke, mt = codec.encode(quad)
        except codec.DegenerateQuadError as exc:
            print(f"warning: line {i + 1}: {exc}; skipped", file=sys.stderr)
            skipped += 1
            continue
        half = None
        half_bins_x = half_bins_y = None
        grid = bins_x = bins_y = None
        if args.grid_m:
            g = codec.padded_envelope_grid(quad, args.grid_m)
            grid = g
            bins_x = tuple(codec.quantize(x, g, "x") for x in ke.xs)
            bins_y = tuple(codec.quantize(y, g, "y") for y in ke.ys)
        if args.half_encode:
            half = codec.half_encode(ke, ke.x_mean, ke.y_mean)
            if grid is not None:
                half_bins_x = tuple(codec.quantize(x, grid, "x") for x in half.x_half)
                half_bins_y = tuple(codec.quantize(y, grid, "y") for y in half.y_half)
        records.append(
            formats.KeyEdgeRecord(
                index=i,
                ke=ke,
                mt=mt,
                score=score,
                half=half,
                grid=grid,
                bins_x=bins_x,
                bins_y=bins_y,
                half_bins_x=half_bins_x,
                half_bins_y=half_bins_y,
            )
        )
    formats.write_keyedge_records(args.out, records)
    print(f"encoded {len(records)} quads to {args.out}" + (f" ({skipped} skipped)" if skipped else ""))
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    records = formats.read_keyedge_records(args.infile)
    lines: list[str] = []
    dropped = 0
    for rec in records:
        if args.filter_invalid and not codec.is_valid_matching(rec.ke, rec.mt):
            dropped += 1
            continue
        quad = codec.decode(rec.ke, rec.mt)
        line = formats.serialize_quad(quad)
        if rec.score is not None:
            line += f",{formats.format_score(rec.score)}"
        lines.append(line)
    Path(args.out).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    print(f"decoded {len(lines)} quads to {args.out}" + (f" ({dropped} dropped)" if dropped else ""))
    return 0


def _det_files(directory: str | Path) -> list[Path]:
    files = sorted(
        p
        for p in Path(directory).iterdir()
        if p.suffix == ".txt" and not p.name.endswith(".scores.jsonl")
    )
    if not files:
        _fail(f"no detection files (*.txt) in {directory}")
    return files


def cmd_rescore(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    peak_records: list[str] = []
    total = 0
    for det_path in _det_files(args.dets):
        dets = formats.load_det_file(det_path)
        fused = []
        for i, det in enumerate(dets):
            if det.ke_scores is None:
                fused.append(det)  # no vectors: classifier score stands
                continue
            value = rescore.fuse(det.s_box, rescore.s_obd(det.ke_scores), args.gamma)
            fused.append(det.with_fused(value))
            if args.report_peaks:
                patterns = [
                    rescore.peak_pattern(row, args.prominence).value for row in det.ke_scores
                ]
                peak_records.append(
                    json.dumps(
                        {
                            "file": det_path.name,
                            "index": i,
                            "prominence": args.prominence,
                            "s_obd": rescore.s_obd(det.ke_scores),
                            "patterns": patterns,
                        }
                    )
                )
        formats.save_det_file(out_dir / det_path.name, fused)
        total += len(fused)
    if args.report_peaks:
        (out_dir / "peaks.jsonl").write_text(
            "\n".join(peak_records) + ("\n" if peak_records else ""), encoding="utf-8"
        )
    print(f"re-scored {total} detections (gamma={args.gamma}) into {out_dir}")
    return 0


def cmd_pnms(args: argparse.Namespace) -> int:
    mode = suppression.SuppressionMode(args.mode)
    threshold = args.threshold
    if threshold is None:
        threshold = (
            DEFAULTS.pnms_threshold
            if mode is suppression.SuppressionMode.POLYGONAL
            else DEFAULTS.nms_threshold
        )
    config = suppression.SuppressionConfig(iou_threshold=threshold, mode=mode)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    before = after = 0
    for det_path in _det_files(args.dets):
        dets = formats.load_det_file(det_path)
        kept = suppression.suppress(dets, config)
        before += len(dets)
        after += len(kept)
        formats.save_det_file(out_dir / det_path.name, kept)
    print(f"suppression ({mode.value}, threshold={threshold}) kept {after}/{before} detections")
    return 0


def _format_eval_table(result: evaluate.EvalResult) -> str:
    rows = [
        ("precision", f"{result.precision:.4f}"),
        ("recall", f"{result.recall:.4f}"),
        ("hmean", f"{result.hmean:.4f}"),
        ("best_threshold", f"{result.best_threshold:.6f}"),
        ("matches", str(result.matches)),
        ("detections", str(result.detections)),
        ("gts", str(result.gts)),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def cmd_eval(args: argparse.Namespace) -> int:
    pairs, orphans = formats.pair_dataset(args.gt, args.dets)
    if not pairs:
        _fail(f"no ground-truth files (*.txt) in {args.gt}")
    for orphan in orphans:
        print(f"warning: detection file {orphan.name} has no ground-truth partner", file=sys.stderr)
    tallies = []
    flagged = 0
    for pair in pairs:
        gts = formats.load_gt_file(pair.gt_path)
        dets = formats.load_det_file(pair.det_path) if pair.det_path else []
        from .geom import is_simple

        flagged += sum(1 for g in gts if not is_simple(g.quad))
        flagged += sum(1 for d in dets if not is_simple(d.quad))
        tallies.append(
            evaluate.match_image(dets, gts, iou_thresh=args.iou, ignore_mode=args.ignore_mode)
        )
    if flagged:
        print(f"warning: {flagged} non-simple quads loaded", file=sys.stderr)
    if args.sweep:
        result = evaluate.sweep_thresholds(tallies)
    else:
        records = [r for t in tallies for r in t.det_records]
        num_gt = sum(t.num_gt for t in tallies)
        tp = sum(1 for _, ok in records if ok)
        fp = len(records) - tp
        precision = tp / len(records) if records else 0.0
        recall = tp / num_gt if num_gt else 0.0
        hmean = evaluate.harmonic_mean(precision, recall)
        point = evaluate.CurvePoint(0.0, precision, recall, hmean, tp, fp)
        result = evaluate.EvalResult(
            precision, recall, hmean, 0.0, tp, len(records), num_gt, (point,)
        )

    out = Path(args.out)
    report = {
        "iou_thresh": args.iou,
        "ignore_mode": args.ignore_mode,
        "sweep": bool(args.sweep),
        "images": len(pairs),
        "precision": result.precision,
        "recall": result.recall,
        "hmean": result.hmean,
        "best_threshold": result.best_threshold,
        "matches": result.matches,
        "detections": result.detections,
        "gts": result.gts,
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    records_path = out.with_suffix(".records.jsonl")
    with records_path.open("w", encoding="utf-8") as fh:
        for p in result.curve:
            fh.write(
                json.dumps(
                    {
                        "threshold": p.threshold,
                        "precision": p.precision,
                        "recall": p.recall,
                        "hmean": p.hmean,
                        "tp": p.tp,
                        "fp": p.fp,
                    }
                )
                + "\n"
            )
    if not args.no_figures and result.curve:
        from .plots import render_sweep_figure

        render_sweep_figure(result.curve, out.with_suffix(".png"))
    print(_format_eval_table(result))
    return 0


def _parse_perturbation(raw: str) -> protocols.Perturbation:
    name, _, magnitude = raw.partition(":")
    if not magnitude:
        _fail(f"perturbation must look like rotate:5 or jitter:0.5, got {raw!r}")
    try:
        value = float(magnitude)
    except ValueError:
        _fail(f"non-numeric perturbation magnitude in {raw!r}")
    if name == "rotate":
        return protocols.Rotate(degrees=value)
    if name == "jitter":
        return protocols.JitterVertex(pixels=value)
    _fail(f"unknown perturbation {name!r}; use rotate:<deg> or jitter:<px>")
    raise AssertionError  # unreachable


def cmd_ambiguity(args: argparse.Namespace) -> int:
    if args.protocols == "all":
        names = list(protocols.PROTOCOL_NAMES)
    else:
        names = [n.strip() for n in args.protocols.split(",") if n.strip()]
    perturbation = _parse_perturbation(args.perturb)

    quads = list(synth.random_quad_corpus(args.n_quads, seed=args.seed))
    if args.corpus in ("mixed", "adversarial"):
        if args.corpus == "adversarial":
            quads = []
        for name in names:
            if name in protocols.BASELINE_PROTOCOLS:
                quads.extend(
                    protocols.adversarial_corpus(
                        name, n=args.adversarial_per_protocol, seed=args.seed + 1
                    )
                )
    if not quads:
        _fail("empty corpus; nothing to measure")

    reports = protocols.measure_instability(
        quads, perturbation, trials=args.trials, seed=args.seed, protocols=names
    )

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "protocol",
                "perturbation",
                "magnitude",
                "trials",
                "samples",
                "flip_rate",
                "mean_target_shift",
                "max_target_shift",
            ]
        )
        kind = "rotate" if isinstance(perturbation, protocols.Rotate) else "jitter"
        magnitude = (
            perturbation.degrees if isinstance(perturbation, protocols.Rotate) else perturbation.pixels
        )
        for r in reports:
            writer.writerow(
                [
                    r.protocol,
                    kind,
                    f"{magnitude:g}",
                    args.trials,
                    r.samples,
                    f"{r.flip_rate:.6f}",
                    f"{r.mean_target_shift:.6f}",
                    f"{r.max_target_shift:.6f}",
                ]
            )
    if not args.no_figures:
        from .plots import render_instability_figure

        render_instability_figure(reports, out.with_suffix(".png"))

    header = f"{'protocol':<12} {'flip_rate':>10} {'mean_shift':>12} {'max_shift':>12}"
    print(header)
    print("-" * len(header))
    for r in reports:
        print(
            f"{r.protocol:<12} {r.flip_rate:>10.4f} {r.mean_target_shift:>12.4f} "
            f"{r.max_target_shift:>12.4f}"
        )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    config = synth.SynthConfig(
        n_quads=args.n,
        size=args.size,
        jitter=args.jitter,
        duplicate_fraction=args.dup_fraction,
        fp_fraction=args.fp_fraction,
        multipeak_fraction=args.multipeak_fraction,
        grid_m=args.grid_m,
        per_image=args.per_image,
    )
    scene = synth.synth_scene(config, seed=args.seed)
    synth.write_scene(args.out, scene, config, seed=args.seed)
    print(
        f"wrote {len(scene.gts)} ground-truth quads and {len(scene.dets)} detections "
        f"across {len(scene.images)} images to {args.out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadkit",
        description=(
            "Order-invariant key-edge encoding, re-scoring, suppression, and "
            "evaluation for quadrilateral detections."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode quad files into key-edge records")
    p.add_argument("--in", dest="infile", required=True, help="input quad file")
    p.add_argument("--out", required=True, help="output JSON-lines record file")
    p.add_argument(
        "--grid-m",
        type=int,
        default=DEFAULTS.grid_m,
        help="bins per axis for quantized targets over the padded envelope (0 disables)",
    )
    p.add_argument(
        "--half-encode",
        action="store_true",
        help="also emit key edges pulled halfway toward the coordinate means",
    )
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="reconstruct quads from key-edge records")
    p.add_argument("--in", dest="infile", required=True, help="input JSON-lines record file")
    p.add_argument("--out", required=True, help="output quad file")
    p.add_argument(
        "--filter-invalid",
        action="store_true",
        help="drop records whose matching cannot form a simple positive-area quad",
    )
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("rescore", help="fuse classifier scores with key-edge score vectors")
    p.add_argument("--dets", required=True, help="directory of detection files")
    p.add_argument("--gamma", type=float, default=DEFAULTS.gamma, help="fusion weight in [0, 2]")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--report-peaks",
        action="store_true",
        help="also write peaks.jsonl classifying each vector as one- or multi-peak",
    )
    p.add_argument(
        "--prominence",
        type=float,
        default=rescore.DEFAULT_PROMINENCE,
        help="fraction of the global maximum a secondary peak must reach",
    )
    p.set_defaults(func=cmd_rescore)

    p = sub.add_parser("pnms", help="greedy duplicate suppression")
    p.add_argument("--dets", required=True, help="directory of detection files")
    p.add_argument(
        "--mode",
        choices=[m.value for m in suppression.SuppressionMode],
        default=suppression.SuppressionMode.POLYGONAL.value,
        help="overlap measure: exact polygon IoU or circumscribed-rectangle IoU",
    )
    p.add_argument(
        "--threshold",
        type=float,
        default=None,
        help=(
            "suppression IoU threshold (default {:.2f} polygonal, {:.2f} axis-aligned)".format(
                DEFAULTS.pnms_threshold, DEFAULTS.nms_threshold
            )
        ),
    )
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_pnms)

    p = sub.add_parser("eval", help="match detections against ground truth")
    p.add_argument("--gt", required=True, help="directory of ground-truth files")
    p.add_argument("--dets", required=True, help="directory of detection files")
    p.add_argument("--iou", type=float, default=DEFAULTS.iou_thresh, help="match IoU threshold")
    p.add_argument(
        "--sweep",
        action="store_true",
        help="sweep the confidence cutoff and report the best harmonic mean",
    )
    p.add_argument(
        "--ignore-mode",
        choices=["iou", "iod"],
        default="iou",
        help="overlap measure against don't-care regions (iod: intersection over detection)",
    )
    p.add_argument("--out", required=True, help="output report JSON path")
    p.add_argument("--no-figures", action="store_true", help="skip the rendered figure")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ambiguity", help="measure labeling instability under perturbation")
    p.add_argument(
        "--protocols",
        default="all",
        help=f"comma-separated protocols or 'all' ({', '.join(protocols.PROTOCOL_NAMES)})",
    )
    p.add_argument("--perturb", required=True, help="rotate:<degrees> or jitter:<pixels>")
    p.add_argument("--trials", type=int, default=100, help="perturbed copies per quad")
    p.add_argument("--seed", type=int, default=DEFAULTS.seed, help="corpus and perturbation seed")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument(
        "--corpus",
        choices=["mixed", "random", "adversarial"],
        default="mixed",
        help="random quads, boundary-case quads per protocol, or both",
    )
    p.add_argument("--n-quads", type=int, default=100, help="random corpus size")
    p.add_argument(
        "--adversarial-per-protocol",
        type=int,
        default=25,
        help="boundary-case quads added per measured baseline protocol",
    )
    p.add_argument("--no-figures", action="store_true", help="skip the rendered figure")
    p.set_defaults(func=cmd_ambiguity)

    p = sub.add_parser("synth", help="generate a synthetic ground-truth/detection dataset")
    p.add_argument("--n", type=int, required=True, help="number of ground-truth quads")
    p.add_argument("--seed", type=int, default=DEFAULTS.seed, help="generation seed")
    p.add_argument("--out", required=True, help="output directory (gt/ and dets/ created inside)")
    p.add_argument("--size", type=float, default=1000.0, help="canvas side length")
    p.add_argument("--jitter", type=float, default=0.0, help="detection vertex jitter in px")
    p.add_argument("--dup-fraction", type=float, default=0.0, help="fraction of duplicated boxes")
    p.add_argument("--fp-fraction", type=float, default=0.0, help="false positives per ground truth")
    p.add_argument(
        "--multipeak-fraction",
        type=float,
        default=0.5,
        help="fraction of false positives given two-peak score vectors",
    )
    p.add_argument("--grid-m", type=int, default=DEFAULTS.grid_m, help="score-vector bins per axis")
    p.add_argument("--per-image", type=int, default=20, help="instances per generated image")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # wrap everything for machine-readable failures
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
