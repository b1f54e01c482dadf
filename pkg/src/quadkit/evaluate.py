"""Detection-versus-ground-truth evaluation for quadrilateral boxes.

Greedy one-to-one matching at a polygon-IoU threshold, with don't-care
regions absorbing whatever hits them, and a confidence-threshold sweep
that reports the best harmonic mean of precision and recall. Matching is
greedy in descending score order, which makes a single pass at threshold
zero sufficient: dropping low-scored detections never changes how the
higher-scored ones matched, so every cutoff can be evaluated from the
same per-detection records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

from .geom import Quad, area, intersection_area, iou
from .rescore import ScoredDetection

__all__ = [
    "DEFAULT_IOU_THRESH",
    "GtInstance",
    "ImageTally",
    "CurvePoint",
    "EvalResult",
    "match_image",
    "harmonic_mean",
    "sweep_thresholds",
]

DEFAULT_IOU_THRESH = 0.5
IgnoreMode = Literal["iou", "iod"]


@dataclass(frozen=True, slots=True)
class GtInstance:
    """A ground-truth quad; ``ignore`` marks a don't-care region."""

    quad: Quad
    ignore: bool = False


@dataclass(frozen=True, slots=True)
class ImageTally:
    """Matching outcome for one image.

    ``det_records`` holds (score, is_true_positive) for every counted
    detection; detections absorbed by don't-care regions are omitted.
    """

    det_records: tuple[tuple[float, bool], ...]
    num_gt: int


@dataclass(frozen=True, slots=True)
class CurvePoint:
    threshold: float
    precision: float
    recall: float
    hmean: float
    tp: int
    fp: int


@dataclass(frozen=True, slots=True)
class EvalResult:
    precision: float
    recall: float
    hmean: float
    best_threshold: float
    matches: int
    detections: int
    gts: int
    curve: tuple[CurvePoint, ...]


def _ignore_overlap(det: Quad, gt: Quad, mode: IgnoreMode) -> float:
    if mode == "iou":
        return iou(det, gt)
    det_area = area(det)
    if det_area <= 0.0:
        return 0.0
    return intersection_area(det, gt) / det_area


def match_image(
    detections: Sequence[ScoredDetection],
    gts: Sequence[GtInstance],
    iou_thresh: float = DEFAULT_IOU_THRESH,
    ignore_mode: IgnoreMode = "iou",
) -> ImageTally:
    """Match one image's detections against its ground truth.

    Detections are visited in descending score order (ties keep input
    order). Each one matches the highest-IoU still-unmatched care GT at or
    above ``iou_thresh`` and becomes a true positive; otherwise, if it
    overlaps any don't-care GT at or above the threshold (measured by
    ``ignore_mode``: plain IoU, or intersection over detection area as
    some benchmarks specify), it is absorbed and counted as neither true
    nor false positive; otherwise it is a false positive.
    """
    if not 0.0 < iou_thresh <= 1.0:
        raise ValueError(f"iou_thresh must be in (0, 1], got {iou_thresh}")
    if ignore_mode not in ("iou", "iod"):
        raise ValueError(f"ignore_mode must be 'iou' or 'iod', got {ignore_mode!r}")
    care = [g for g in gts if not g.ignore]
    dont_care = [g for g in gts if g.ignore]
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].score, i))
    matched = [False] * len(care)
    records: list[tuple[float, bool]] = [(0.0, False)] * len(detections)
    counted = [True] * len(detections)
    for i in order:
        det = detections[i]
        best_j, best_iou = -1, 0.0
        for j, gt in enumerate(care):
            if matched[j]:
                continue
            v = iou(det.quad, gt.quad)
            if v > best_iou:
                best_j, best_iou = j, v
        if best_j >= 0 and best_iou >= iou_thresh:
            matched[best_j] = True
            records[i] = (det.score, True)
            continue
        if any(_ignore_overlap(det.quad, g.quad, ignore_mode) >= iou_thresh for g in dont_care):
            counted[i] = False
            continue
        records[i] = (det.score, False)
    return ImageTally(
        det_records=tuple(records[i] for i in range(len(detections)) if counted[i]),
        num_gt=len(care),
    )


def harmonic_mean(precision: float, recall: float) -> float:
    if precision + recall <= 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _point_at(records: list[tuple[float, bool]], num_gt: int, threshold: float) -> CurvePoint:
    tp = sum(1 for s, ok in records if ok and s >= threshold)
    fp = sum(1 for s, ok in records if not ok and s >= threshold)
    kept = tp + fp
    precision = tp / kept if kept else 0.0
    recall = tp / num_gt if num_gt else 0.0
    return CurvePoint(threshold, precision, recall, harmonic_mean(precision, recall), tp, fp)


def sweep_thresholds(tallies: Iterable[ImageTally]) -> EvalResult:
    """Pool per-image tallies and sweep the confidence cutoff.

    Every distinct detection score is a candidate cutoff (detections with
    score >= cutoff are kept). Returns the point with the highest harmonic
    mean, ties resolved toward the higher cutoff, plus the full curve in
    ascending threshold order.
    """
    records: list[tuple[float, bool]] = []
    num_gt = 0
    for tally in tallies:
        records.extend(tally.det_records)
        num_gt += tally.num_gt
    if not records:
        return EvalResult(0.0, 0.0, 0.0, math.inf, 0, 0, num_gt, ())
    cutoffs = sorted({s for s, _ in records})
    curve = tuple(_point_at(records, num_gt, c) for c in cutoffs)
    best = max(curve, key=lambda p: (p.hmean, p.threshold))
    return EvalResult(
        precision=best.precision,
        recall=best.recall,
        hmean=best.hmean,
        best_threshold=best.threshold,
        matches=best.tp,
        detections=best.tp + best.fp,
        gts=num_gt,
        curve=curve,
    )
