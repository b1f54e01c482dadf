"""Duplicate suppression and validity filtering for scored detections.

Offers classic greedy non-maximum suppression in two overlap modes:
polygonal (exact quad IoU) and axis-aligned (IoU of the circumscribed
rectangles). Rotated or slanted boxes that barely overlap can still have
near-identical circumscribed rectangles, which is why the polygonal mode
exists and uses a tighter default threshold.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .codec import KeyEdges, MatchingType, decode, is_valid_matching
from .geom import Quad, envelope, iou
from .rescore import ScoredDetection

__all__ = [
    "DEFAULT_PNMS_THRESHOLD",
    "DEFAULT_NMS_THRESHOLD",
    "SuppressionMode",
    "SuppressionConfig",
    "Candidate",
    "suppress",
    "filter_valid",
]

DEFAULT_PNMS_THRESHOLD = 0.15
DEFAULT_NMS_THRESHOLD = 0.3


class SuppressionMode(enum.Enum):
    POLYGONAL = "polygonal"
    AXIS_ALIGNED = "axis-aligned"


@dataclass(frozen=True, slots=True)
class SuppressionConfig:
    iou_threshold: float
    mode: SuppressionMode = SuppressionMode.POLYGONAL

    def __post_init__(self) -> None:
        if not 0.0 <= self.iou_threshold <= 1.0:
            raise ValueError(f"iou_threshold must be in [0, 1], got {self.iou_threshold}")


def suppress(
    detections: Sequence[ScoredDetection], config: SuppressionConfig
) -> list[ScoredDetection]:
    """Greedy non-maximum suppression.

    Detections are visited in descending score order (ties keep the input
    order); one is kept iff its overlap with every already-kept detection
    is <= the threshold. Returns the kept detections, highest score first.
    """
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].score, i))
    if config.mode is SuppressionMode.AXIS_ALIGNED:
        shapes = [envelope(d.quad) for d in detections]
    else:
        shapes = [d.quad for d in detections]
    kept: list[int] = []
    for i in order:
        if all(iou(shapes[i], shapes[j]) <= config.iou_threshold for j in kept):
            kept.append(i)
    return [detections[i] for i in kept]


@dataclass(frozen=True, eq=False)
class Candidate:
    """A raw decoded-box candidate before validity filtering."""

    ke: KeyEdges
    mt: MatchingType
    s_box: float
    ke_scores: np.ndarray | None = None


def filter_valid(candidates: Iterable[Candidate]) -> list[ScoredDetection]:
    """Reconstruct candidates, dropping any whose matching type does not
    produce a simple positive-area quad. Input order is preserved."""
    out: list[ScoredDetection] = []
    for cand in candidates:
        if not is_valid_matching(cand.ke, cand.mt):
            continue
        out.append(
            ScoredDetection(
                quad=decode(cand.ke, cand.mt),
                s_box=cand.s_box,
                ke_scores=cand.ke_scores,
            )
        )
    return out
