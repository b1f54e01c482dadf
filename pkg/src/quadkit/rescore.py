"""Re-scoring of detections from key-edge score vectors.

Each detection carries eight per-axis score vectors (one per key edge).
A confident localization concentrates each vector's mass in one narrow
peak, so the mass inside a small window around the peak is a quality
signal: it stays near 1 for clean one-peak vectors and drops when the
mass is split across competing peaks. The mean of that window mass over
the eight vectors is fused with the box classifier score to produce the
final detection score.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .geom import Quad

__all__ = [
    "DEFAULT_GAMMA",
    "DEFAULT_PROMINENCE",
    "KE_COUNT",
    "PEAK_NEIGHBORS",
    "PeakPattern",
    "ScoredDetection",
    "peak_mass",
    "s_obd",
    "fuse",
    "peak_pattern",
]

DEFAULT_GAMMA = 1.4
DEFAULT_PROMINENCE = 0.5
KE_COUNT = 8
PEAK_NEIGHBORS = 2  # window half-width around the peak


class PeakPattern(enum.Enum):
    ONE_PEAK = "one"
    MULTI_PEAK = "multi"


@dataclass(frozen=True, eq=False)
class ScoredDetection:
    """A reconstructed quad with its classifier score and, optionally, the
    eight key-edge score vectors (shape (8, m)) and a fused score."""

    quad: Quad
    s_box: float
    ke_scores: np.ndarray | None = None
    fused: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.s_box):
            raise ValueError(f"s_box must be finite, got {self.s_box}")
        if self.fused is not None and not math.isfinite(self.fused):
            raise ValueError(f"fused score must be finite, got {self.fused}")
        if self.ke_scores is not None:
            arr = np.asarray(self.ke_scores, dtype=float)
            if arr.ndim != 2 or arr.shape[0] != KE_COUNT:
                raise ValueError(f"ke_scores must have shape (8, m), got {arr.shape}")
            object.__setattr__(self, "ke_scores", arr)

    @property
    def score(self) -> float:
        """Fused score when present, otherwise the classifier score."""
        return self.s_box if self.fused is None else self.fused

    def with_fused(self, value: float) -> "ScoredDetection":
        return replace(self, fused=float(value))


def _as_vector(values: Sequence[float] | np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"score vector must be non-empty and 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("score vector contains non-finite entries")
    return v


def _window_sum(v: np.ndarray, i: int) -> float:
    lo = max(i - PEAK_NEIGHBORS, 0)
    hi = min(v.size - 1, i + PEAK_NEIGHBORS)
    return float(v[lo : hi + 1].sum())


def peak_mass(values: Sequence[float] | np.ndarray) -> float:
    """Mass inside the +/-2 window around the vector's peak, clipped at the
    vector ends.

    When several positions tie for the maximum value, the anchor is the
    tied position whose window holds the most mass (lowest index on a
    further tie), so a flat vector is measured by a full interior window
    rather than a clipped boundary one.
    """
    v = _as_vector(values)
    peak = v.max()
    best = -1.0
    for i in np.flatnonzero(v == peak):
        w = _window_sum(v, int(i))
        if w > best:
            best = w
    return best


def s_obd(ke_scores: Iterable[Sequence[float] | np.ndarray] | np.ndarray) -> float:
    """Mean peak-window mass over exactly eight key-edge score vectors,
    clamped to [0, 1]."""
    vectors = list(ke_scores)
    if len(vectors) != KE_COUNT:
        raise ValueError(f"expected {KE_COUNT} score vectors, got {len(vectors)}")
    mean = sum(peak_mass(v) for v in vectors) / KE_COUNT
    return min(max(mean, 0.0), 1.0)


def fuse(s_box: float, s_obd_value: float, gamma: float = DEFAULT_GAMMA) -> float:
    """Weighted fusion ((2 - gamma) * s_box + gamma * s_obd) / 2.

    ``gamma`` in [0, 2] shifts weight from the classifier score (0) to the
    key-edge score (2); the result is clamped to [0, 1].
    """
    if not 0.0 <= gamma <= 2.0:
        raise ValueError(f"gamma must be within [0, 2], got {gamma}")
    value = ((2.0 - gamma) * s_box + gamma * s_obd_value) / 2.0
    return min(max(value, 0.0), 1.0)


def peak_pattern(
    values: Sequence[float] | np.ndarray, prominence: float = DEFAULT_PROMINENCE
) -> PeakPattern:
    """Classify a vector as one-peak or multi-peak.

    A local maximum is a run of equal values higher than both neighboring
    runs (vector ends count as open, so a monotone vector has exactly one
    maximum at its high end). The vector is MULTI_PEAK when at least two
    local maxima reach ``prominence`` times the global maximum.
    """
    v = _as_vector(values)
    if v.size < 3:
        raise ValueError(f"need at least 3 entries, got {v.size}")
    if not 0.0 < prominence <= 1.0:
        raise ValueError(f"prominence must be in (0, 1], got {prominence}")
    top = float(v.max())
    if top <= 0.0:
        return PeakPattern.ONE_PEAK
    # collapse plateaus to runs, then compare each run to its neighbors
    run_values = [float(v[0])]
    for x in v[1:]:
        if float(x) != run_values[-1]:
            run_values.append(float(x))
    prominent = 0
    for k, val in enumerate(run_values):
        left = run_values[k - 1] if k > 0 else -np.inf
        right = run_values[k + 1] if k + 1 < len(run_values) else -np.inf
        if val > left and val > right and val >= prominence * top:
            prominent += 1
    return PeakPattern.MULTI_PEAK if prominent >= 2 else PeakPattern.ONE_PEAK
