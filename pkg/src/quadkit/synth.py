"""Synthetic ground truth and detections with known failure modes.

Scenes place rotated-rectangle "text boxes" on a cell grid so instances
never overlap by construction. Detections are derived from the ground
truth with controllable corruption: per-coordinate jitter, duplicate
boxes, and false positives whose key-edge score vectors are either
cleanly single-peaked (indistinguishable from real boxes by score alone)
or split across two peaks (catchable by re-scoring). With every fraction
at zero the detections equal the ground truth exactly, closing the loop
for end-to-end checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .codec import DEFAULT_GRID_M, encode, padded_envelope_grid, quantize
from .evaluate import GtInstance
from .geom import Point, Quad, is_simple
from .rescore import ScoredDetection
from .formats import save_det_file, save_gt_file

__all__ = [
    "SynthConfig",
    "SynthImage",
    "SynthScene",
    "random_simple_quad",
    "random_quad_corpus",
    "one_peak_vector",
    "two_peak_vector",
    "ke_score_matrix",
    "synth_scene",
    "write_scene",
]

LABEL_TP = "tp"
LABEL_DUP = "dup"
LABEL_FP_ONE = "fp-one"
LABEL_FP_MULTI = "fp-multi"


@dataclass(frozen=True, slots=True)
class SynthConfig:
    n_quads: int
    size: float = 1000.0
    jitter: float = 0.0
    duplicate_fraction: float = 0.0
    fp_fraction: float = 0.0
    multipeak_fraction: float = 0.5
    grid_m: int = DEFAULT_GRID_M
    per_image: int = 20

    def __post_init__(self) -> None:
        if self.n_quads < 1:
            raise ValueError(f"n_quads must be >= 1, got {self.n_quads}")
        if self.size <= 0.0:
            raise ValueError(f"size must be positive, got {self.size}")
        if self.jitter < 0.0:
            raise ValueError(f"jitter must be >= 0, got {self.jitter}")
        for name in ("duplicate_fraction", "fp_fraction", "multipeak_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.per_image < 1:
            raise ValueError(f"per_image must be >= 1, got {self.per_image}")


@dataclass(frozen=True, slots=True)
class SynthImage:
    gts: tuple[GtInstance, ...]
    dets: tuple[ScoredDetection, ...]
    det_labels: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class SynthScene:
    images: tuple[SynthImage, ...]

    @property
    def gts(self) -> list[GtInstance]:
        return [g for img in self.images for g in img.gts]

    @property
    def dets(self) -> list[ScoredDetection]:
        return [d for img in self.images for d in img.dets]

    @property
    def det_labels(self) -> list[str]:
        return [l for img in self.images for l in img.det_labels]


def _snap(value: float) -> float:
    return round(value, 2)


def _rotated_rect(cx: float, cy: float, hw: float, hh: float, angle: float) -> Quad:
    c, s = math.cos(angle), math.sin(angle)
    corners = []
    for dx, dy in ((-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)):
        corners.append(Point(_snap(cx + c * dx - s * dy), _snap(cy + s * dx + c * dy)))
    return Quad(tuple(corners))


def random_simple_quad(
    rng: np.random.Generator,
    cx: float,
    cy: float,
    max_half: float,
    corner_noise: float = 0.0,
) -> Quad:
    """A rotated rectangle, optionally with per-corner noise, retried until
    simple with positive area. Coordinates snap to the 0.01 grid."""
    for _ in range(64):
        hw = float(rng.uniform(0.45 * max_half, max_half))
        hh = float(rng.uniform(0.3 * max_half, 0.9 * max_half))
        angle = float(rng.uniform(0.0, math.pi))
        quad = _rotated_rect(cx, cy, hw, hh, angle)
        if corner_noise > 0.0:
            offs = rng.uniform(-corner_noise, corner_noise, size=(4, 2))
            quad = Quad(
                tuple(
                    Point(_snap(v.x + offs[i, 0]), _snap(v.y + offs[i, 1]))
                    for i, v in enumerate(quad.vertices)
                )
            )
        if is_simple(quad):
            return quad
    raise RuntimeError("could not draw a simple quad; widen the extents")


def random_quad_corpus(n: int, seed: int, size: float = 1000.0) -> list[Quad]:
    """Independent simple quads scattered over a ``size`` x ``size`` canvas."""
    rng = np.random.default_rng(seed)
    margin = 0.1 * size
    return [
        random_simple_quad(
            rng,
            float(rng.uniform(margin, size - margin)),
            float(rng.uniform(margin, size - margin)),
            max_half=0.08 * size,
            corner_noise=0.015 * size,
        )
        for _ in range(n)
    ]


def one_peak_vector(m: int, peak: int) -> np.ndarray:
    """A unit-mass vector concentrated at ``peak``: 0.96 inside the +/-2
    window, the remainder spread over the other bins."""
    if not 2 <= peak <= m - 3:
        raise ValueError(f"peak must leave a full window inside [0, {m}), got {peak}")
    v = np.full(m, 0.04 / (m - 5))
    profile = (0.07, 0.15, 0.52, 0.15, 0.07)
    for off, p in zip(range(-2, 3), profile):
        v[peak + off] = p
    return v


def two_peak_vector(m: int, peak_a: int, peak_b: int) -> np.ndarray:
    """Unit mass split evenly between two separated peaks, each carrying
    0.48 in its +/-2 window."""
    if abs(peak_a - peak_b) < 6:
        raise ValueError("peaks must be at least 6 bins apart")
    v = np.full(m, 0.04 / (m - 10))
    profile = (0.05, 0.08, 0.22, 0.08, 0.05)
    for peak in (peak_a, peak_b):
        if not 2 <= peak <= m - 3:
            raise ValueError(f"peak must leave a full window inside [0, {m}), got {peak}")
        for off, p in zip(range(-2, 3), profile):
            v[peak + off] = p
    return v


def ke_score_matrix(quad: Quad, m: int, multipeak: bool) -> np.ndarray:
    """Synthesize the eight key-edge score vectors a detector would emit
    for ``quad``: peaks at the true quantized key edges (clamped away from
    the window border), split into two peaks for multipeak negatives."""
    grid = padded_envelope_grid(quad, m)
    ke, _ = encode(quad)
    bins = [quantize(x, grid, "x") for x in ke.xs] + [quantize(y, grid, "y") for y in ke.ys]
    rows = []
    for b in bins:
        peak = min(max(b, 2), m - 3)
        if multipeak:
            other = peak + 10 if peak + 10 <= m - 3 else peak - 10
            rows.append(two_peak_vector(m, peak, other))
        else:
            rows.append(one_peak_vector(m, peak))
    return np.stack(rows)


def _place_grid(k: int, size: float) -> list[tuple[float, float, float]]:
    """Centers and half-extents of ``k`` non-overlapping cells."""
    g = max(1, math.ceil(math.sqrt(k)))
    cell = size / g
    spots = []
    for idx in range(k):
        row, col = divmod(idx, g)
        spots.append(((col + 0.5) * cell, (row + 0.5) * cell, 0.32 * cell))
    return spots


def synth_scene(config: SynthConfig, seed: int) -> SynthScene:
    """Generate a deterministic scene for ``config`` and ``seed``."""
    rng = np.random.default_rng(seed)
    n = config.n_quads
    n_fp = round(n * config.fp_fraction)
    n_dup = round(n * config.duplicate_fraction)
    dup_targets = set(
        rng.choice(n, size=n_dup, replace=False).tolist() if n_dup else []
    )

    slots = [LABEL_TP] * n + ["fp"] * n_fp
    images: list[SynthImage] = []
    gt_counter = 0
    for start in range(0, len(slots), config.per_image):
        chunk = slots[start : start + config.per_image]
        spots = _place_grid(len(chunk), config.size)
        gts: list[GtInstance] = []
        dets: list[ScoredDetection] = []
        labels: list[str] = []
        extras: list[tuple[ScoredDetection, str]] = []
        for slot, (cx, cy, half) in zip(chunk, spots):
            quad = random_simple_quad(rng, cx, cy, max_half=0.8 * half)
            if slot == LABEL_TP:
                gts.append(GtInstance(quad=quad))
                det_quad = quad
                if config.jitter > 0.0:
                    offs = rng.uniform(-config.jitter, config.jitter, size=(4, 2))
                    det_quad = Quad(
                        tuple(
                            Point(_snap(v.x + offs[i, 0]), _snap(v.y + offs[i, 1]))
                            for i, v in enumerate(quad.vertices)
                        )
                    )
                s_box = round(float(rng.uniform(0.75, 0.95)), 4)
                dets.append(
                    ScoredDetection(
                        quad=det_quad,
                        s_box=s_box,
                        ke_scores=ke_score_matrix(det_quad, config.grid_m, multipeak=False),
                    )
                )
                labels.append(LABEL_TP)
                if gt_counter in dup_targets:
                    offs = rng.uniform(-3.0, 3.0, size=(4, 2))
                    dup_quad = Quad(
                        tuple(
                            Point(_snap(v.x + offs[i, 0]), _snap(v.y + offs[i, 1]))
                            for i, v in enumerate(quad.vertices)
                        )
                    )
                    extras.append(
                        (
                            ScoredDetection(
                                quad=dup_quad,
                                s_box=round(s_box * 0.9, 4),
                                ke_scores=ke_score_matrix(
                                    dup_quad, config.grid_m, multipeak=False
                                ),
                            ),
                            LABEL_DUP,
                        )
                    )
                gt_counter += 1
            else:
                multi = bool(rng.random() < config.multipeak_fraction)
                dets_label = LABEL_FP_MULTI if multi else LABEL_FP_ONE
                extras.append(
                    (
                        ScoredDetection(
                            quad=quad,
                            s_box=round(float(rng.uniform(0.75, 0.95)), 4),
                            ke_scores=ke_score_matrix(quad, config.grid_m, multipeak=multi),
                        ),
                        dets_label,
                    )
                )
        for det, label in extras:
            dets.append(det)
            labels.append(label)
        images.append(SynthImage(tuple(gts), tuple(dets), tuple(labels)))
    return SynthScene(tuple(images))


def write_scene(out_dir: str | Path, scene: SynthScene, config: SynthConfig, seed: int) -> None:
    """Write gt/ and dets/ file trees plus a manifest echoing the config."""
    root = Path(out_dir)
    gt_dir = root / "gt"
    det_dir = root / "dets"
    gt_dir.mkdir(parents=True, exist_ok=True)
    det_dir.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(scene.images):
        save_gt_file(gt_dir / f"gt_img_{i:03d}.txt", img.gts)
        save_det_file(det_dir / f"res_img_{i:03d}.txt", img.dets)
    manifest = {
        "config": asdict(config),
        "seed": seed,
        "images": len(scene.images),
        "gts": len(scene.gts),
        "dets": len(scene.dets),
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
