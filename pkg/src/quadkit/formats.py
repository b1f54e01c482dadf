"""Reading and writing the on-disk exchange formats.

Quad files carry one detection or ground-truth region per line as eight
comma-separated coordinates with an optional trailing score (detections)
or transcription (ground truth, where "###" marks a don't-care region).
Key-edge score vectors travel in a JSON-lines sidecar next to each
detection file, keyed by detection index. Key-edge encodings themselves
are exchanged as JSON-lines records. Coordinates are serialized with two
decimal places, scores with six; parsing is exact at those precisions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .codec import GridSpec, HalfEncoded, KeyEdges, MatchingType
from .evaluate import GtInstance
from .geom import Quad
from .rescore import KE_COUNT, ScoredDetection

__all__ = [
    "ParseError",
    "IGNORE_TOKEN",
    "format_coord",
    "format_score",
    "serialize_quad",
    "load_quads",
    "load_gt_file",
    "load_det_file",
    "save_gt_file",
    "save_det_file",
    "sidecar_path",
    "load_sidecar",
    "save_sidecar",
    "write_keyedge_records",
    "read_keyedge_records",
    "KeyEdgeRecord",
    "ImagePair",
    "pair_dataset",
]

IGNORE_TOKEN = "###"


class ParseError(ValueError):
    """A malformed input line, reported with file and line number."""

    def __init__(self, path: str | Path, line_no: int, message: str) -> None:
        self.path = str(path)
        self.line_no = line_no
        self.message = message
        super().__init__(f"{self.path}:{line_no}: {message}")


def format_coord(value: float) -> str:
    return f"{value:.2f}"


def format_score(value: float) -> str:
    return f"{value:.6f}"


def serialize_quad(quad: Quad) -> str:
    return ",".join(format_coord(c) for c in quad.coords())


def _clean_lines(path: str | Path) -> Iterable[tuple[int, str]]:
    text = Path(path).read_text(encoding="utf-8-sig")
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield line_no, line


def _parse_eight(path: str | Path, line_no: int, fields: Sequence[str]) -> Quad:
    if len(fields) < 8:
        raise ParseError(path, line_no, f"expected 8 coordinates, got {len(fields)} fields")
    try:
        coords = [float(f) for f in fields[:8]]
    except ValueError as exc:
        raise ParseError(path, line_no, f"non-numeric coordinate: {exc}") from None
    try:
        return Quad.from_coords(coords)
    except ValueError as exc:
        raise ParseError(path, line_no, str(exc)) from None


def load_quads(path: str | Path) -> list[tuple[Quad, float | None]]:
    """Parse a quad file; each entry is (quad, trailing score or None).

    A ninth field is taken as a score when numeric and ignored otherwise,
    so ground-truth files with transcriptions parse too. Degenerate or
    self-intersecting quads load fine; callers decide how to flag them.
    """
    out: list[tuple[Quad, float | None]] = []
    for line_no, line in _clean_lines(path):
        fields = [f.strip() for f in line.split(",")]
        quad = _parse_eight(path, line_no, fields)
        score: float | None = None
        if len(fields) > 8:
            try:
                score = float(fields[8])
            except ValueError:
                score = None
        out.append((quad, score))
    return out


def load_gt_file(path: str | Path) -> list[GtInstance]:
    """Parse a ground-truth file; a trailing ``###`` marks don't-care."""
    out: list[GtInstance] = []
    for line_no, line in _clean_lines(path):
        fields = [f.strip() for f in line.split(",")]
        quad = _parse_eight(path, line_no, fields)
        ignore = len(fields) > 8 and fields[8] == IGNORE_TOKEN
        out.append(GtInstance(quad=quad, ignore=ignore))
    return out


def sidecar_path(det_path: str | Path) -> Path:
    return Path(det_path).with_suffix(".scores.jsonl")


def load_sidecar(path: str | Path) -> dict[int, np.ndarray]:
    """Read a score-vector sidecar: one record per line with ``index`` and
    ``scores`` (an 8 x m array)."""
    out: dict[int, np.ndarray] = {}
    for line_no, line in _clean_lines(path):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, line_no, f"bad JSON: {exc}") from None
        if "index" not in record or "scores" not in record:
            raise ParseError(path, line_no, "record needs 'index' and 'scores'")
        arr = np.asarray(record["scores"], dtype=float)
        if arr.ndim != 2 or arr.shape[0] != KE_COUNT:
            raise ParseError(path, line_no, f"scores must be 8 x m, got shape {arr.shape}")
        out[int(record["index"])] = arr
    return out


def save_sidecar(path: str | Path, scores: dict[int, np.ndarray]) -> None:
    lines = []
    for index in sorted(scores):
        record = {"index": index, "scores": [[float(v) for v in row] for row in scores[index]]}
        lines.append(json.dumps(record))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_det_file(path: str | Path, with_sidecar: bool = True) -> list[ScoredDetection]:
    """Parse a detection file; a missing score defaults to 1.0. When a
    sidecar exists its vectors are attached by detection index."""
    entries = load_quads(path)
    vectors: dict[int, np.ndarray] = {}
    side = sidecar_path(path)
    if with_sidecar and side.exists():
        vectors = load_sidecar(side)
        bad = [i for i in vectors if not 0 <= i < len(entries)]
        if bad:
            raise ParseError(side, 0, f"sidecar indexes {bad} outside detection range")
    return [
        ScoredDetection(
            quad=quad,
            s_box=1.0 if score is None else score,
            ke_scores=vectors.get(i),
        )
        for i, (quad, score) in enumerate(entries)
    ]


def save_gt_file(path: str | Path, gts: Sequence[GtInstance]) -> None:
    lines = []
    for gt in gts:
        suffix = f",{IGNORE_TOKEN}" if gt.ignore else ""
        lines.append(serialize_quad(gt.quad) + suffix)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_det_file(
    path: str | Path, detections: Sequence[ScoredDetection], with_sidecar: bool = True
) -> None:
    """Write detections as quad lines with the effective score appended;
    vectors, when present, go to the sidecar."""
    lines = [f"{serialize_quad(d.quad)},{format_score(d.score)}" for d in detections]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    vectors = {i: d.ke_scores for i, d in enumerate(detections) if d.ke_scores is not None}
    side = sidecar_path(path)
    if with_sidecar and vectors:
        save_sidecar(side, vectors)
    elif side.exists():
        side.unlink()


@dataclass(frozen=True)
class KeyEdgeRecord:
    """One encoded quad as exchanged on disk."""

    index: int
    ke: KeyEdges
    mt: MatchingType
    score: float | None = None
    half: HalfEncoded | None = None
    grid: GridSpec | None = None
    bins_x: tuple[int, ...] | None = None
    bins_y: tuple[int, ...] | None = None
    half_bins_x: tuple[int, ...] | None = None
    half_bins_y: tuple[int, ...] | None = None


def _record_to_json(rec: KeyEdgeRecord) -> str:
    body: dict = {
        "index": rec.index,
        "xs": list(rec.ke.xs),
        "ys": list(rec.ke.ys),
        "matching": rec.mt.id,
    }
    if rec.score is not None:
        body["score"] = rec.score
    if rec.half is not None:
        body["x_half"] = list(rec.half.x_half)
        body["y_half"] = list(rec.half.y_half)
        body["x_mean"] = rec.half.x_mean
        body["y_mean"] = rec.half.y_mean
    if rec.grid is not None:
        body["grid"] = {
            "m": rec.grid.m,
            "window": [rec.grid.x_min, rec.grid.y_min, rec.grid.x_max, rec.grid.y_max],
        }
        body["bins_x"] = list(rec.bins_x)
        body["bins_y"] = list(rec.bins_y)
        if rec.half_bins_x is not None:
            body["half_bins_x"] = list(rec.half_bins_x)
            body["half_bins_y"] = list(rec.half_bins_y)
    return json.dumps(body)


def write_keyedge_records(path: str | Path, records: Iterable[KeyEdgeRecord]) -> None:
    lines = [_record_to_json(r) for r in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_keyedge_records(path: str | Path) -> list[KeyEdgeRecord]:
    out: list[KeyEdgeRecord] = []
    for line_no, line in _clean_lines(path):
        try:
            body = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, line_no, f"bad JSON: {exc}") from None
        try:
            ke = KeyEdges(tuple(body["xs"]), tuple(body["ys"]))
            mt = MatchingType.from_id(int(body["matching"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(path, line_no, f"bad key-edge record: {exc}") from None
        half = None
        if "x_half" in body:
            half = HalfEncoded(
                tuple(body["x_half"]), tuple(body["y_half"]),
                float(body["x_mean"]), float(body["y_mean"]),
            )
        grid = None
        bins_x = bins_y = half_bins_x = half_bins_y = None
        if "grid" in body:
            g = body["grid"]
            w = g["window"]
            grid = GridSpec(w[0], w[1], w[2], w[3], int(g["m"]))
            bins_x = tuple(int(b) for b in body["bins_x"])
            bins_y = tuple(int(b) for b in body["bins_y"])
            if "half_bins_x" in body:
                half_bins_x = tuple(int(b) for b in body["half_bins_x"])
                half_bins_y = tuple(int(b) for b in body["half_bins_y"])
        out.append(
            KeyEdgeRecord(
                index=int(body["index"]),
                ke=ke,
                mt=mt,
                score=float(body["score"]) if "score" in body else None,
                half=half,
                grid=grid,
                bins_x=bins_x,
                bins_y=bins_y,
                half_bins_x=half_bins_x,
                half_bins_y=half_bins_y,
            )
        )
    return out


@dataclass(frozen=True, slots=True)
class ImagePair:
    key: str
    gt_path: Path
    det_path: Path | None


_STRIP_PREFIXES = ("gt_", "res_", "det_")


def _image_key(stem: str) -> str:
    low = stem.lower()
    for prefix in _STRIP_PREFIXES:
        if low.startswith(prefix):
            return low[len(prefix):]
    return low


def pair_dataset(gt_dir: str | Path, det_dir: str | Path) -> tuple[list[ImagePair], list[Path]]:
    """Pair per-image ground-truth and detection files by stem.

    Conventional prefixes (gt_, res_, det_) are stripped before matching,
    so gt_img_1.txt pairs with res_img_1.txt or img_1.txt. Ground-truth
    files without detections pair with None (everything missed); detection
    files without ground truth are returned separately for the caller to
    warn about.
    """
    gt_files = sorted(p for p in Path(gt_dir).iterdir() if p.suffix == ".txt")
    det_files = sorted(
        p
        for p in Path(det_dir).iterdir()
        if p.suffix == ".txt" and not p.name.endswith(".scores.jsonl")
    )
    det_by_key = {_image_key(p.stem): p for p in det_files}
    pairs = []
    used = set()
    for gt_path in gt_files:
        key = _image_key(gt_path.stem)
        det_path = det_by_key.get(key)
        if det_path is not None:
            used.add(key)
        pairs.append(ImagePair(key=key, gt_path=gt_path, det_path=det_path))
    orphans = [p for k, p in sorted(det_by_key.items()) if k not in used]
    return pairs, orphans
