"""Duplicate removal with exact polygon overlap or envelope overlap."""

from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import oracle_iou
from quadkit import (
    ALL_MATCHING_TYPES,
    Candidate,
    Quad,
    ScoredDetection,
    SuppressionConfig,
    SuppressionMode,
    decode,
    encode,
    envelope,
    filter_valid,
    iou,
    is_valid_matching,
    suppress,
)
from quadkit.synth import random_quad_corpus

SQUARE = Quad.from_coords((0, 0, 10, 0, 10, 10, 0, 10))


def rotated_rect(cx: float, cy: float, length: float, thickness: float, angle: float) -> Quad:
    ux, uy = math.cos(angle), math.sin(angle)
    vx, vy = -uy, ux
    hl, ht = length / 2, thickness / 2
    coords = []
    for su, sv in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        coords.append(cx + su * hl * ux + sv * ht * vx)
        coords.append(cy + su * hl * uy + sv * ht * vy)
    return Quad.from_coords(coords)


def crossing_thin_rects() -> tuple[Quad, Quad]:
    a = rotated_rect(0, 0, 40, 2, math.pi / 4)
    b = rotated_rect(0, 0, 40, 2, -math.pi / 4)
    return a, b


class TestSuppress:
    def test_exact_duplicate_keeps_higher_score(self):
        dets = [
            ScoredDetection(SQUARE, 0.8),
            ScoredDetection(SQUARE, 0.9),
        ]
        kept = suppress(dets, SuppressionConfig(0.15))
        assert len(kept) == 1
        assert kept[0].s_box == 0.9

    def test_threshold_one_keeps_everything(self):
        dets = [ScoredDetection(SQUARE, 0.9), ScoredDetection(SQUARE, 0.8)]
        kept = suppress(dets, SuppressionConfig(1.0))
        assert len(kept) == 2

    def test_crossing_rects_witness(self):
        a, b = crossing_thin_rects()
        coords_a = [(v.x, v.y) for v in a.vertices]
        coords_b = [(v.x, v.y) for v in b.vertices]
        # Confirm the geometric premise against the independent oracle.
        assert oracle_iou(coords_a, coords_b) < 0.15
        assert iou(envelope(a), envelope(b)) > 0.3
        dets = [ScoredDetection(a, 0.9), ScoredDetection(b, 0.8)]
        polygonal = suppress(
            dets, SuppressionConfig(0.15, SuppressionMode.POLYGONAL)
        )
        axis_aligned = suppress(
            dets, SuppressionConfig(0.3, SuppressionMode.AXIS_ALIGNED)
        )
        assert len(polygonal) == 2
        assert len(axis_aligned) == 1
        assert axis_aligned[0].s_box == 0.9

    def test_empty_input(self):
        assert suppress([], SuppressionConfig(0.15)) == []

    def test_score_tie_keeps_first_in_input_order(self):
        first = ScoredDetection(SQUARE, 0.9)
        second = ScoredDetection(SQUARE, 0.9)
        kept = suppress([first, second], SuppressionConfig(0.15))
        assert len(kept) == 1
        assert kept[0] is first

    def test_output_sorted_by_score(self):
        far = Quad.from_coords((100, 100, 110, 100, 110, 110, 100, 110))
        dets = [
            ScoredDetection(SQUARE, 0.5),
            ScoredDetection(far, 0.9),
        ]
        kept = suppress(dets, SuppressionConfig(0.15))
        assert [d.s_box for d in kept] == [0.9, 0.5]

    def test_fused_score_drives_suppression(self):
        winner = ScoredDetection(SQUARE, 0.6, fused=0.95)
        loser = ScoredDetection(SQUARE, 0.9, fused=0.4)
        kept = suppress([winner, loser], SuppressionConfig(0.15))
        assert kept == [winner]

    @pytest.mark.parametrize("mode", list(SuppressionMode))
    def test_greedy_postconditions_on_random_scene(self, mode):
        rng = np.random.default_rng(5)
        quads = random_quad_corpus(40, seed=5, size=300.0)
        dets = [
            ScoredDetection(q, round(float(s), 4))
            for q, s in zip(quads, rng.uniform(0.2, 1.0, len(quads)))
        ]
        config = SuppressionConfig(0.2, mode)

        def overlap(a: Quad, b: Quad) -> float:
            if mode is SuppressionMode.AXIS_ALIGNED:
                return iou(envelope(a), envelope(b))
            return iou(a, b)

        kept = suppress(dets, config)
        # Every kept pair clears the threshold ...
        for i, a in enumerate(kept):
            for b in kept[i + 1 :]:
                assert overlap(a.quad, b.quad) <= config.iou_threshold
        # ... and every suppressed det conflicts with a stronger kept one.
        kept_ids = {id(d) for d in kept}
        for det in dets:
            if id(det) in kept_ids:
                continue
            assert any(
                overlap(det.quad, k.quad) > config.iou_threshold
                and (k.score, ) >= (det.score, )
                for k in kept
            )
        # Idempotence: suppressing the survivors changes nothing.
        assert suppress(kept, config) == kept

    def test_threshold_validated(self):
        with pytest.raises(ValueError):
            SuppressionConfig(-0.1)
        with pytest.raises(ValueError):
            SuppressionConfig(1.5)


class TestFilterValid:
    def test_valid_candidate_decodes(self):
        quad = Quad.from_coords((1, 2, 7, 0, 9, 5, 3, 8))
        ke, mt = encode(quad)
        out = filter_valid([Candidate(ke, mt, 0.9)])
        assert len(out) == 1
        assert sorted((v.x, v.y) for v in out[0].quad.vertices) == sorted(
            (v.x, v.y) for v in quad.vertices
        )
        assert out[0].s_box == 0.9

    def test_invalid_matching_dropped(self):
        rect = Quad.from_coords((0, 0, 4, 0, 4, 2, 0, 2))
        ke, mt = encode(rect)
        bad = next(m for m in ALL_MATCHING_TYPES if not is_valid_matching(ke, m))
        out = filter_valid(
            [Candidate(ke, bad, 0.9), Candidate(ke, mt, 0.8)]
        )
        assert [d.s_box for d in out] == [0.8]

    def test_order_preserved_and_scores_carried(self):
        quad_a = Quad.from_coords((0, 0, 10, 0, 10, 10, 0, 10))
        quad_b = Quad.from_coords((1, 2, 7, 0, 9, 5, 3, 8))
        scores = np.full((8, 56), 1.0 / 56.0)
        cands = [
            Candidate(*encode(quad_a), 0.5, ke_scores=scores),
            Candidate(*encode(quad_b), 0.9),
        ]
        out = filter_valid(cands)
        assert [d.s_box for d in out] == [0.5, 0.9]
        assert out[0].ke_scores is not None and out[0].ke_scores.shape == (8, 56)
        assert out[1].ke_scores is None
