"""Greedy detection matching, ignore regions, and threshold sweeps."""

from __future__ import annotations

import math
import random

import pytest

from quadkit import (
    GtInstance,
    ImageTally,
    Quad,
    ScoredDetection,
    match_image,
    sweep_thresholds,
)
from quadkit.evaluate import harmonic_mean


def box(x: float, y: float, w: float, h: float) -> Quad:
    return Quad.from_coords((x, y, x + w, y, x + w, y + h, x, y + h))


GT = box(0, 0, 10, 10)
FAR = box(100, 100, 10, 10)


class TestMatchImage:
    def test_single_true_positive(self):
        tally = match_image([ScoredDetection(GT, 0.9)], [GtInstance(GT)])
        assert tally.det_records == ((0.9, True),)
        assert tally.num_gt == 1

    def test_second_det_on_same_gt_is_fp(self):
        dets = [ScoredDetection(GT, 0.9), ScoredDetection(GT, 0.8)]
        tally = match_image(dets, [GtInstance(GT)])
        assert tally.det_records == ((0.9, True), (0.8, False))

    def test_greedy_order_by_score(self):
        # The higher-scored det claims the ground truth even when listed last.
        dets = [ScoredDetection(GT, 0.3), ScoredDetection(GT, 0.9)]
        tally = match_image(dets, [GtInstance(GT)])
        assert sorted(tally.det_records) == [(0.3, False), (0.9, True)]

    def test_unmatched_det_is_fp(self):
        tally = match_image([ScoredDetection(FAR, 0.8)], [GtInstance(GT)])
        assert tally.det_records == ((0.8, False),)

    def test_iou_threshold_gate(self):
        # Half-overlapping det: IoU = 1/3, below the 0.5 gate.
        det = ScoredDetection(box(5, 0, 10, 10), 0.9)
        tally = match_image([det], [GtInstance(GT)])
        assert tally.det_records == ((0.9, False),)
        loose = match_image([det], [GtInstance(GT)], iou_thresh=0.3)
        assert loose.det_records == ((0.9, True),)

    def test_ignored_gt_absorbs_detection(self):
        tally = match_image(
            [ScoredDetection(GT, 0.9)], [GtInstance(GT, ignore=True)]
        )
        assert tally.det_records == ()  # neither TP nor FP
        assert tally.num_gt == 0

    def test_care_match_wins_over_ignore(self):
        gts = [GtInstance(GT), GtInstance(GT, ignore=True)]
        tally = match_image([ScoredDetection(GT, 0.9)], gts)
        assert tally.det_records == ((0.9, True),)
        assert tally.num_gt == 1

    def test_iod_mode_absorbs_contained_detection(self):
        region = box(0, 0, 100, 100)
        small = ScoredDetection(box(10, 10, 10, 10), 0.9)
        as_iou = match_image([small], [GtInstance(region, ignore=True)])
        assert as_iou.det_records == ((0.9, False),)  # IoU = 0.01, kept as FP
        as_iod = match_image(
            [small], [GtInstance(region, ignore=True)], ignore_mode="iod"
        )
        assert as_iod.det_records == ()  # fully inside, absorbed

    def test_input_order_does_not_matter(self):
        rng = random.Random(3)
        gts = [GtInstance(box(20 * i, 0, 10, 10)) for i in range(5)]
        dets = [
            ScoredDetection(box(20 * i, 0, 10, 10), 0.5 + 0.1 * i)
            for i in range(5)
        ]
        want = match_image(dets, gts)
        for _ in range(5):
            rng.shuffle(dets)
            got = match_image(dets, gts)
            assert sorted(got.det_records) == sorted(want.det_records)

    def test_validation(self):
        with pytest.raises(ValueError):
            match_image([], [], iou_thresh=0.0)
        with pytest.raises(ValueError):
            match_image([], [], iou_thresh=1.5)
        with pytest.raises(ValueError):
            match_image([], [], ignore_mode="nope")


class TestHarmonicMean:
    def test_basics(self):
        assert harmonic_mean(1.0, 1.0) == 1.0
        assert harmonic_mean(0.0, 0.9) == 0.0
        assert harmonic_mean(0.4, 0.6) == pytest.approx(0.48, abs=1e-12)
        assert harmonic_mean(0.3, 0.7) == harmonic_mean(0.7, 0.3)

    def test_published_value_pairs(self):
        assert harmonic_mean(0.801, 0.781) == pytest.approx(0.791, abs=5e-4)
        assert harmonic_mean(0.921, 0.882) == pytest.approx(0.901, abs=5e-4)


class TestSweepThresholds:
    def test_three_cutoff_frozen_example(self):
        tally = ImageTally(
            det_records=((0.9, True), (0.8, False), (0.7, True)), num_gt=3
        )
        result = sweep_thresholds([tally])
        assert result.best_threshold == 0.7
        assert result.hmean == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert result.precision == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert result.recall == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert result.matches == 2
        assert result.detections == 3
        assert result.gts == 3
        assert [p.threshold for p in result.curve] == [0.7, 0.8, 0.9]
        by_thr = {p.threshold: p for p in result.curve}
        assert (by_thr[0.8].tp, by_thr[0.8].fp) == (1, 1)
        assert by_thr[0.9].precision == 1.0

    def test_hmean_tie_prefers_higher_threshold(self):
        tally = ImageTally(
            det_records=((0.9, True), (0.5, True), (0.5, False), (0.5, False)),
            num_gt=2,
        )
        result = sweep_thresholds([tally])
        # H = 2/3 both at cutoff 0.5 and 0.9; the stricter cutoff wins.
        assert result.hmean == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert result.best_threshold == 0.9

    def test_pools_multiple_images(self):
        tallies = [
            ImageTally(det_records=((0.9, True),), num_gt=1),
            ImageTally(det_records=((0.8, False),), num_gt=1),
        ]
        result = sweep_thresholds(tallies)
        assert result.gts == 2
        assert result.recall == pytest.approx(0.5, abs=1e-12)
        assert result.precision == pytest.approx(1.0, abs=1e-12)
        assert result.best_threshold == 0.9

    def test_no_detections(self):
        result = sweep_thresholds([ImageTally(det_records=(), num_gt=4)])
        assert result.precision == 0.0
        assert result.recall == 0.0
        assert result.hmean == 0.0
        assert result.gts == 4
        assert result.curve == ()
        assert math.isinf(result.best_threshold)

    def test_no_gts_all_fp(self):
        result = sweep_thresholds(
            [ImageTally(det_records=((0.9, False),), num_gt=0)]
        )
        assert result.precision == 0.0
        assert result.recall == 0.0
        assert result.hmean == 0.0

    def test_perfect_detection(self):
        tally = ImageTally(det_records=((0.9, True), (0.8, True)), num_gt=2)
        result = sweep_thresholds([tally])
        assert result.hmean == 1.0
        assert result.best_threshold == 0.8

    def test_matches_filtered_rematch(self):
        # Sweeping by filtering pooled records must match re-running the
        # matcher on only the detections above each cutoff (greedy matching
        # in descending score order is prefix-stable).
        gts = [GtInstance(box(20 * i, 0, 10, 10)) for i in range(6)]
        dets = [
            ScoredDetection(box(20 * i + (4 if i % 2 else 0), 0, 10, 10), s)
            for i, s in enumerate((0.95, 0.9, 0.7, 0.6, 0.5, 0.3))
        ]
        full = match_image(dets, gts)
        for point in sweep_thresholds([full]).curve:
            subset = [d for d in dets if d.score >= point.threshold]
            again = match_image(subset, gts)
            assert sum(flag for _, flag in again.det_records) == point.tp
            assert sum(not flag for _, flag in again.det_records) == point.fp
