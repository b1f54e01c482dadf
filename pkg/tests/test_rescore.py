"""Score fusion: peak-window mass, vector aggregation, pattern classing."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import score_vectors
from quadkit import (
    DEFAULT_GAMMA,
    PeakPattern,
    ScoredDetection,
    Quad,
    fuse,
    peak_mass,
    peak_pattern,
    s_obd,
)

UNIFORM_56 = np.full(56, 1.0 / 56.0)
ONE_HOT_56 = np.eye(56)[10]


class TestPeakMass:
    def test_interior_peak_frozen(self):
        assert peak_mass([0, 0.1, 0.6, 0.2, 0.1, 0]) == pytest.approx(1.0, abs=1e-12)

    def test_head_clipped_frozen(self):
        assert peak_mass([0.9, 0.1, 0, 0, 0]) == pytest.approx(1.0, abs=1e-12)

    def test_tail_clipped(self):
        assert peak_mass([0, 0, 0, 0.1, 0.9]) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_56_frozen(self):
        # Five uniform entries of 1/56 under the peak window.
        assert peak_mass(UNIFORM_56) == pytest.approx(5.0 / 56.0, abs=1e-12)

    def test_window_excludes_distant_mass(self):
        v = np.zeros(20)
        v[3] = 0.5
        v[15] = 0.4
        assert peak_mass(v) == pytest.approx(0.5, abs=1e-12)

    def test_tied_peaks_take_heavier_window(self):
        # Two equal maxima; the one with more neighbourhood mass wins.
        v = [0.4, 0.0, 0.0, 0.0, 0.0, 0.2, 0.4, 0.2, 0.0, 0.0]
        assert peak_mass(v) == pytest.approx(0.8, abs=1e-12)

    @given(score_vectors())
    def test_bounds(self, values):
        got = peak_mass(values)
        assert max(values) - 1e-12 <= got <= sum(values) + 1e-12

    @given(score_vectors())
    def test_reversal_invariance(self, values):
        assert peak_mass(values) == pytest.approx(
            peak_mass(values[::-1]), abs=1e-9
        )

    def test_split_mass_strictly_lower(self):
        # Splitting a concentrated unit mass into two far-apart peaks
        # strictly lowers the captured window mass.
        concentrated = np.zeros(56)
        concentrated[20] = 1.0
        split = np.zeros(56)
        split[14] = 0.5
        split[34] = 0.5
        assert peak_mass(split) < peak_mass(concentrated)

    def test_short_vectors_are_total(self):
        # A two-entry vector fits entirely inside the clipped window.
        assert peak_mass([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            peak_mass([])
        with pytest.raises(ValueError):
            peak_mass(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            peak_mass([0.1, np.nan, 0.2])


class TestSObd:
    def test_uniform_frozen(self):
        assert s_obd([UNIFORM_56] * 8) == pytest.approx(5.0 / 56.0, abs=1e-12)

    def test_mixed_frozen(self):
        vectors = [ONE_HOT_56] * 4 + [UNIFORM_56] * 4
        expected = (4 * 1.0 + 4 * 5.0 / 56.0) / 8.0
        assert s_obd(vectors) == pytest.approx(expected, abs=1e-12)
        assert s_obd(vectors) == pytest.approx(0.5446, abs=5e-5)

    def test_requires_exactly_eight_vectors(self):
        with pytest.raises(ValueError):
            s_obd([UNIFORM_56] * 7)
        with pytest.raises(ValueError):
            s_obd([UNIFORM_56] * 9)

    def test_clamped_to_unit_interval(self):
        heavy = np.ones(12)  # un-normalised mass, window sums to 5.0
        assert s_obd([heavy] * 8) == 1.0

    def test_accepts_2d_array(self):
        stacked = np.stack([UNIFORM_56] * 8)
        assert s_obd(stacked) == pytest.approx(5.0 / 56.0, abs=1e-12)


class TestFuse:
    def test_frozen_value(self):
        assert fuse(1.0, 0.5, 1.4) == pytest.approx(0.65, abs=1e-12)

    def test_default_gamma(self):
        assert DEFAULT_GAMMA == 1.4
        assert fuse(1.0, 0.5) == pytest.approx(0.65, abs=1e-12)

    def test_gamma_endpoints(self):
        assert fuse(0.8, 0.3, 0.0) == pytest.approx(0.8, abs=1e-12)
        assert fuse(0.8, 0.3, 2.0) == pytest.approx(0.3, abs=1e-12)

    def test_gamma_validated(self):
        with pytest.raises(ValueError):
            fuse(0.5, 0.5, -0.1)
        with pytest.raises(ValueError):
            fuse(0.5, 0.5, 2.1)

    @given(
        st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 2)
    )
    def test_monotone_in_box_score(self, lo, hi, other, gamma):
        a, b = sorted((lo, hi))
        assert fuse(a, other, gamma) <= fuse(b, other, gamma) + 1e-12

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_output_in_unit_interval(self, s_box, s_vec):
        assert 0.0 <= fuse(s_box, s_vec) <= 1.0


class TestPeakPattern:
    def test_one_hot(self):
        assert peak_pattern(ONE_HOT_56) is PeakPattern.ONE_PEAK

    def test_two_equal_maxima_frozen(self):
        assert peak_pattern([0.4, 0, 0.4, 0, 0.2], 0.5) is PeakPattern.MULTI_PEAK

    def test_secondary_below_prominence(self):
        assert peak_pattern([1.0, 0, 0.4, 0, 0], 0.5) is PeakPattern.ONE_PEAK

    def test_secondary_at_prominence_counts(self):
        assert peak_pattern([1.0, 0, 0.5, 0, 0], 0.5) is PeakPattern.MULTI_PEAK

    def test_plateau_counts_once(self):
        assert peak_pattern([0, 0.4, 0.4, 0]) is PeakPattern.ONE_PEAK

    def test_monotone_ramp_single_peak(self):
        assert peak_pattern(np.linspace(0, 1, 12)) is PeakPattern.ONE_PEAK

    def test_all_zero_is_one_peak(self):
        assert peak_pattern(np.zeros(8)) is PeakPattern.ONE_PEAK

    def test_validation(self):
        with pytest.raises(ValueError):
            peak_pattern([0.5, 0.5])
        with pytest.raises(ValueError):
            peak_pattern(ONE_HOT_56, prominence=0.0)
        with pytest.raises(ValueError):
            peak_pattern(ONE_HOT_56, prominence=1.5)


class TestScoredDetection:
    QUAD = Quad.from_coords((0, 0, 10, 0, 10, 10, 0, 10))

    def test_score_prefers_fused(self):
        det = ScoredDetection(self.QUAD, s_box=0.9)
        assert det.score == 0.9
        fused = det.with_fused(0.7)
        assert fused.score == 0.7
        assert fused.s_box == 0.9

    def test_ke_scores_shape_validated(self):
        with pytest.raises(ValueError):
            ScoredDetection(self.QUAD, 0.9, ke_scores=np.zeros((7, 56)))

    def test_scores_must_be_finite(self):
        with pytest.raises(ValueError):
            ScoredDetection(self.QUAD, s_box=float("nan"))
        with pytest.raises(ValueError):
            ScoredDetection(self.QUAD, s_box=0.5, fused=float("inf"))

    def test_full_rescore_path(self):
        ke_scores = np.stack([ONE_HOT_56] * 8)
        det = ScoredDetection(self.QUAD, 0.8, ke_scores=ke_scores)
        fused = det.with_fused(fuse(det.s_box, s_obd(det.ke_scores)))
        # s_obd = 1.0 here, so the fused score rises above s_box at γ=1.4.
        assert fused.score == pytest.approx((0.6 * 0.8 + 1.4) / 2, abs=1e-12)
        assert fused.score > det.s_box
