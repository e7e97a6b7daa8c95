import json
import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import clean_omega, disk_path, rect_path
from omegacount.contour import primary_contour
from omegacount.descriptors import (
    OMEGA_CONFIG_KEYS,
    CalibrationGrid,
    OmegaConfig,
    calibrate,
    calibrate_detailed,
    classify,
    descriptor_convexity,
    descriptor_curvature,
    descriptor_dimensions,
    descriptor_radial,
    evaluate,
)
from omegacount.errors import CalibrationError
from omegacount.mask import ForegroundMask
from omegacount.synth import OmegaShapeParams, gen_omega

CIRCLE_RATIO = math.sqrt(5.0) / math.sqrt(8.0)  # chords at depths r/3 and 2r/3
CIRCLE_RS = 1.2571 / 0.91669  # bbox over circular-segment area, upper third


@pytest.fixture(scope="module")
def circle40():
    return disk_path(40)


@pytest.fixture(scope="module")
def omega_contour():
    mask, _ = clean_omega(seed=3, jitter=1)
    return primary_contour(mask)


class TestDimensions:
    def test_rectangle_ratio_is_exactly_one(self):
        m1, m2, ratio, vote, flag = descriptor_dimensions(rect_path(30, 60), OmegaConfig())
        assert flag is None
        assert m1 == m2
        assert m1 == pytest.approx(30, abs=2)  # Xmax - Xmin of 30 columns is 29
        assert ratio == 1.0
        assert vote == 0  # |1 - 0.45| > 0.15

    def test_circle_matches_analytic_chords(self, circle40):
        _, _, ratio, _, flag = descriptor_dimensions(circle40, OmegaConfig())
        assert flag is None
        assert ratio == pytest.approx(CIRCLE_RATIO, rel=0.05)

    def test_omega_matches_generator_truth(self):
        mask, truth = clean_omega(seed=3)
        path = primary_contour(mask)
        m1, m2, ratio, vote, flag = descriptor_dimensions(path, OmegaConfig())
        assert flag is None
        assert m1 == pytest.approx(truth.neck_width, abs=2)
        assert m2 == pytest.approx(truth.shoulder_span, abs=2)
        assert ratio == pytest.approx(0.40, abs=0.05)
        assert vote == 1

    def test_undersized_contour_abstains(self):
        m1, m2, ratio, vote, flag = descriptor_dimensions(rect_path(20, 8), OmegaConfig())
        assert (vote, flag) == (0, "undersized")
        assert ratio is None


class TestRadial:
    def test_circle_apex_is_not_farthest(self, circle40):
        s_prime, max_other, vote, flag = descriptor_radial(circle40, OmegaConfig())
        assert flag is None
        assert vote == 0
        # analytic: distances from S grow away from the apex
        assert max_other > s_prime

    def test_tall_omega_head_passes(self, omega_contour):
        cfg = OmegaConfig()
        s_prime, max_other, vote, flag = descriptor_radial(omega_contour, cfg)
        assert flag is None
        # head half-width < kappa_s * h for this silhouette
        assert cfg.kappa_s * omega_contour.h > 12
        assert vote == 1
        assert s_prime > max_other

    def test_single_row_contour_degenerates(self):
        bits = np.zeros((10, 40), dtype=bool)
        bits[4, 5:35] = True
        path = primary_contour(ForegroundMask.from_array(bits), min_area=5)
        _, _, vote, flag = descriptor_radial(path, OmegaConfig())
        assert (vote, flag) == (0, "no-competing-points")


class TestCurvature:
    def test_rectangle_top_has_no_strict_minima(self):
        count, vote, flag = descriptor_curvature(rect_path(40, 60), OmegaConfig())
        assert flag is None
        assert count == 0
        assert vote == 0

    def test_omega_minima_in_band(self, omega_contour):
        cfg = OmegaConfig()
        count, vote, flag = descriptor_curvature(omega_contour, cfg)
        assert flag is None
        assert cfg.a1 < count < cfg.a2
        assert vote == 1

    def test_short_segment_degenerates(self):
        path = rect_path(5, 12)
        count, vote, flag = descriptor_curvature(path, OmegaConfig())
        assert (count, vote, flag) == (None, 0, "segment-too-short")


class TestConvexity:
    def test_rectangle_rs_exactly_one(self):
        a_r, a_c, r_s, vote, flag = descriptor_convexity(rect_path(30, 60), OmegaConfig())
        assert flag is None
        assert r_s == 1.0
        assert vote == 0  # r1 < R_s strict

    def test_circle_upper_third_analytic(self, circle40):
        _, _, r_s, vote, flag = descriptor_convexity(circle40, OmegaConfig())
        assert flag is None
        assert r_s == pytest.approx(CIRCLE_RS, rel=0.05)
        assert vote == 1

    def test_rs_at_least_one_when_defined(self, omega_contour, circle40):
        for path in (omega_contour, circle40, rect_path(25, 50)):
            _, _, r_s, _, flag = descriptor_convexity(path, OmegaConfig())
            assert flag is None
            assert r_s >= 1.0


class TestClassify:
    def test_all_votes_pass(self, omega_contour):
        out = classify(omega_contour, OmegaConfig())
        assert (out.omega_d, out.omega_m, out.omega_k, out.omega_s) == (1, 1, 1, 1)
        assert out.h_score == 1.0
        assert out.is_human is True

    def test_all_votes_fail(self):
        out = classify(rect_path(30, 60), OmegaConfig())
        assert (out.omega_d, out.omega_m, out.omega_k, out.omega_s) == (0, 0, 0, 0)
        assert out.h_score == 0.0
        assert out.is_human is False

    def test_three_votes_at_threshold(self, omega_contour):
        # force the curvature vote off; 0.75 >= 0.75 still passes
        out = classify(omega_contour, replace(OmegaConfig(), a1=0, a2=1))
        assert (out.omega_d, out.omega_m, out.omega_k, out.omega_s) == (1, 1, 0, 1)
        assert out.h_score == 0.75
        assert out.is_human is True

    def test_h_is_exact_weighted_sum(self, omega_contour, circle40):
        cfg = OmegaConfig(s_d=0.4, s_m=0.1, s_k=0.3, s_s=0.2, omega_th=0.5)
        for path in (omega_contour, circle40, rect_path(20, 40)):
            out = classify(path, cfg)
            expected = (
                cfg.s_d * out.omega_d + cfg.s_m * out.omega_m
                + cfg.s_k * out.omega_k + cfg.s_s * out.omega_s
            )
            assert out.h_score == expected
            assert out.is_human == (out.h_score >= cfg.omega_th)

    def test_weight_scale_invariance(self, omega_contour, circle40):
        base = OmegaConfig(s_d=0.5, s_m=0.25, s_k=0.5, s_s=0.25, omega_th=0.6)
        scaled = OmegaConfig(s_d=0.2, s_m=0.1, s_k=0.2, s_s=0.1, omega_th=0.24)
        for path in (omega_contour, circle40, rect_path(20, 40)):
            assert classify(path, base).is_human == classify(path, scaled).is_human

    def test_translation_invariance(self):
        mask, _ = clean_omega(seed=13, jitter=2, center_x=60)
        path = primary_contour(mask)
        base = classify(path, OmegaConfig())
        for dx, dy in ((17, 5), (-23, 11), (100, -3), (0, 250)):
            shifted = classify(path.translated(dx, dy), OmegaConfig())
            assert shifted == base

    def test_scale_robustness(self):
        cfg = OmegaConfig()
        small = OmegaShapeParams(a_h=11, b_h=6, neck_width=16, shoulder_span=42,
                                 shoulder_drop=4, jitter=0, seed=3, fig_height=100)
        big = OmegaShapeParams(a_h=22, b_h=12, neck_width=32, shoulder_span=84,
                               shoulder_drop=8, jitter=0, seed=3, fig_height=200)
        p1 = primary_contour(gen_omega(small, (160, 120))[0])
        p2 = primary_contour(gen_omega(big, (320, 240))[0], min_area=100)
        _, _, r1, _, _ = descriptor_dimensions(p1, cfg)
        _, _, r2, _, _ = descriptor_dimensions(p2, cfg)
        assert abs(r1 - r2) <= 0.05
        _, _, s1, _, _ = descriptor_convexity(p1, cfg)
        _, _, s2, _, _ = descriptor_convexity(p2, cfg)
        assert abs(s1 - s2) <= 0.07

    def test_degenerate_contours_never_raise(self):
        flats = []
        bits = np.zeros((10, 40), dtype=bool)
        bits[4:6, 5:35] = True
        flats.append(primary_contour(ForegroundMask.from_array(bits), min_area=5))
        bits = np.zeros((10, 40), dtype=bool)
        bits[4, 5:35] = True
        flats.append(primary_contour(ForegroundMask.from_array(bits), min_area=5))
        for path in flats:
            out = classify(path, OmegaConfig())
            assert out.is_human is False
            assert out.degenerate
            assert (out.omega_d, out.omega_m, out.omega_k, out.omega_s) == (0, 0, 0, 0)


class TestConfigSerialization:
    def test_exact_flat_keys(self):
        data = json.loads(OmegaConfig().to_json())
        assert set(data) == set(OMEGA_CONFIG_KEYS)
        assert data["row_band"] is None

    def test_roundtrip(self):
        cfg = OmegaConfig(t_d=0.4, eps_d=0.1, a1=2, a2=9, row_band=3, omega_th=0.6)
        assert OmegaConfig.from_json(cfg.to_json()) == cfg

    def test_validation(self):
        with pytest.raises(ValueError):
            OmegaConfig(t_d=1.5)
        with pytest.raises(ValueError):
            OmegaConfig(a1=5, a2=5)
        with pytest.raises(ValueError):
            OmegaConfig(r1=0.5)
        with pytest.raises(ValueError):
            OmegaConfig(omega_th=2.0)


def _two_class_samples(n_each=12):
    samples = []
    for i in range(n_each):
        mask, _ = clean_omega(seed=100 + i, jitter=1, center_x=50 + 3 * (i % 4))
        samples.append((primary_contour(mask), True))
        samples.append((rect_path(20 + i, 40 + 2 * i), False))
    return samples


class TestCalibrate:
    def test_separable_corpus_reaches_perfect_accuracy(self):
        samples = _two_class_samples()
        cfg, train_acc = calibrate_detailed(samples)
        assert train_acc == 1.0
        assert evaluate(samples, cfg) == 1.0

    def test_band_excludes_constant_ratio_distractors(self):
        # every silhouette measures ratio ~0.4, every distractor exactly 1.0
        samples = _two_class_samples()
        cfg = calibrate(samples)
        assert cfg.t_d - cfg.eps_d > 0.0
        assert not (cfg.t_d - cfg.eps_d <= 1.0 <= cfg.t_d + cfg.eps_d)

    def test_deterministic(self):
        samples = _two_class_samples(8)
        assert calibrate(samples) == calibrate(samples)

    def test_single_class_rejected(self):
        samples = [(rect_path(20, 40), False), (rect_path(22, 44), False)]
        with pytest.raises(CalibrationError):
            calibrate(samples)
        with pytest.raises(CalibrationError):
            evaluate(samples, OmegaConfig())

    def test_grid_is_honored(self):
        samples = _two_class_samples(6)
        grid = CalibrationGrid(t_d=(0.40,), eps_d=(0.05,), a1=(1,), a2=(20,),
                               r1=(1.00,), r2=(2.20,))
        cfg = calibrate(samples, grid=grid)
        assert (cfg.t_d, cfg.eps_d, cfg.a1, cfg.a2) == (0.40, 0.05, 1, 20)

    def test_corpus_calibration_beats_bar(self, calibrated, corpus_dirs):
        from conftest import corpus_samples

        cfg, train_acc = calibrated
        assert train_acc >= 0.90
        _, test_manifest = corpus_dirs
        assert evaluate(corpus_samples(test_manifest), cfg) >= 0.90
