import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import clean_omega, disk_mask, disk_path, rect_mask, rect_path
from omegacount.contour import (
    clean_mask,
    convex_hull,
    count_local_minima,
    curvature_series,
    centroid,
    default_min_area,
    label_components,
    polygon_area,
    primary_contour,
    trace_boundary,
    upper_segment,
)
from omegacount.errors import (
    DegenerateContourError,
    DegenerateHullError,
    TooShortPathError,
    TooSmallToTraceError,
)
from omegacount.mask import ForegroundMask


def bits_mask(rows: list[str]) -> ForegroundMask:
    return ForegroundMask.from_array(np.array([[ch == "#" for ch in row] for row in rows]))


# ---------------------------------------------------------------- labeling

class TestLabelComponents:
    def test_empty_mask(self):
        assert label_components(bits_mask(["....", "...."]), min_area=1) == []

    def test_two_disjoint_squares(self):
        bits = np.zeros((30, 30), dtype=bool)
        bits[2:12, 2:12] = True
        bits[15:25, 16:26] = True
        comps = label_components(ForegroundMask.from_array(bits), min_area=1)
        assert [c.area for c in comps] == [100, 100]
        assert comps[0].bbox == (2, 11, 2, 11)
        assert comps[1].bbox == (16, 25, 15, 24)

    def test_diagonal_chain_is_one_component(self):
        comps = label_components(bits_mask(["#...", ".#..", "..#.", "...#"]), min_area=1)
        assert len(comps) == 1
        assert comps[0].area == 4

    def test_raster_order_of_first_pixel(self):
        comps = label_components(bits_mask(["...##", ".....", "##..."]), min_area=1)
        assert [c.label for c in comps] == [1, 2]
        assert comps[0].ymin == 0 and comps[0].xmin == 3
        assert comps[1].ymin == 2 and comps[1].xmin == 0

    def test_min_area_filter(self):
        bits = np.zeros((20, 20), dtype=bool)
        bits[1:11, 1:11] = True
        bits[15, 15] = True
        comps = label_components(ForegroundMask.from_array(bits), min_area=5)
        assert len(comps) == 1

    def test_default_min_area_scales_with_resolution(self):
        assert default_min_area(160, 120) == 100
        assert default_min_area(320, 240) == 400

    def test_opening_removes_speckle(self):
        bits = np.zeros((20, 20), dtype=bool)
        bits[2:12, 2:12] = True
        bits[16, 16] = True
        comps = label_components(ForegroundMask.from_array(bits), min_area=1, opening=True)
        assert len(comps) == 1
        cleaned = clean_mask(ForegroundMask.from_array(bits))
        assert not cleaned.bits[16, 16]
        assert cleaned.bits[5, 5]


# ---------------------------------------------------------------- tracing

class TestTraceBoundary:
    def test_3x3_square_has_8_boundary_points(self):
        mask = bits_mask(["###", "###", "###"])
        comp = label_components(mask, min_area=1)[0]
        path = trace_boundary(mask, comp)
        assert len(path.points) == 8

    def test_10x10_square_has_36_boundary_points(self):
        path = rect_path(10, 10)
        assert len(path.points) == 36

    def test_tracing_is_deterministic(self):
        mask, _ = clean_omega(seed=5, jitter=2)
        comp = label_components(mask, min_area=10)[0]
        a = trace_boundary(mask, comp)
        b = trace_boundary(mask, comp)
        assert (a.points == b.points).all()

    def test_consecutive_points_are_8_neighbors_and_closed(self):
        mask, _ = clean_omega(seed=6, jitter=2)
        path = primary_contour(mask, min_area=10)
        pts = path.points
        ring = np.vstack([pts, pts[:1]])
        steps = np.abs(np.diff(ring, axis=0))
        assert steps.max() == 1
        assert len(pts) >= 4

    def test_boundary_points_lie_on_border(self):
        mask, _ = clean_omega(seed=7, jitter=1)
        path = primary_contour(mask, min_area=10)
        padded = np.zeros((mask.height + 2, mask.width + 2), dtype=bool)
        padded[1:-1, 1:-1] = mask.bits
        for x, y in path.points:
            assert mask.bits[y, x]
            neighborhood = padded[y : y + 3, x : x + 3]
            assert not neighborhood.all()  # some 8-neighbor is outside

    def test_diagonal_tip_start_terminates(self):
        mask = bits_mask([
            "#.....",
            ".#....",
            ".###..",
            ".#####",
            ".#####",
        ])
        comp = label_components(mask, min_area=1)[0]
        path = trace_boundary(mask, comp)
        assert tuple(path.points[0]) == (0, 0)
        assert len(path.points) >= 8

    def test_too_small_component_raises(self):
        mask = bits_mask(["##", "#."])
        comp = label_components(mask, min_area=1)[0]
        with pytest.raises(TooSmallToTraceError):
            trace_boundary(mask, comp)


# ---------------------------------------------------------------- centroid

class TestCentroid:
    def test_single_pixel(self):
        bits = np.zeros((10, 10), dtype=bool)
        bits[7, 5] = True
        mask = ForegroundMask.from_array(bits)
        comp = label_components(mask, min_area=1)[0]
        assert centroid(mask, comp) == (5.0, 7.0)

    def test_square_at_origin(self):
        bits = np.zeros((12, 12), dtype=bool)
        bits[0:10, 0:10] = True
        mask = ForegroundMask.from_array(bits)
        comp = label_components(mask, min_area=1)[0]
        assert centroid(mask, comp) == (4.5, 4.5)

    def test_l_shape_matches_brute_force(self):
        mask = bits_mask(["#....", "#....", "#####"])
        comp = label_components(mask, min_area=1)[0]
        cx, cy = centroid(mask, comp)
        ys, xs = np.nonzero(mask.bits)
        assert cx == pytest.approx(xs.mean())
        assert cy == pytest.approx(ys.mean())

    def test_centroid_inside_bbox(self):
        mask, _ = clean_omega(seed=8, jitter=2)
        comp = label_components(mask, min_area=10)[0]
        cx, cy = centroid(mask, comp)
        assert comp.xmin <= cx <= comp.xmax
        assert comp.ymin <= cy <= comp.ymax


# ---------------------------------------------------------------- upper segment

class TestUpperSegment:
    def test_full_fraction_returns_whole_path(self):
        path = disk_path(10)
        seg = upper_segment(path, 1.0)
        assert (seg == path.points).all()

    def test_rectangle_third(self):
        path = rect_path(12, 31)  # 31 rows: h = ymax - ymin = 30
        assert path.h == 30
        seg = upper_segment(path, 1.0 / 3.0)
        assert (seg[:, 1] <= path.ymin + 10).all()
        expected = path.points[path.points[:, 1] <= path.ymin + 10]
        assert len(seg) == len(expected)

    def test_omega_segment_spans_head_and_shoulder_tops(self):
        mask, truth = clean_omega(seed=3)
        path = primary_contour(mask, min_area=10)
        seg = upper_segment(path, 1.0 / 3.0)
        assert seg[:, 1].min() == path.ymin  # head apex present
        # both shoulder sides reached: segment x-extent spans most of the span
        assert seg[:, 0].max() - seg[:, 0].min() >= truth.shoulder_span - 4

    def test_segment_is_contiguous_arc(self):
        mask, _ = clean_omega(seed=4)
        path = primary_contour(mask, min_area=10)
        seg = upper_segment(path, 1.0 / 3.0)
        steps = np.abs(np.diff(seg, axis=0))
        assert steps.max() == 1  # single arc after rotation, no jump inside

    def test_flat_contour_degenerates(self):
        path = rect_path(20, 1)
        with pytest.raises((DegenerateContourError, ValueError)):
            upper_segment(path, 0)


# ---------------------------------------------------------------- convex hull

from oracles import brute_force_hull  # noqa: E402  (shared with acceptance)


class TestConvexHull:
    def test_square_corners(self):
        pts = np.array([[0, 0], [4, 0], [4, 4], [0, 4]])
        hull = convex_hull(pts)
        assert set(map(tuple, hull)) == set(map(tuple, pts))

    def test_interior_point_excluded(self):
        pts = np.array([[0, 0], [4, 0], [4, 4], [0, 4], [2, 2]])
        hull = convex_hull(pts)
        assert (2, 2) not in set(map(tuple, hull))
        assert len(hull) == 4

    def test_collinear_edge_points_excluded(self):
        pts = np.array([[0, 0], [2, 0], [4, 0], [4, 4], [0, 4]])
        assert (2, 0) not in set(map(tuple, convex_hull(pts)))

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateHullError):
            convex_hull(np.array([[0, 0], [1, 1]]))
        with pytest.raises(DegenerateHullError):
            convex_hull(np.array([[0, 0], [1, 1], [2, 2], [3, 3]]))

    @given(data=st.data(), n=st.integers(3, 12))
    @settings(max_examples=120, deadline=None)
    def test_matches_brute_force_oracle(self, data, n):
        pts = np.array(
            [
                [data.draw(st.integers(0, 30)), data.draw(st.integers(0, 30))]
                for _ in range(n)
            ]
        )
        oracle = brute_force_hull(pts)
        try:
            hull = convex_hull(pts)
        except DegenerateHullError:
            assert oracle is None
            return
        assert oracle is not None
        want_verts, want_area = oracle
        assert set(map(tuple, hull)) == want_verts
        assert polygon_area(hull) == want_area

    def test_every_input_point_inside_hull(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            pts = rng.integers(0, 60, size=(20, 2))
            try:
                hull = convex_hull(pts)
            except DegenerateHullError:
                continue
            hx, hy = hull[:, 0], hull[:, 1]
            nx, ny = np.roll(hx, -1), np.roll(hy, -1)
            for px, py in pts:
                cross = (nx - hx) * (py - hy) - (ny - hy) * (px - hx)
                assert (cross <= 0).all() or (cross >= 0).all()

    def test_hull_area_bounded_by_bbox(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            pts = rng.integers(0, 50, size=(15, 2))
            try:
                hull = convex_hull(pts)
            except DegenerateHullError:
                continue
            bbox = (pts[:, 0].max() - pts[:, 0].min()) * (pts[:, 1].max() - pts[:, 1].min())
            assert polygon_area(hull) <= bbox + 1e-9


class TestPolygonArea:
    def test_unit_square(self):
        assert polygon_area(np.array([[0, 0], [1, 0], [1, 1], [0, 1]])) == 1.0

    def test_right_triangle(self):
        assert polygon_area(np.array([[0, 0], [4, 0], [0, 3]])) == 6.0

    @pytest.mark.parametrize("n", [3, 5, 8, 12, 17])
    def test_regular_ngon_analytic(self, n):
        r = 5.0
        theta = 2 * np.pi * np.arange(n) / n
        poly = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
        expected = 0.5 * n * r * r * math.sin(2 * math.pi / n)
        assert polygon_area(poly) == pytest.approx(expected, abs=1e-9)

    def test_degenerate(self):
        with pytest.raises(DegenerateHullError):
            polygon_area(np.array([[0, 0], [1, 1]]))


# ---------------------------------------------------------------- curvature

class TestCurvatureSeries:
    @pytest.mark.parametrize("step", [(1, 0), (0, 1), (1, 1), (2, 1), (3, -2)])
    def test_exact_straight_segments_are_flat(self, step):
        pts = np.array([(i * step[0], i * step[1]) for i in range(50)])
        series = curvature_series(pts)
        assert np.abs(series).max() < 0.01

    @pytest.mark.parametrize("r", [20, 40, 60])
    def test_digitized_circle_curvature(self, r):
        path = disk_path(r)
        series = curvature_series(path.points, closed=True)
        assert np.abs(series).mean() == pytest.approx(1.0 / r, rel=0.05)

    def test_circle_sign_constant(self):
        for r in (20, 30, 40, 50, 60):
            series = curvature_series(disk_path(r).points, closed=True)
            assert (series > 0).all() or (series < 0).all()

    def test_radius_scaling(self):
        k20 = np.abs(curvature_series(disk_path(20).points, closed=True)).mean()
        k40 = np.abs(curvature_series(disk_path(40).points, closed=True)).mean()
        assert k20 / k40 == pytest.approx(2.0, rel=0.10)

    def test_too_short_path(self):
        pts = np.array([[i, 0] for i in range(10)])
        with pytest.raises(TooShortPathError):
            curvature_series(pts, smooth_window=7, delta=5)

    def test_parameter_validation(self):
        pts = np.array([[i, 0] for i in range(60)])
        with pytest.raises(ValueError):
            curvature_series(pts, smooth_window=4)
        with pytest.raises(ValueError):
            curvature_series(pts, delta=0)


class TestCountLocalMinima:
    def test_constant_series_has_none(self):
        assert count_local_minima(np.ones(20), neighborhood=3) == 0

    def test_alternating_series(self):
        assert count_local_minima(np.array([3, 1, 3, 1, 3]), neighborhood=1) == 2

    def test_plateaus_do_not_count(self):
        assert count_local_minima(np.array([3, 1, 1, 3, 5]), neighborhood=2) == 0

    def test_absolute_values_used(self):
        # |.| of [-3, -1, -3] has a strict minimum at index 1
        assert count_local_minima(np.array([-3.0, -1.0, -3.0]), neighborhood=1) == 1

    @given(
        values=st.lists(st.integers(0, 6), min_size=3, max_size=40),
        nb=st.integers(1, 5),
    )
    @settings(max_examples=80, deadline=None)
    def test_matches_direct_scan(self, values, nb):
        v = np.abs(np.array(values, dtype=float))
        expected = 0
        for i in range(len(v)):
            window = [v[j] for j in range(max(0, i - nb), min(len(v), i + nb + 1)) if j != i]
            if window and all(v[i] < x for x in window):
                expected += 1
        assert count_local_minima(np.array(values, dtype=float), nb) == expected
