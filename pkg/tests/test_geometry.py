import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparc.geometry import (
    FULL,
    BoundingBox,
    ImageDims,
    PerturbationSpec,
    PointHypothesis,
    ResolutionBudget,
    TokenCounter,
    denormalize,
    expand,
    iou,
    overlap_ratio,
    perturb,
    point_to_crop,
    resize_dims,
    visual_tokens,
)


def unit_cell_intersection(a, b):
    """Independent oracle for integer boxes: count unit lattice cells in both."""
    nx = max(0, min(a[2], b[2]) - max(a[0], b[0]))
    ny = max(0, min(a[3], b[3]) - max(a[1], b[1]))
    return sum(1 for _ in range(int(nx)) for _ in range(int(ny)))


def box(*coords):
    return BoundingBox(*coords)


@st.composite
def boxes(draw, min_coord=0.0, max_coord=1500.0, max_side=500.0):
    x1 = draw(st.floats(min_coord, max_coord, allow_nan=False))
    y1 = draw(st.floats(min_coord, max_coord, allow_nan=False))
    w = draw(st.floats(0.5, max_side, allow_nan=False))
    h = draw(st.floats(0.5, max_side, allow_nan=False))
    return BoundingBox(x1, y1, x1 + w, y1 + h)


class TestBoundingBox:
    def test_rejects_inverted(self):
        with pytest.raises(ValueError):
            BoundingBox(10, 0, 5, 10)
        with pytest.raises(ValueError):
            BoundingBox(0, 10, 10, 5)

    def test_rejects_zero_area(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, 0, 10)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, math.inf, 10)
        with pytest.raises(ValueError):
            BoundingBox(0, math.nan, 10, 10)

    def test_derived_quantities(self):
        b = box(10, 20, 110, 220)
        assert b.width == 100 and b.height == 200
        assert b.area == 20000
        assert b.center == (60, 120)
        assert b.half_diagonal == pytest.approx(math.hypot(100, 200) / 2)


class TestIou:
    def test_identity(self):
        b = box(0, 0, 10, 10)
        assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou(box(0, 0, 10, 10), box(20, 20, 30, 30)) == 0.0

    def test_partial_overlap_against_cell_oracle(self):
        a, b = (0, 0, 100, 100), (10, 0, 110, 100)
        inter = unit_cell_intersection(a, b)
        assert inter == 9000
        union = 100 * 100 + 100 * 100 - inter
        assert union == 11000
        assert iou(box(*a), box(*b)) == pytest.approx(9 / 11, abs=1e-12)

    @settings(max_examples=200)
    @given(boxes(), boxes())
    def test_symmetric(self, a, b):
        assert iou(a, b) == iou(b, a)

    @settings(max_examples=200)
    @given(boxes())
    def test_self_iou_is_one(self, a):
        assert iou(a, a) == 1.0

    @settings(max_examples=200)
    @given(boxes(), boxes())
    def test_zero_iff_disjoint(self, a, b):
        # independent disjointness test on the interval projections
        disjoint = (
            min(a.x2, b.x2) <= max(a.x1, b.x1) or min(a.y2, b.y2) <= max(a.y1, b.y1)
        )
        assert (iou(a, b) == 0.0) == disjoint

    @settings(max_examples=200)
    @given(boxes(), boxes())
    def test_bounded(self, a, b):
        assert 0.0 <= iou(a, b) <= 1.0


class TestOverlapRatio:
    def test_full_overlap(self):
        gt = box(100, 100, 200, 200)
        assert overlap_ratio(gt, gt) == 1.0

    def test_half_shift(self):
        gt = box(100, 100, 200, 200)
        assert overlap_ratio(box(150, 100, 250, 200), gt) == pytest.approx(0.5)

    def test_quarter_shift(self):
        gt = box(100, 100, 200, 200)
        assert overlap_ratio(box(150, 150, 250, 250), gt) == pytest.approx(0.25)

    def test_asymmetric_normalizer(self):
        # intersection over gt area, not over crop area
        gt = box(0, 0, 10, 10)
        crop = box(0, 0, 20, 10)
        assert overlap_ratio(crop, gt) == 1.0
        assert overlap_ratio(gt, crop) == pytest.approx(0.5)


class TestPerturb:
    DIMS = ImageDims(1000, 1000)

    def test_zero_shift_is_identity_for_any_seed(self):
        gt = box(100, 100, 200, 200)
        for seed in (0, 1, 12345):
            assert perturb(gt, PerturbationSpec(r=0), self.DIMS, seed) == gt

    def test_explicit_direction(self):
        gt = box(100, 100, 200, 200)
        spec = PerturbationSpec(r=50, direction=(1.0, 0.0))
        assert perturb(gt, spec, self.DIMS, 0) == box(150, 100, 250, 200)

    def test_half_diagonal_diagonal_shift(self):
        gt = box(100, 100, 200, 200)
        inv = 1 / math.sqrt(2)
        spec = PerturbationSpec(r=gt.half_diagonal, direction=(inv, inv))
        shifted = perturb(gt, spec, self.DIMS, 0)
        assert shifted.x1 == pytest.approx(150, abs=1e-9)
        assert shifted.y1 == pytest.approx(150, abs=1e-9)
        assert overlap_ratio(shifted, gt) == pytest.approx(0.25, abs=1e-9)

    def test_seeded_direction_is_deterministic(self):
        gt = box(300, 300, 400, 400)
        spec = PerturbationSpec(r=40)
        assert perturb(gt, spec, self.DIMS, 7) == perturb(gt, spec, self.DIMS, 7)
        assert perturb(gt, spec, self.DIMS, 7) != perturb(gt, spec, self.DIMS, 8)

    def test_keeps_size_away_from_borders(self):
        gt = box(400, 400, 500, 480)
        shifted = perturb(gt, PerturbationSpec(r=30), self.DIMS, 3)
        assert shifted.width == pytest.approx(gt.width)
        assert shifted.height == pytest.approx(gt.height)

    def test_intersect_mode_trims_at_border(self):
        gt = box(0, 0, 100, 100)
        spec = PerturbationSpec(r=50, direction=(-1.0, 0.0))
        shifted = perturb(gt, spec, self.DIMS, 0)
        assert shifted == box(0, 0, 50, 100)

    def test_clamp_mode_translates_back_inside(self):
        gt = box(0, 0, 100, 100)
        spec = PerturbationSpec(r=50, direction=(-1.0, 0.0), clamp_mode="clamp-to-image")
        shifted = perturb(gt, spec, self.DIMS, 0)
        assert shifted == box(0, 0, 100, 100)

    def test_gt_outside_image_rejected(self):
        gt = box(900, 900, 1100, 1100)
        with pytest.raises(ValueError):
            perturb(gt, PerturbationSpec(r=10), self.DIMS, 0)

    def test_shift_beyond_diagonal_rejected(self):
        gt = box(100, 100, 200, 200)
        with pytest.raises(ValueError):
            perturb(gt, PerturbationSpec(r=5000), self.DIMS, 0)

    def test_non_unit_direction_rejected(self):
        with pytest.raises(ValueError):
            PerturbationSpec(r=10, direction=(1.0, 1.0))

    @settings(max_examples=200)
    @given(st.integers(0, 2**31), st.floats(0, 2 * math.pi, exclude_max=True))
    def test_overlap_non_increasing_in_r(self, seed, angle):
        # unclamped sweep: image far larger than any shift
        dims = ImageDims(100000, 100000)
        gt = box(50000, 50000, 50100, 50080)
        direction = (math.cos(angle), math.sin(angle))
        norm = math.hypot(*direction)
        direction = (direction[0] / norm, direction[1] / norm)
        rs = [0, 10, 25, 40, 70, 100]
        overlaps = [
            overlap_ratio(perturb(gt, PerturbationSpec(r=r, direction=direction), dims, seed), gt)
            if r > 0
            else 1.0
            for r in rs
        ]
        for earlier, later in zip(overlaps, overlaps[1:]):
            assert later <= earlier + 1e-12


class TestExpand:
    def test_scale_one_is_identity(self):
        b = box(10.5, 20.25, 30.75, 40.125)
        assert expand(b, 1, ImageDims(100, 100)) == b

    def test_symmetric_doubling(self):
        assert expand(box(100, 100, 200, 200), 2, ImageDims(1000, 1000)) == box(50, 50, 250, 250)

    def test_clamped_at_corner(self):
        assert expand(box(10, 10, 110, 110), 3, ImageDims(500, 500)) == box(0, 0, 210, 210)

    def test_scale_below_one_rejected(self):
        with pytest.raises(ValueError):
            expand(box(0, 0, 10, 10), 0.5, ImageDims(100, 100))

    @settings(max_examples=200)
    @given(boxes(min_coord=5000, max_coord=5400, max_side=50), st.floats(1, 3), st.floats(1, 3))
    def test_composition_without_clamping(self, b, s1, s2):
        # boxes kept far from every border so no clamping occurs
        dims = ImageDims(100000, 100000)
        once = expand(expand(b, s1, dims), s2, dims)
        direct = expand(b, s1 * s2, dims)
        assert once.x1 == pytest.approx(direct.x1, abs=1e-6)
        assert once.y1 == pytest.approx(direct.y1, abs=1e-6)
        assert once.x2 == pytest.approx(direct.x2, abs=1e-6)
        assert once.y2 == pytest.approx(direct.y2, abs=1e-6)

    @settings(max_examples=200)
    @given(boxes(min_coord=5000, max_coord=5400, max_side=100), st.floats(1, 10))
    def test_unclamped_area_scales_quadratically(self, b, s):
        dims = ImageDims(1000000, 1000000)
        grown = expand(b, s, dims)
        assert grown.area == pytest.approx(s * s * b.area, rel=1e-9)


class TestPointToCrop:
    def test_centered_window(self):
        crop = point_to_crop(PointHypothesis(500, 400), ImageDims(4000, 3000))
        assert crop == box(372, 272, 628, 528)

    def test_translated_inside_near_corner(self):
        crop = point_to_crop(PointHypothesis(50, 60), ImageDims(4000, 3000))
        assert crop == box(0, 0, 256, 256)

    def test_percent_point(self):
        crop = point_to_crop(PointHypothesis(50, 50, "percent"), ImageDims(1000, 1000))
        assert crop == box(372, 372, 628, 628)

    def test_small_image_spans_dimension(self):
        crop = point_to_crop(PointHypothesis(50, 50), ImageDims(100, 400))
        assert (crop.x1, crop.x2) == (0, 100)
        assert crop.height == 256

    def test_point_outside_rejected(self):
        with pytest.raises(ValueError):
            point_to_crop(PointHypothesis(5000, 50), ImageDims(1000, 1000))

    @settings(max_examples=300)
    @given(
        st.floats(0, 100),
        st.floats(0, 100),
        st.integers(260, 4000),
        st.integers(260, 4000),
    )
    def test_always_inside_with_exact_side(self, xp, yp, w, h):
        dims = ImageDims(w, h)
        crop = point_to_crop(PointHypothesis(xp, yp, "percent"), dims, side=256)
        assert crop.x1 >= 0 and crop.y1 >= 0
        assert crop.x2 <= w and crop.y2 <= h
        assert crop.width == pytest.approx(256)
        assert crop.height == pytest.approx(256)


class TestResizeDims:
    def test_exact_ratio(self):
        assert resize_dims(ImageDims(2048, 1024), ResolutionBudget(256)) == ImageDims(256, 128)

    def test_never_upscales(self):
        assert resize_dims(ImageDims(200, 100), ResolutionBudget(256)) == ImageDims(200, 100)

    def test_round_half_up(self):
        assert resize_dims(ImageDims(1000, 333), ResolutionBudget(256)) == ImageDims(256, 85)

    def test_full_budget_is_identity(self):
        assert resize_dims(ImageDims(9000, 7000), ResolutionBudget(FULL)) == ImageDims(9000, 7000)

    def test_portrait_orientation(self):
        assert resize_dims(ImageDims(333, 1000), ResolutionBudget(256)) == ImageDims(85, 256)

    def test_extreme_aspect_keeps_min_one(self):
        assert resize_dims(ImageDims(100000, 2), ResolutionBudget(256)).height == 1

    @settings(max_examples=300)
    @given(st.integers(1, 20000), st.integers(1, 20000), st.integers(16, 2048))
    def test_idempotent(self, w, h, cap):
        budget = ResolutionBudget(cap)
        once = resize_dims(ImageDims(w, h), budget)
        assert resize_dims(once, budget) == once


class TestVisualTokens:
    def test_default_patch(self):
        assert visual_tokens(ImageDims(256, 256), TokenCounter(28)) == 100

    def test_single_patch(self):
        assert visual_tokens(ImageDims(28, 28), TokenCounter(28)) == 1

    def test_partial_patch_rounds_up(self):
        assert visual_tokens(ImageDims(29, 28), TokenCounter(28)) == 2

    def test_budget_ratio_for_giant_images(self):
        full = ImageDims(8500, 8500)
        reduced = resize_dims(full, ResolutionBudget(256))
        ratio = visual_tokens(reduced) / visual_tokens(full)
        assert visual_tokens(full) == 92416
        assert visual_tokens(reduced) == 100
        assert ratio == pytest.approx(0.00108, abs=5e-5)

    @settings(max_examples=300)
    @given(st.integers(1, 5000), st.integers(1, 5000), st.integers(1, 200), st.integers(0, 64))
    def test_monotone_in_each_dimension(self, w, h, patch, bump):
        counter = TokenCounter(patch)
        base = visual_tokens(ImageDims(w, h), counter)
        assert visual_tokens(ImageDims(w + bump, h), counter) >= base
        assert visual_tokens(ImageDims(w, h + bump), counter) >= base


class TestDenormalize:
    def test_full_frame_norm1000(self):
        out = denormalize(box(0, 0, 1000, 1000), "norm_1000", ImageDims(640, 480))
        assert out == box(0, 0, 640, 480)

    def test_norm1000_rescales_per_axis(self):
        out = denormalize(box(250, 250, 750, 750), "norm_1000", ImageDims(1000, 2000))
        assert out == box(250, 500, 750, 1500)

    def test_percent_full_frame(self):
        out = denormalize(box(0, 0, 100, 100), "percent", ImageDims(512, 256))
        assert out == box(0, 0, 512, 256)

    def test_pixel_clamps(self):
        out = denormalize(box(-50, 10, 700, 500), "pixel", ImageDims(640, 480))
        assert out == box(0, 10, 640, 480)

    def test_degenerate_after_clamp_rejected(self):
        with pytest.raises(ValueError):
            denormalize(box(2000, 10, 3000, 20), "pixel", ImageDims(640, 480))

    def test_unknown_space_rejected(self):
        with pytest.raises(ValueError):
            denormalize(box(0, 0, 10, 10), "bogus", ImageDims(100, 100))


class TestBudgetAndCounterValidation:
    def test_budget_labels(self):
        assert ResolutionBudget.from_label("256").longest_side == 256
        assert ResolutionBudget.from_label("full").longest_side == FULL
        assert ResolutionBudget(256).effective_crop_cap == 256
        assert ResolutionBudget(256, crop_cap=512).effective_crop_cap == 512
        assert ResolutionBudget(FULL).effective_crop_cap == FULL

    def test_invalid_budget(self):
        with pytest.raises(ValueError):
            ResolutionBudget(0)
        with pytest.raises(ValueError):
            ResolutionBudget.from_label("huge")

    def test_invalid_patch(self):
        with pytest.raises(ValueError):
            TokenCounter(0)

    def test_percent_point_range_checked(self):
        with pytest.raises(ValueError):
            PointHypothesis(150, 50, "percent")
