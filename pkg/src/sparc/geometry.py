"""Box and resolution math in original-image pixel space.

Every operation is a pure function of its inputs; seeded randomness is an
explicit argument, so the whole module is safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence, Tuple, Union

import numpy as np

CoordSpace = Literal["pixel", "norm_1000", "percent"]
ClampMode = Literal["clamp-to-image", "allow-outside-then-intersect"]

#: Sentinel for PerturbationSpec.direction: draw a uniform angle from the seed.
SEEDED_RANDOM = "seeded-random"

#: Sentinel for ResolutionBudget.longest_side: keep the image at native size.
FULL = "full"


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned rectangle: (x1, y1) top-left, (x2, y2) bottom-right, in pixels."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(isinstance(c, (int, float)) and math.isfinite(c) for c in coords):
            raise ValueError(f"box coordinates must be finite numbers, got {coords}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"box must have strictly positive area, got {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0

    @property
    def half_diagonal(self) -> float:
        return math.hypot(self.width, self.height) / 2.0

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)


@dataclass(frozen=True)
class PointHypothesis:
    """A 2D point in either pixel coordinates or percent of the image side."""

    x: float
    y: float
    coord_space: Literal["pixel", "percent"] = "pixel"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")
        if self.coord_space == "percent" and not (0 <= self.x <= 100 and 0 <= self.y <= 100):
            raise ValueError(f"percent coordinates must lie in [0, 100], got ({self.x}, {self.y})")
        if self.coord_space not in ("pixel", "percent"):
            raise ValueError(f"unknown point coord_space {self.coord_space!r}")


@dataclass(frozen=True)
class ImageDims:
    """Integer pixel dimensions of an image."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"dims must be >= 1, got {self.width}x{self.height}")

    @property
    def longest(self) -> int:
        return max(self.width, self.height)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def as_tuple(self) -> Tuple[int, int]:
        return (self.width, self.height)


@dataclass(frozen=True)
class PerturbationSpec:
    """How to displace a box: shift distance, direction, and border handling.

    direction is either an explicit unit vector or SEEDED_RANDOM, in which
    case the angle is drawn deterministically from the rng seed passed to
    perturb().
    """

    r: float
    direction: Union[Tuple[float, float], str] = SEEDED_RANDOM
    clamp_mode: ClampMode = "allow-outside-then-intersect"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"shift distance must be finite and >= 0, got {self.r}")
        if self.direction != SEEDED_RANDOM:
            dx, dy = self.direction
            norm = math.hypot(dx, dy)
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(f"explicit direction must have unit norm, got |{self.direction}| = {norm}")
        if self.clamp_mode not in ("clamp-to-image", "allow-outside-then-intersect"):
            raise ValueError(f"unknown clamp_mode {self.clamp_mode!r}")


@dataclass(frozen=True)
class ResolutionBudget:
    """Cap on an image's longest side before encoding.

    crop_cap is the separate cap applied to extracted crops; it defaults to
    longest_side, and is unbounded when the budget is FULL.
    """

    longest_side: Union[int, str] = FULL
    crop_cap: Union[int, str, None] = None

    def __post_init__(self) -> None:
        for name, value in (("longest_side", self.longest_side), ("crop_cap", self.crop_cap)):
            if value is None or value == FULL:
                continue
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} must be a positive integer or {FULL!r}, got {value!r}")

    @property
    def effective_crop_cap(self) -> Union[int, str]:
        return self.longest_side if self.crop_cap is None else self.crop_cap

    @property
    def label(self) -> str:
        return str(self.longest_side)

    @classmethod
    def from_label(cls, label: str, crop_cap: Union[int, str, None] = None) -> "ResolutionBudget":
        label = label.strip().lower()
        side: Union[int, str] = FULL if label == FULL else int(label)
        return cls(longest_side=side, crop_cap=crop_cap)


@dataclass(frozen=True)
class TokenCounter:
    """Visual-token model: one token per patch_px x patch_px patch, ceil per axis."""

    patch_px: int = 28

    def __post_init__(self) -> None:
        if not isinstance(self.patch_px, int) or self.patch_px < 1:
            raise ValueError(f"patch_px must be >= 1, got {self.patch_px!r}")


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    """Area of the overlap between two boxes; 0 when they do not overlap."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def overlap_ratio(crop: BoundingBox, gt: BoundingBox) -> float:
    """Fraction of ``gt`` covered by ``crop``: intersection area / gt area.

    This is the quantity the perturbation sweeps report on their x-axis; for
    equal-size boxes it coincides with intersection-over-crop-area. IoU is
    available separately via iou().
    """
    return intersection_area(crop, gt) / gt.area


def box_within(box: BoundingBox, dims: ImageDims) -> bool:
    return box.x1 >= 0 and box.y1 >= 0 and box.x2 <= dims.width and box.y2 <= dims.height


def _fit_window(lo: float, hi: float, limit: float) -> Tuple[float, float]:
    # Translate [lo, hi] into [0, limit] without shrinking; span fully if too long.
    if hi - lo >= limit:
        return 0.0, float(limit)
    if lo < 0:
        return 0.0, hi - lo
    if hi > limit:
        return limit - (hi - lo), float(limit)
    return lo, hi


def perturb(gt: BoundingBox, spec: PerturbationSpec, dims: ImageDims, rng_seed: int) -> BoundingBox:
    """Copy ``gt``, shift its center by spec.r pixels, and fit it to the image.

    The shifted box keeps gt's width and height before border handling. With
    clamp_mode "allow-outside-then-intersect" the shifted window is cut down
    to its intersection with the image; with "clamp-to-image" it is translated
    back inside at full size.

    Args:
        gt: ground-truth box, must lie inside the image.
        spec: shift distance, direction, and clamp mode.
        dims: image dimensions bounding the result.
        rng_seed: seed for the direction draw when spec.direction is SEEDED_RANDOM.

    Returns:
        The displaced box. r == 0 returns gt unchanged for any seed.
    """
    if not box_within(gt, dims):
        raise ValueError(f"gt box {gt.as_tuple()} must lie inside the {dims.width}x{dims.height} image")
    if spec.r > dims.diagonal:
        raise ValueError(f"shift distance {spec.r} exceeds the image diagonal {dims.diagonal:.3f}")
    if spec.r == 0:
        return gt

    if spec.direction == SEEDED_RANDOM:
        angle = np.random.default_rng(rng_seed).uniform(0.0, 2.0 * math.pi)
        ux, uy = math.cos(angle), math.sin(angle)
    else:
        ux, uy = spec.direction

    cx, cy = gt.center
    ncx, ncy = cx + spec.r * ux, cy + spec.r * uy
    hw, hh = gt.width / 2.0, gt.height / 2.0
    x1, y1, x2, y2 = ncx - hw, ncy - hh, ncx + hw, ncy + hh

    if spec.clamp_mode == "clamp-to-image":
        x1, x2 = _fit_window(x1, x2, dims.width)
        y1, y2 = _fit_window(y1, y2, dims.height)
    else:
        x1, x2 = max(x1, 0.0), min(x2, float(dims.width))
        y1, y2 = max(y1, 0.0), min(y2, float(dims.height))
        if x1 >= x2 or y1 >= y2:
            raise ValueError(
                f"shifted box left the {dims.width}x{dims.height} image entirely (r={spec.r}, direction=({ux:.4f}, {uy:.4f}))"
            )
    return BoundingBox(x1, y1, x2, y2)


def expand(box: BoundingBox, scale: float, dims: ImageDims) -> BoundingBox:
    """Scale a box about its center by ``scale`` per axis, clamped to the image.

    The unclamped result has scale**2 times the original area.
    """
    if not (math.isfinite(scale) and scale >= 1):
        raise ValueError(f"scale must be >= 1, got {scale}")
    if scale == 1:
        return box
    cx, cy = box.center
    hw, hh = box.width / 2.0 * scale, box.height / 2.0 * scale
    return BoundingBox(
        max(cx - hw, 0.0),
        max(cy - hh, 0.0),
        min(cx + hw, float(dims.width)),
        min(cy + hh, float(dims.height)),
    )


def point_to_crop(p: PointHypothesis, dims: ImageDims, side: int = 256) -> BoundingBox:
    """Build a side x side crop window centered on a point.

    The window origin snaps to whole pixels (round-half-up) so the crop is an
    exact side x side pixel region. Windows that stick out of the image are
    translated back inside rather than shrunk; if the image is smaller than
    ``side`` in a dimension, the window spans that full dimension.
    """
    if side < 1:
        raise ValueError(f"side must be >= 1, got {side}")
    if p.coord_space == "percent":
        px, py = p.x / 100.0 * dims.width, p.y / 100.0 * dims.height
    else:
        px, py = p.x, p.y
    if not (0 <= px <= dims.width and 0 <= py <= dims.height):
        raise ValueError(f"point ({px}, {py}) lies outside the {dims.width}x{dims.height} image")
    half = side / 2.0
    left = float(math.floor(px - half + 0.5))
    top = float(math.floor(py - half + 0.5))
    x1, x2 = _fit_window(left, left + side, dims.width)
    y1, y2 = _fit_window(top, top + side, dims.height)
    return BoundingBox(x1, y1, x2, y2)


def resize_dims(dims: ImageDims, budget: ResolutionBudget) -> ImageDims:
    """Dimensions after capping the longest side at the budget; never upscales.

    The short side is scaled to preserve aspect ratio, rounded half-up with a
    floor of 1 px. Idempotent: applying the same budget twice changes nothing.
    """
    if budget.longest_side == FULL:
        return dims
    cap = budget.longest_side
    if dims.longest <= cap:
        return dims
    if dims.width >= dims.height:
        w = cap
        h = max(1, (dims.height * cap * 2 + dims.width) // (dims.width * 2))
    else:
        h = cap
        w = max(1, (dims.width * cap * 2 + dims.height) // (dims.height * 2))
    return ImageDims(int(w), int(h))


def visual_tokens(dims: ImageDims, counter: TokenCounter = TokenCounter()) -> int:
    """Number of visual tokens an image of these dims costs: ceil(w/p) * ceil(h/p)."""
    p = counter.patch_px
    return ((dims.width + p - 1) // p) * ((dims.height + p - 1) // p)


def denormalize(box: BoundingBox, coord_space: CoordSpace, dims: ImageDims) -> BoundingBox:
    """Convert a box into pixel space and clamp it to the image.

    Supported spaces: "pixel" (clamp only), "norm_1000" (coordinates scaled
    by dims/1000), "percent" (scaled by dims/100).

    Raises:
        ValueError: unknown space, or the box degenerates after clamping.
    """
    if coord_space == "pixel":
        sx = sy = 1.0
    elif coord_space == "norm_1000":
        sx, sy = dims.width / 1000.0, dims.height / 1000.0
    elif coord_space == "percent":
        sx, sy = dims.width / 100.0, dims.height / 100.0
    else:
        raise ValueError(f"unknown coord_space {coord_space!r}")
    x1 = min(max(box.x1 * sx, 0.0), float(dims.width))
    y1 = min(max(box.y1 * sy, 0.0), float(dims.height))
    x2 = min(max(box.x2 * sx, 0.0), float(dims.width))
    y2 = min(max(box.y2 * sy, 0.0), float(dims.height))
    if x1 >= x2 or y1 >= y2:
        raise ValueError(f"box {box.as_tuple()} in {coord_space} degenerates after clamping to {dims.width}x{dims.height}")
    return BoundingBox(x1, y1, x2, y2)


def mean_box(boxes: Sequence[BoundingBox]) -> BoundingBox:
    """Uniform-weight arithmetic mean of box corners."""
    if not boxes:
        raise ValueError("mean_box needs at least one box")
    n = len(boxes)
    return BoundingBox(
        sum(b.x1 for b in boxes) / n,
        sum(b.y1 for b in boxes) / n,
        sum(b.x2 for b in boxes) / n,
        sum(b.y2 for b in boxes) / n,
    )
