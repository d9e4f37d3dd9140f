#!/usr/bin/env python3
"""Tour of the spatial primitives: overlap math, perturbation, budgets, tokens.

Everything here is pure arithmetic; run it and read along.
"""

from sparc import (
    BoundingBox,
    ImageDims,
    PerturbationSpec,
    PointHypothesis,
    ResolutionBudget,
    TokenCounter,
    expand,
    iou,
    overlap_ratio,
    perturb,
    point_to_crop,
    resize_dims,
    visual_tokens,
)

gt = BoundingBox(1200, 880, 1340, 1010)
dims = ImageDims(4000, 3000)

print("== overlap math ==")
shifted = BoundingBox(1270, 880, 1410, 1010)  # half-width shift to the right
print(f"gt box:              {gt.as_tuple()}")
print(f"shifted crop:        {shifted.as_tuple()}")
print(f"iou:                 {iou(gt, shifted):.4f}")
print(f"overlap ratio:       {overlap_ratio(shifted, gt):.4f}  (intersection / gt area)")

print("\n== controlled perturbation ==")
print("shift the crop center by a growing distance r; overlap decays to ~0.25")
print("at the half-diagonal, which is the sweep's hardest setting:")
for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
    r = frac * gt.half_diagonal
    crop = perturb(gt, PerturbationSpec(r=r, direction=(1.0, 0.0)), dims, rng_seed=0)
    print(f"  r = {frac:.2f} x half-diagonal -> overlap {overlap_ratio(crop, gt):.4f}")

print("\n== crop expansion ==")
print("growing the crop keeps the target fully covered but dilutes it:")
for scale in (1, 2, 4, 10):
    grown = expand(gt, scale, dims)
    print(
        f"  scale {scale:>2}x -> crop {grown.width:.0f}x{grown.height:.0f}, "
        f"target share of crop area {gt.area / grown.area:.4f}"
    )

print("\n== point grounding ==")
point = PointHypothesis(56.5, 41.0, "percent")
window = point_to_crop(point, dims, side=256)
print(f"percent point ({point.x}, {point.y}) on {dims.width}x{dims.height}")
print(f"-> fixed 256px window {window.as_tuple()}")

print("\n== resolution budgets and visual tokens ==")
counter = TokenCounter(patch_px=28)
for label in ("256", "512", "full"):
    budget = ResolutionBudget.from_label(label)
    out = resize_dims(ImageDims(8500, 8500), budget)
    print(f"  budget {label:>4}: 8500x8500 -> {out.width}x{out.height}, {visual_tokens(out, counter)} tokens")
full_tokens = visual_tokens(ImageDims(8500, 8500), counter)
small_tokens = visual_tokens(resize_dims(ImageDims(8500, 8500), ResolutionBudget(256)), counter)
print(
    f"a 256-budget pass costs {small_tokens}/{full_tokens} = "
    f"{small_tokens / full_tokens:.5f} of the full-resolution visual tokens"
)
