#!/usr/bin/env python3
"""Weighted box fusion over noisy detection rollouts.

Eight rollouts propose boxes around two true objects plus one stray guess;
fusion merges agreeing proposals into their coordinate means and keeps the
stray as its own crop (recall over precision: nothing is discarded).
"""

import numpy as np

from sparc import BoundingBox, FusionConfig, wbf

rng = np.random.default_rng(7)

true_a = np.array([300.0, 300.0, 420.0, 400.0])
true_b = np.array([900.0, 150.0, 1010.0, 260.0])

hypotheses = []
for rollout in range(8):
    for target in (true_a, true_b):
        jitter = rng.normal(0, 6, size=2)
        box = target + np.concatenate([jitter, jitter])
        hypotheses.append((rollout, BoundingBox(*box)))
# one low-consistency stray from rollout 3
hypotheses.append((3, BoundingBox(60, 700, 160, 800)))

print(f"{len(hypotheses)} raw boxes from 8 rollouts")
fused = wbf(hypotheses, FusionConfig(iou_threshold=0.5))
print(f"fused into {len(fused)} crops:\n")
for i, fb in enumerate(fused):
    x1, y1, x2, y2 = fb.box.as_tuple()
    rollouts = ",".join(str(r) for r in sorted(fb.member_rollouts))
    print(
        f"  crop {i}: [{x1:7.2f} {y1:7.2f} {x2:7.2f} {y2:7.2f}]  "
        f"members={fb.member_count:<2} rollouts={{{rollouts}}}"
    )

print("\nthe two dense clusters sit on the true objects:")
print(f"  true A center: {(true_a[:2] + true_a[2:]) / 2}")
print(f"  true B center: {(true_b[:2] + true_b[2:]) / 2}")
print("the stray keeps member_count 1 and is forwarded to reasoning anyway.")

print("\nraising the threshold to 1.0 disables merging (only exact duplicates fuse):")
strict = wbf(hypotheses, FusionConfig(iou_threshold=1.0))
print(f"  threshold 1.0 -> {len(strict)} crops (= raw count {len(hypotheses)})")
