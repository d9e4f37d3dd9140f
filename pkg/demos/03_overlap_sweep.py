#!/usr/bin/env python3
"""Accuracy against crop/ground-truth overlap, on the seeded oracle backend.

Reproduces the controlled-perturbation protocol at desk scale: for each shift
fraction r of the ground-truth half-diagonal, a same-size crop is displaced in
several seeded directions and injected directly as the stage-1 output. With a
ramp-shaped oracle, accuracy falls as the crop drifts off target.
"""

import os
import tempfile

from sparc import (
    OracleBackend,
    OracleConfig,
    PipelineConfig,
    ResolutionBudget,
    SweepSpec,
    load_dataset,
    make_synthetic_dataset,
    sweep_overlap,
)
from sparc.harness import write_rows_csv

workdir = tempfile.mkdtemp(prefix="sweep-overlap-")
dataset = load_dataset(make_synthetic_dataset(workdir, 150, seed=11))
print(f"synthetic benchmark: {len(dataset)} samples in {workdir}")

cfg = PipelineConfig(
    budget=ResolutionBudget(256),
    global_seed=7,
    coord_space_hint="norm_1000",
)
backend = OracleBackend(
    OracleConfig(sigma_frac=0.0, p_floor=0.3, p_ceil=0.95, ramp_a=0.2, ramp_b=0.8, seed=7)
)
spec = SweepSpec(
    kind="overlap",
    grid=tuple(i / 10 for i in range(11)),
    directions_per_point=4,
    seed=7,
)

rows = sweep_overlap(dataset, spec, cfg, backend, workers=8)

print(f"\n{'r fraction':>10} {'mean overlap':>13} {'accuracy':>9}")
for row in rows:
    bar = "#" * int(row["accuracy"] * 40)
    print(f"{row['r_fraction']:>10.1f} {row['mean_overlap']:>13.3f} {row['accuracy']:>9.3f}  {bar}")

out = os.path.join(workdir, "overlap_curve.csv")
write_rows_csv(rows, out)
print(f"\ncurve written to {out}")
print("accuracy at r=0 sits at the oracle ceiling; at the half-diagonal the")
print("crop covers ~25% of the target and accuracy falls onto the ramp.")
