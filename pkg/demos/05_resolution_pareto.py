#!/usr/bin/env python3
"""Token budget against accuracy: the resolution ladder and its frontier.

Evaluates the same pipeline at 256 / 512 / full resolution, with and without
crops, and flags which configurations are dominated (some other config is at
least as cheap and at least as accurate, strictly better in one).
"""

import os
import tempfile
from dataclasses import replace

from sparc import (
    OracleBackend,
    OracleConfig,
    PipelineConfig,
    ResolutionBudget,
    load_dataset,
    make_synthetic_dataset,
    pareto_report,
)
from sparc.harness import evaluate, write_pareto

workdir = tempfile.mkdtemp(prefix="pareto-")
dataset = load_dataset(make_synthetic_dataset(workdir, 120, seed=11, image_size=(2600, 2000)))

backend = OracleBackend(OracleConfig(sigma_frac=0.25, p_floor=0.3, p_ceil=0.95, seed=7))
base = PipelineConfig(budget=ResolutionBudget(256), global_seed=7, coord_space_hint="norm_1000")

summaries = []
for label in ("256", "512", "full"):
    for n in (1, 8):
        cfg = replace(
            base,
            budget=ResolutionBudget.from_label(label),
            consistency_n=n,
            ird_temperature=0.7,
        )
        _, summary = evaluate(dataset, cfg, backend, workers=8, label=f"res{label}-n{n}")
        summaries.append(summary)
        print(
            f"res {label:>4} N={n}: accuracy {summary.accuracy:.3f}, "
            f"mean total tokens {summary.mean_total_tokens:8.1f}"
        )

rows = pareto_report(summaries)
print(f"\n{'config':>12} {'tokens':>10} {'accuracy':>9}  frontier?")
for row in rows:
    marker = "dominated" if row.dominated else "FRONTIER"
    print(f"{row.label:>12} {row.mean_total_tokens:>10.1f} {row.accuracy:>9.3f}  {marker}")

csv_path = os.path.join(workdir, "pareto.csv")
json_path = os.path.join(workdir, "pareto.json")
write_pareto(rows, csv_path, json_path)
print(f"\nwrote {csv_path} and {json_path} (plot-ready series)")
