#!/usr/bin/env python3
"""Rejection-sampling harvest of verified detection traces.

Runs the full two-stage pipeline with a noisy localizer, keeps the stage-1
grounding output only when the downstream answer was correct, and then proves
each accepted trace by replaying it as a forced stage-1 output.
"""

import os
import tempfile

from sparc import (
    OracleBackend,
    OracleConfig,
    PipelineConfig,
    ResolutionBudget,
    harvest_sft,
    load_dataset,
    make_synthetic_dataset,
    run_sample,
)
from sparc.harness import load_sft_traces, trace_to_forced_boxes

workdir = tempfile.mkdtemp(prefix="harvest-")
dataset = load_dataset(make_synthetic_dataset(workdir, 100, seed=11))

cfg = PipelineConfig(
    budget=ResolutionBudget(256),
    consistency_n=4,
    global_seed=7,
    coord_space_hint="norm_1000",
)
backend = OracleBackend(OracleConfig(sigma_frac=0.6, p_floor=0.2, p_ceil=0.95, seed=7))

out_path = os.path.join(workdir, "traces.jsonl")
accepted = harvest_sft(dataset, cfg, backend, out_path, workers=8)
print(f"accepted {accepted} / rejected {len(dataset) - accepted}")
print(f"traces written to {out_path}\n")

traces = load_sft_traces(out_path)
print("first trace target:")
print(f"  {traces[0]['target'][:100]}...")
print(f"  coord space: {traces[0]['target_coord_space']}, verified: {traces[0]['provenance']['verified']}")

print("\nreplaying every accepted trace as a forced stage-1 output...")
by_id = {s.sample_id: s for s in dataset}
replayed_correct = 0
for trace in traces:
    forced = trace_to_forced_boxes(trace, cfg)
    record = run_sample(by_id[trace["sample_id"]], cfg, backend, forced_boxes=forced)
    replayed_correct += record.correct
print(f"replays correct: {replayed_correct}/{len(traces)}")
print("every kept trace reproduces its correct answer under the same seeds,")
print("so the harvested file is a clean supervision set for the detection stage.")
