"""Dataset ingestion, batch evaluation, ablation sweeps, and reports.

All multi-sample work is keyed and sorted by sample_id before aggregation or
serialization, so results are independent of worker scheduling; report files
use fixed 4-decimal float formatting and are byte-stable across runs with the
same seeds.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .backend import Backend
from .geometry import (
    BoundingBox,
    ImageDims,
    PerturbationSpec,
    ResolutionBudget,
    expand,
    overlap_ratio,
    perturb,
    point_to_crop,
    visual_tokens,
)
from .parsing import RawModelText, parse_boxes, parse_points
from .pipeline import (
    EvalRecord,
    PipelineConfig,
    derive_seed,
    image_dims,
    record_to_json_line,
    run_sample,
)

logger = logging.getLogger(__name__)


class DatasetError(ValueError):
    """Raised for unreadable dataset files or schema violations in strict mode."""


@dataclass(frozen=True)
class BenchmarkSample:
    """One multiple-choice VQA item, optionally with ground-truth boxes."""

    sample_id: str
    image_path: str
    question: str
    choices: Tuple[Tuple[str, str], ...]
    answer_letter: str
    gt_boxes: Optional[Tuple[BoundingBox, ...]] = None
    tags: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        letters = [letter for letter, _ in self.choices]
        if not letters:
            raise ValueError("choices must be non-empty")
        if len(set(letters)) != len(letters):
            raise ValueError(f"duplicate choice letters in {letters}")
        if self.answer_letter not in letters:
            raise ValueError(f"answer_letter {self.answer_letter!r} not among choices {letters}")


def _parse_choices(raw: object) -> Tuple[Tuple[str, str], ...]:
    if isinstance(raw, dict):
        return tuple((str(k), str(v)) for k, v in raw.items())
    if isinstance(raw, list):
        out = []
        for item in raw:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise ValueError(f"choice entries must be [letter, text] pairs, got {item!r}")
            out.append((str(item[0]), str(item[1])))
        return tuple(out)
    raise ValueError(f"choices must be an object or a list of pairs, got {type(raw).__name__}")


def _sample_from_obj(obj: dict, base_dir: str, check_images: bool) -> BenchmarkSample:
    try:
        sample_id = str(obj["sample_id"])
        image_path = str(obj["image_path"])
        question = str(obj["question"])
        choices = _parse_choices(obj["choices"])
        answer = str(obj["answer_letter"])
    except KeyError as exc:
        raise ValueError(f"missing required field {exc.args[0]!r}")
    if not os.path.isabs(image_path):
        image_path = os.path.join(base_dir, image_path)
    gt_boxes = None
    if obj.get("gt_boxes") is not None:
        boxes = []
        for raw_box in obj["gt_boxes"]:
            if not isinstance(raw_box, (list, tuple)) or len(raw_box) != 4:
                raise ValueError(f"gt box must be [x1, y1, x2, y2], got {raw_box!r}")
            boxes.append(BoundingBox(*[float(v) for v in raw_box]))
        gt_boxes = tuple(boxes)
    tags = tuple(str(t) for t in obj.get("tags", ()))
    sample = BenchmarkSample(
        sample_id=sample_id,
        image_path=image_path,
        question=question,
        choices=choices,
        answer_letter=answer,
        gt_boxes=gt_boxes,
        tags=tags,
    )
    if check_images:
        if not os.path.exists(image_path):
            raise ValueError(f"image file {image_path!r} does not exist")
        image_dims(image_path)  # raises if unreadable
    return sample


def load_dataset(path: str, strict: bool = True, check_images: bool = True) -> List[BenchmarkSample]:
    """Load a JSONL benchmark file (schema in docs/dataset.md).

    Strict mode raises DatasetError naming the first offending line; lenient
    mode skips bad lines and logs a warning for each.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path!r}: {exc}")
    base_dir = os.path.dirname(os.path.abspath(path))
    samples: List[BenchmarkSample] = []
    seen = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            sample = _sample_from_obj(obj, base_dir, check_images)
            if sample.sample_id in seen:
                raise ValueError(f"duplicate sample_id {sample.sample_id!r}")
            seen.add(sample.sample_id)
        except ValueError as exc:
            message = f"{path}:{lineno}: {exc}"
            if strict:
                raise DatasetError(message)
            logger.warning("skipping dataset line: %s", message)
            continue
        samples.append(sample)
    return samples


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition for an ablation sweep.

    grid holds r fractions of the gt half-diagonal (overlap), expansion
    scales, or consistency N values depending on kind; sorted, non-empty.
    """

    kind: str
    grid: Tuple[float, ...]
    directions_per_point: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("overlap", "expansion", "consistency", "resolution"):
            raise ValueError(f"unknown sweep kind {self.kind!r}")
        if not self.grid:
            raise ValueError("sweep grid must be non-empty")
        if tuple(sorted(self.grid)) != tuple(self.grid):
            raise ValueError("sweep grid must be sorted ascending")
        if self.directions_per_point < 1:
            raise ValueError("directions_per_point must be >= 1")


#: Default ablation grids.
OVERLAP_R_FRACTIONS = tuple(i / 10 for i in range(11))
EXPANSION_SCALES = (1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 10.0)
CONSISTENCY_N_VALUES = (1, 4, 8)
RESOLUTION_LADDER = ("256", "512", "full")


@dataclass(frozen=True)
class EvalSummary:
    """Aggregate metrics of one evaluation run."""

    label: str
    resolution: str
    modality: str
    consistency_n: int
    seed: int
    n_samples: int
    n_errors: int
    accuracy: float
    mean_raw_boxes: float
    mean_fused_crops: float
    mean_stage1_visual_tokens: float
    mean_stage2_visual_tokens: float
    mean_stage1_completion_tokens: float
    mean_stage2_completion_tokens: float
    mean_total_tokens: float


SUMMARY_COLUMNS = [
    "label",
    "resolution",
    "modality",
    "consistency_n",
    "seed",
    "n_samples",
    "n_errors",
    "accuracy",
    "mean_raw_boxes",
    "mean_fused_crops",
    "mean_stage1_visual_tokens",
    "mean_stage2_visual_tokens",
    "mean_stage1_completion_tokens",
    "mean_stage2_completion_tokens",
    "mean_total_tokens",
]


def _error_record(sample: BenchmarkSample, cfg: PipelineConfig, error: Exception) -> EvalRecord:
    return EvalRecord(
        sample_id=sample.sample_id,
        resolution=cfg.budget.label,
        base_dims=ImageDims(1, 1),
        raw_box_count=0,
        fused_boxes=[],
        crops_dims=[],
        stage1_visual_tokens=0,
        stage2_visual_tokens=0,
        stage1_completion_tokens=0,
        stage2_completion_tokens=0,
        prompt_text_tokens=0,
        stage1_texts=[],
        predicted_letter=None,
        correct=False,
        warnings=[],
        error=f"{type(error).__name__}: {error}",
    )


def summarize(records: Sequence[EvalRecord], cfg: PipelineConfig, label: Optional[str] = None) -> EvalSummary:
    n = len(records)
    if n == 0:
        raise ValueError("cannot summarize zero records")
    return EvalSummary(
        label=label or f"{cfg.modality}-{cfg.budget.label}-n{cfg.consistency_n}",
        resolution=cfg.budget.label,
        modality=cfg.modality,
        consistency_n=cfg.consistency_n,
        seed=cfg.global_seed,
        n_samples=n,
        n_errors=sum(1 for r in records if r.error is not None),
        accuracy=sum(1 for r in records if r.correct) / n,
        mean_raw_boxes=sum(r.raw_box_count for r in records) / n,
        mean_fused_crops=sum(len(r.fused_boxes) for r in records) / n,
        mean_stage1_visual_tokens=sum(r.stage1_visual_tokens for r in records) / n,
        mean_stage2_visual_tokens=sum(r.stage2_visual_tokens for r in records) / n,
        mean_stage1_completion_tokens=sum(r.stage1_completion_tokens for r in records) / n,
        mean_stage2_completion_tokens=sum(r.stage2_completion_tokens for r in records) / n,
        mean_total_tokens=sum(r.total_tokens for r in records) / n,
    )


def evaluate(
    dataset: Sequence[BenchmarkSample],
    cfg: PipelineConfig,
    backend: Backend,
    workers: int = 1,
    label: Optional[str] = None,
) -> Tuple[List[EvalRecord], EvalSummary]:
    """Run the pipeline over a dataset with bounded sample parallelism.

    Per-sample failures are scored incorrect and recorded, never raised.
    Records come back sorted by sample_id regardless of scheduling.
    """
    if not dataset:
        raise ValueError("dataset is empty")

    def one(sample: BenchmarkSample) -> EvalRecord:
        try:
            return run_sample(sample, cfg, backend)
        except Exception as exc:
            return _error_record(sample, cfg, exc)

    if workers <= 1:
        records = [one(s) for s in dataset]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, dataset))
    records.sort(key=lambda r: r.sample_id)
    return records, summarize(records, cfg, label=label)


def _require_gt(dataset: Sequence[BenchmarkSample], sweep: str) -> None:
    missing = [s.sample_id for s in dataset if not s.gt_boxes]
    if missing:
        raise ValueError(
            f"{sweep} sweep needs gt_boxes on every sample; missing on {len(missing)} "
            f"sample(s), first: {missing[0]!r}"
        )


def sweep_overlap(
    dataset: Sequence[BenchmarkSample],
    spec: SweepSpec,
    cfg: PipelineConfig,
    backend: Backend,
    budgets: Optional[Sequence[ResolutionBudget]] = None,
    workers: int = 1,
) -> List[dict]:
    """Controlled-perturbation sweep: accuracy against crop/gt overlap.

    For each r fraction of the gt half-diagonal and each of
    directions_per_point seeded directions, the gt box is shifted by r and
    injected directly as the stage-1 output (detection is bypassed); the
    reasoning stage then runs as usual. Directions are drawn once per
    (sample, direction index) and reused across the whole r grid. One row
    per (budget, r fraction).
    """
    if not dataset:
        raise ValueError("dataset is empty")
    _require_gt(dataset, "overlap")
    budgets = list(budgets) if budgets is not None else [cfg.budget]
    rows: List[dict] = []
    for budget in budgets:
        budget_cfg = replace(cfg, budget=budget)
        for r_frac in spec.grid:

            def one(job: Tuple[BenchmarkSample, int]) -> Tuple[float, bool]:
                sample, direction = job
                gt = sample.gt_boxes[0]
                dims = image_dims(sample.image_path)
                dir_seed = derive_seed(spec.seed, sample.sample_id, "direction", direction)
                crop = perturb(gt, PerturbationSpec(r=r_frac * gt.half_diagonal), dims, dir_seed)
                record = run_sample(
                    sample, budget_cfg, backend,
                    forced_boxes=[crop], seed_salt=f"direction-{direction}",
                )
                return overlap_ratio(crop, gt), record.correct

            jobs = [(s, j) for s in dataset for j in range(spec.directions_per_point)]
            if workers <= 1:
                results = [one(job) for job in jobs]
            else:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(one, jobs))
            overlaps = [ov for ov, _ in results]
            outcomes = [ok for _, ok in results]
            rows.append(
                {
                    "budget": budget.label,
                    "r_fraction": r_frac,
                    "mean_overlap": sum(overlaps) / len(overlaps),
                    "accuracy": sum(outcomes) / len(outcomes),
                    "n_runs": len(results),
                }
            )
    return rows


def sweep_expansion(
    dataset: Sequence[BenchmarkSample],
    spec: SweepSpec,
    cfg: PipelineConfig,
    backend: Backend,
    budgets: Optional[Sequence[ResolutionBudget]] = None,
    workers: int = 1,
) -> List[dict]:
    """Grow the gt crop by each scale factor and measure the accuracy/fidelity trade.

    Each row reports accuracy, the mean visual-token cost of the emitted crop,
    and the mean fraction of the crop area the target still occupies: under a
    fixed crop cap, larger scales dilute the target's effective resolution.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    _require_gt(dataset, "expansion")
    budgets = list(budgets) if budgets is not None else [cfg.budget]
    rows: List[dict] = []
    for budget in budgets:
        budget_cfg = replace(cfg, budget=budget)
        for scale in spec.grid:

            def one(sample: BenchmarkSample) -> Tuple[bool, int, float]:
                gt = sample.gt_boxes[0]
                dims = image_dims(sample.image_path)
                crop = expand(gt, scale, dims)
                record = run_sample(
                    sample, budget_cfg, backend, forced_boxes=[crop], seed_salt="expansion"
                )
                crop_tokens = sum(visual_tokens(d, cfg.patch) for d in record.crops_dims)
                return record.correct, crop_tokens, gt.area / crop.area

            if workers <= 1:
                results = [one(s) for s in dataset]
            else:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(one, dataset))
            rows.append(
                {
                    "budget": budget.label,
                    "scale": scale,
                    "accuracy": sum(1 for ok, _, _ in results if ok) / len(results),
                    "mean_crop_tokens": sum(t for _, t, _ in results) / len(results),
                    "mean_target_area_fraction": sum(f for _, _, f in results) / len(results),
                    "n_runs": len(results),
                }
            )
    return rows


def sweep_consistency(
    dataset: Sequence[BenchmarkSample],
    n_values: Sequence[int],
    cfg: PipelineConfig,
    backend: Backend,
    budgets: Optional[Sequence[ResolutionBudget]] = None,
    workers: int = 1,
) -> List[dict]:
    """Evaluate at each rollout count N; reports accuracy and crop statistics.

    The per-(budget, N) rows carry what the crop-count tables need: accuracy,
    mean raw and fused crop counts, and total stage-1 completion tokens.
    """
    if not n_values:
        raise ValueError("n_values must be non-empty")
    budgets = list(budgets) if budgets is not None else [cfg.budget]
    rows: List[dict] = []
    for budget in budgets:
        for n in n_values:
            run_cfg = replace(cfg, budget=budget, consistency_n=n)
            records, summary = evaluate(dataset, run_cfg, backend, workers=workers)
            rows.append(
                {
                    "budget": budget.label,
                    "consistency_n": n,
                    "accuracy": summary.accuracy,
                    "mean_raw_boxes": summary.mean_raw_boxes,
                    "mean_fused_crops": summary.mean_fused_crops,
                    "stage1_completion_tokens": sum(r.stage1_completion_tokens for r in records),
                    "n_samples": summary.n_samples,
                }
            )
    return rows


def consistency_table(rows: Sequence[dict]) -> List[dict]:
    """Pivot consistency rows to one row per N: accuracy and crops per budget."""
    budgets = sorted({row["budget"] for row in rows}, key=lambda b: (b == "full", b))
    by_n: Dict[int, dict] = {}
    for row in rows:
        entry = by_n.setdefault(row["consistency_n"], {"consistency_n": row["consistency_n"]})
        entry[f"accuracy_{row['budget']}"] = row["accuracy"]
        entry[f"crops_{row['budget']}"] = row["mean_fused_crops"]
    out = []
    for n in sorted(by_n):
        entry = by_n[n]
        ordered = {"consistency_n": n}
        for b in budgets:
            ordered[f"accuracy_{b}"] = entry.get(f"accuracy_{b}")
        for b in budgets:
            ordered[f"crops_{b}"] = entry.get(f"crops_{b}")
        out.append(ordered)
    return out


def sweep_resolution(
    dataset: Sequence[BenchmarkSample],
    budgets: Sequence[ResolutionBudget],
    cfg: PipelineConfig,
    backend: Backend,
    workers: int = 1,
) -> List[EvalSummary]:
    """Evaluate the same configuration at each resolution budget."""
    if not budgets:
        raise ValueError("budgets must be non-empty")
    summaries = []
    for budget in budgets:
        _, summary = evaluate(dataset, replace(cfg, budget=budget), backend, workers=workers)
        summaries.append(summary)
    return summaries


@dataclass(frozen=True)
class ParetoRow:
    label: str
    mean_total_tokens: float
    accuracy: float
    dominated: bool


def pareto_report(summaries: Sequence[Union[EvalSummary, Mapping[str, object]]]) -> List[ParetoRow]:
    """Flag each (tokens, accuracy) point dominated by a cheaper-and-better one.

    A row is dominated when some other row has tokens <= and accuracy >= with
    at least one strict inequality; exact ties leave both rows on the frontier.
    Rows come back sorted by token cost.
    """
    points: List[Tuple[str, float, float]] = []
    for s in summaries:
        if isinstance(s, EvalSummary):
            points.append((s.label, float(s.mean_total_tokens), float(s.accuracy)))
        else:
            points.append((str(s["label"]), float(s["mean_total_tokens"]), float(s["accuracy"])))
    rows = []
    for i, (label, tokens, acc) in enumerate(points):
        dominated = any(
            (t2 <= tokens and a2 >= acc and (t2 < tokens or a2 > acc))
            for j, (_, t2, a2) in enumerate(points)
            if j != i
        )
        rows.append(ParetoRow(label=label, mean_total_tokens=tokens, accuracy=acc, dominated=dominated))
    rows.sort(key=lambda r: (r.mean_total_tokens, -r.accuracy, r.label))
    return rows


@dataclass(frozen=True)
class SftTrace:
    """One accepted supervision trace: stage-1 prompt and verified grounding target."""

    sample_id: str
    image_path: str
    modality: str
    ird_prompt_text: str
    target: str
    target_coord_space: str
    teacher: str
    seed: int
    verified: bool = True

    def to_json_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "image_path": self.image_path,
            "modality": self.modality,
            "ird_prompt_text": self.ird_prompt_text,
            "target": self.target,
            "target_coord_space": self.target_coord_space,
            "provenance": {"teacher": self.teacher, "seed": self.seed, "verified": self.verified},
        }


def serialize_stage1_target(record: EvalRecord, cfg: PipelineConfig) -> Tuple[str, str]:
    """Serialize a record's raw stage-1 output in the backend's native schema.

    Boxes become a JSON array of {"bbox_2d": [...], "label": ...} objects and
    points become <point> tags, both in pixel space (the coordinate space is
    returned alongside and recorded in the trace, so replay is exact).
    """
    if cfg.modality == "box":
        entries = []
        for hyp in record.hypotheses:
            for box, label in zip(hyp.boxes, hyp.labels):
                entries.append({"bbox_2d": list(box.as_tuple()), "label": label})
        return json.dumps(entries), "pixel"
    tags = []
    for hyp in record.hypotheses:
        for point, label in zip(hyp.points, hyp.labels):
            tags.append(f'<point x="{point.x!r}" y="{point.y!r}" alt="{label}">{label}</point>')
    return " ".join(tags), "pixel"


def trace_to_forced_boxes(trace: Mapping[str, object], cfg: PipelineConfig) -> List[BoundingBox]:
    """Parse a trace target back into the forced stage-1 box list for replay."""
    raw = RawModelText(str(trace["target"]), stage="ird", rollout_index=0)
    dims = image_dims(str(trace["image_path"]))
    space = str(trace["target_coord_space"])
    if trace["modality"] == "box":
        hyp = parse_boxes(raw, dims, space)  # type: ignore[arg-type]
        return list(hyp.boxes)
    hyp = parse_points(raw, dims, coord_space=space)
    return [point_to_crop(p, dims, cfg.point_side) for p in hyp.points]


def harvest_sft(
    dataset: Sequence[BenchmarkSample],
    cfg: PipelineConfig,
    backend: Backend,
    out_path: str,
    workers: int = 1,
    teacher: Optional[str] = None,
) -> int:
    """Rejection-sampling harvest: keep stage-1 traces whose answer was correct.

    Runs the full two-stage pipeline per sample and emits one JSONL trace per
    correct prediction; wrong or failed samples are rejections. Returns the
    accepted count, which by construction equals accuracy * len(dataset).
    """
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:  # fail before burning inference
        records, _ = evaluate(dataset, cfg, backend, workers=workers)
        image_paths = {s.sample_id: s.image_path for s in dataset}
        accepted = 0
        for record in records:
            if not record.correct:
                continue
            target, space = serialize_stage1_target(record, cfg)
            trace = SftTrace(
                sample_id=record.sample_id,
                image_path=image_paths[record.sample_id],
                modality=cfg.modality,
                ird_prompt_text=_ird_prompt_text(record),
                target=target,
                target_coord_space=space,
                teacher=teacher or cfg.model_name or type(backend).__name__,
                seed=cfg.global_seed,
            )
            fh.write(json.dumps(trace.to_json_dict(), separators=(",", ":")) + "\n")
            accepted += 1
    return accepted


def _ird_prompt_text(record: EvalRecord) -> str:
    if record.prompts is None:
        return ""
    for block in record.prompts.ird_messages:
        if hasattr(block, "text"):
            return block.text
    return ""


def load_sft_traces(path: str) -> List[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


# --- report writers -------------------------------------------------------

def _format_cell(value: object) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.4f}"
    if value is None:
        return ""
    return str(value)


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    """UTF-8 CSV with a header row, LF line endings, and 4-decimal floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


def write_records_jsonl(records: Sequence[EvalRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record_to_json_line(record) + "\n")


def write_summary_csv(summaries: Union[EvalSummary, Sequence[EvalSummary]], path: str) -> None:
    if isinstance(summaries, EvalSummary):
        summaries = [summaries]
    rows = [[getattr(s, col) for col in SUMMARY_COLUMNS] for s in summaries]
    write_csv(path, SUMMARY_COLUMNS, rows)


def read_summary_csv(path: str) -> List[dict]:
    """Rows of a summary CSV as dicts; raises DatasetError naming missing columns."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"label", "accuracy", "mean_total_tokens"}
        header = set(reader.fieldnames or ())
        missing = sorted(required - header)
        if missing:
            raise DatasetError(f"{path}: summary CSV is missing column(s): {', '.join(missing)}")
        return list(reader)


def write_rows_csv(rows: Sequence[dict], path: str) -> None:
    """Write homogeneous dict rows; column order follows the first row."""
    if not rows:
        raise ValueError("no rows to write")
    columns = list(rows[0].keys())
    write_csv(path, columns, [[row.get(c) for c in columns] for row in rows])


def write_pareto(rows: Sequence[ParetoRow], csv_path: str, json_path: str) -> None:
    columns = ["label", "mean_total_tokens", "accuracy", "dominated"]
    write_csv(csv_path, columns, [[r.label, r.mean_total_tokens, r.accuracy, r.dominated] for r in rows])
    series = {
        "series": [
            {
                "label": r.label,
                "mean_total_tokens": round(r.mean_total_tokens, 4),
                "accuracy": round(r.accuracy, 4),
                "dominated": r.dominated,
            }
            for r in rows
        ]
    }
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(series, fh, indent=2)
        fh.write("\n")
