"""SPARC: decoupled perception/reasoning inference for vision-language backends.

The pipeline first asks a grounding-capable model to localize question-relevant
image regions (N seeded rollouts, fused with weighted box fusion), then asks
the same model to answer conditioned on the base image plus the extracted
crops, under an explicit visual-token budget.
"""

from .backend import (
    API_KEY_ENV,
    BackendError,
    ChatRequest,
    ChatResponse,
    HttpBackend,
    HttpBackendConfig,
    ImageBlock,
    OracleBackend,
    OracleConfig,
    RequestMeta,
    TextBlock,
    batched_complete,
)
from .fusion import CropCountStats, FusedBox, FusionConfig, crop_count_stats, wbf
from .geometry import (
    FULL,
    SEEDED_RANDOM,
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
from .harness import (
    BenchmarkSample,
    EvalSummary,
    ParetoRow,
    SftTrace,
    SweepSpec,
    evaluate,
    harvest_sft,
    load_dataset,
    pareto_report,
    sweep_consistency,
    sweep_expansion,
    sweep_overlap,
    sweep_resolution,
)
from .parsing import IrdHypothesis, RawModelText, extract_choice_letter, parse_boxes, parse_points
from .pipeline import (
    EvalRecord,
    PipelineConfig,
    StagePrompts,
    build_ird_prompt,
    build_reasoning_prompt,
    derive_seed,
    extract_crops,
    run_ird,
    run_sample,
)
from .synthetic import make_synthetic_dataset

__version__ = "0.1.0"

__all__ = [
    "API_KEY_ENV",
    "BackendError",
    "BenchmarkSample",
    "BoundingBox",
    "ChatRequest",
    "ChatResponse",
    "CropCountStats",
    "EvalRecord",
    "EvalSummary",
    "FULL",
    "FusedBox",
    "FusionConfig",
    "HttpBackend",
    "HttpBackendConfig",
    "ImageBlock",
    "ImageDims",
    "IrdHypothesis",
    "OracleBackend",
    "OracleConfig",
    "ParetoRow",
    "PerturbationSpec",
    "PipelineConfig",
    "PointHypothesis",
    "RawModelText",
    "RequestMeta",
    "ResolutionBudget",
    "SEEDED_RANDOM",
    "SftTrace",
    "StagePrompts",
    "SweepSpec",
    "TextBlock",
    "TokenCounter",
    "batched_complete",
    "build_ird_prompt",
    "build_reasoning_prompt",
    "crop_count_stats",
    "denormalize",
    "derive_seed",
    "evaluate",
    "expand",
    "extract_choice_letter",
    "extract_crops",
    "harvest_sft",
    "iou",
    "load_dataset",
    "make_synthetic_dataset",
    "overlap_ratio",
    "pareto_report",
    "parse_boxes",
    "parse_points",
    "perturb",
    "point_to_crop",
    "resize_dims",
    "run_ird",
    "run_sample",
    "sweep_consistency",
    "sweep_expansion",
    "sweep_overlap",
    "sweep_resolution",
    "visual_tokens",
    "wbf",
]
