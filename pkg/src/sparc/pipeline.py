"""Two-stage orchestration: detect relevant regions, then reason over crops.

Stage 1 sends the budget-resized base image with a detection prompt and runs
N seeded rollouts; hypotheses are fused and crops are cut from the original
full-resolution image (downsized only if they exceed the crop cap, never
upscaled). Stage 2 re-sends the byte-identical base image block, appends the
crops, and asks for a letter answer with greedy decoding. The shared leading
image block is what lets a serving backend reuse its visual KV cache between
the stages.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

from PIL import Image

from .backend import (
    Backend,
    BackendError,
    Block,
    ChatRequest,
    ImageBlock,
    RequestMeta,
    TextBlock,
    batched_complete,
)
from .fusion import FusedBox, FusionConfig, wbf
from .geometry import (
    BoundingBox,
    CoordSpace,
    ImageDims,
    ResolutionBudget,
    TokenCounter,
    point_to_crop,
    resize_dims,
    visual_tokens,
)
from .parsing import IrdHypothesis, RawModelText, extract_choice_letter, parse_boxes, parse_points


@dataclass(frozen=True)
class PromptTemplates:
    """Verbatim stage templates; {question} is the only substitution slot."""

    ird_box: str
    ird_point: str
    qa: str


_IRD_BOX_TEMPLATE = """You are a helpful assistant capable of doing object detection.
You will be given an image and a question for context.
Your role is not to answer the question, but identify the objects the user will ask for and return their 2D bounding box and label in JSON format.
The images will be very low resolution, but the objects will be there.
Given this image and the following question:

{question}

DO NOT ANSWER THE QUESTION. Identify the relevant objects and return their 2D bounding box and label in JSON format."""

_IRD_POINT_TEMPLATE = """Question: {question}

You are a helpful assistant. Your task is to POINT to the objects relevant to the user's question."""

_QA_TEMPLATE = """You are a helpful assistant. You are given an image and relevant crops to answer the following question:

Question: {question}

Answer with the option's letter from the given choices directly. Predict the letter only."""

PROMPT_SETS = {
    "default": PromptTemplates(ird_box=_IRD_BOX_TEMPLATE, ird_point=_IRD_POINT_TEMPLATE, qa=_QA_TEMPLATE),
}


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a two-stage run depends on, immutable after construction."""

    budget: ResolutionBudget = field(default_factory=ResolutionBudget)
    consistency_n: int = 1
    ird_temperature: Optional[float] = None  # None: 0.7 when consistency_n > 1, else greedy
    fusion: FusionConfig = field(default_factory=FusionConfig)
    modality: str = "box"  # "box" or "point"
    point_side: int = 256
    patch: TokenCounter = field(default_factory=TokenCounter)
    global_seed: int = 0
    prompt_set: str = "default"
    coord_space_hint: Optional[CoordSpace] = None
    point_coord_space: str = "percent"
    model_name: str = ""
    max_tokens: int = 512

    def __post_init__(self) -> None:
        if self.consistency_n < 1:
            raise ValueError(f"consistency_n must be >= 1, got {self.consistency_n}")
        if self.ird_temperature is not None and self.ird_temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.ird_temperature}")
        if self.modality not in ("box", "point"):
            raise ValueError(f"modality must be 'box' or 'point', got {self.modality!r}")
        if self.point_side < 1:
            raise ValueError(f"point_side must be >= 1, got {self.point_side}")

    @property
    def effective_ird_temperature(self) -> float:
        if self.ird_temperature is not None:
            return self.ird_temperature
        return 0.7 if self.consistency_n > 1 else 0.0

    def templates(self) -> PromptTemplates:
        try:
            return PROMPT_SETS[self.prompt_set]
        except KeyError:
            raise ValueError(f"unknown prompt_set {self.prompt_set!r}") from None


@dataclass(frozen=True)
class StagePrompts:
    """Both stages' messages; their first image block is the same bytes object."""

    ird_messages: Tuple[Block, ...]
    reasoning_messages: Tuple[Block, ...]
    shared_image_ref: bytes


@dataclass(frozen=True)
class Crop:
    """An extracted crop image, its emitted dims, and its source box in original space."""

    image: Image.Image
    dims: ImageDims
    source_box: BoundingBox


@dataclass
class EvalRecord:
    """Scored, budget-accounted outcome of one sample.

    timing_s, prompts and hypotheses are runtime-only and excluded from
    serialization so that records.jsonl is byte-stable across runs.
    """

    sample_id: str
    resolution: str
    base_dims: ImageDims
    raw_box_count: int
    fused_boxes: List[FusedBox]
    crops_dims: List[ImageDims]
    stage1_visual_tokens: int
    stage2_visual_tokens: int
    stage1_completion_tokens: int
    stage2_completion_tokens: int
    prompt_text_tokens: int
    stage1_texts: List[str]
    predicted_letter: Optional[str]
    correct: bool
    warnings: List[str]
    error: Optional[str] = None
    timing_s: float = 0.0
    prompts: Optional[StagePrompts] = None
    hypotheses: List[IrdHypothesis] = field(default_factory=list)

    @property
    def total_tokens(self) -> int:
        return (
            self.stage1_visual_tokens
            + self.stage2_visual_tokens
            + self.stage1_completion_tokens
            + self.stage2_completion_tokens
            + self.prompt_text_tokens
        )


def record_to_dict(record: EvalRecord) -> dict:
    """JSON-safe view of a record with runtime-only fields stripped."""
    return {
        "sample_id": record.sample_id,
        "resolution": record.resolution,
        "base_dims": list(record.base_dims.as_tuple()),
        "raw_box_count": record.raw_box_count,
        "fused_boxes": [
            {
                "box": list(fb.box.as_tuple()),
                "member_count": fb.member_count,
                "member_rollouts": sorted(fb.member_rollouts),
            }
            for fb in record.fused_boxes
        ],
        "crops_dims": [list(d.as_tuple()) for d in record.crops_dims],
        "stage1_visual_tokens": record.stage1_visual_tokens,
        "stage2_visual_tokens": record.stage2_visual_tokens,
        "stage1_completion_tokens": record.stage1_completion_tokens,
        "stage2_completion_tokens": record.stage2_completion_tokens,
        "prompt_text_tokens": record.prompt_text_tokens,
        "total_tokens": record.total_tokens,
        "stage1_texts": list(record.stage1_texts),
        "predicted_letter": record.predicted_letter,
        "correct": record.correct,
        "warnings": list(record.warnings),
        "error": record.error,
    }


def record_to_json_line(record: EvalRecord) -> str:
    return json.dumps(record_to_dict(record), separators=(",", ":"), sort_keys=False)


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed from arbitrary parts (order-sensitive, process-independent)."""
    blob = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") >> 1


@lru_cache(maxsize=256)
def _load_image(path: str) -> Image.Image:
    with Image.open(path) as im:
        return im.convert("RGB")


def image_dims(path: str) -> ImageDims:
    w, h = _load_image(path).size
    return ImageDims(w, h)


def encode_png(image: Image.Image) -> bytes:
    # compress_level pinned for speed and byte-stable output
    buf = io.BytesIO()
    image.save(buf, format="PNG", compress_level=1)
    return buf.getvalue()


def _resize_image(image: Image.Image, dims: ImageDims) -> Image.Image:
    if image.size == dims.as_tuple():
        return image
    return image.resize(dims.as_tuple(), Image.BILINEAR)


@lru_cache(maxsize=512)
def _base_block_cached(path: str, longest_side: Union[int, str]) -> ImageBlock:
    original = _load_image(path)
    dims = ImageDims(*original.size)
    target = resize_dims(dims, ResolutionBudget(longest_side=longest_side))
    return ImageBlock(data=encode_png(_resize_image(original, target)), dims=target)


def base_image_block(path: str, budget: ResolutionBudget) -> ImageBlock:
    """Budget-resized base image as an encoded block; cached per (path, budget)."""
    return _base_block_cached(path, budget.longest_side)


def clear_image_caches() -> None:
    _load_image.cache_clear()
    _base_block_cached.cache_clear()


def format_question_with_choices(sample) -> str:
    lines = [sample.question]
    lines += [f"{letter}. {text}" for letter, text in sample.choices]
    return "\n".join(lines)


def build_ird_prompt(sample, cfg: PipelineConfig, base_block: Optional[ImageBlock] = None) -> Tuple[Block, ...]:
    """Stage-1 messages: budget-resized base image, then the detection template."""
    templates = cfg.templates()
    if not sample.question.strip():
        raise ValueError(f"sample {sample.sample_id!r} has an empty question")
    base = base_block or base_image_block(sample.image_path, cfg.budget)
    template = templates.ird_box if cfg.modality == "box" else templates.ird_point
    return (base, TextBlock(template.replace("{question}", sample.question)))


def build_reasoning_prompt(
    sample,
    crop_blocks: Sequence[ImageBlock],
    cfg: PipelineConfig,
    base_block: Optional[ImageBlock] = None,
) -> Tuple[Block, ...]:
    """Stage-2 messages: shared base image, crops in fused order, then the QA template.

    The question slot receives the question followed by the enumerated
    choices, one "<letter>. <text>" line each.
    """
    templates = cfg.templates()
    base = base_block or base_image_block(sample.image_path, cfg.budget)
    text = templates.qa.replace("{question}", format_question_with_choices(sample))
    return (base, *crop_blocks, TextBlock(text))


def run_ird(
    sample,
    cfg: PipelineConfig,
    backend: Backend,
    base_block: Optional[ImageBlock] = None,
    max_in_flight: int = 4,
) -> Tuple[List[IrdHypothesis], List[str], int]:
    """Run N seeded detection rollouts and parse them.

    Per-rollout seeds derive from (global_seed, sample_id, rollout index), so
    scheduling cannot change results. Returns (hypotheses ordered by rollout,
    error strings for failed rollouts, total completion tokens).
    """
    messages = build_ird_prompt(sample, cfg, base_block)
    dims = image_dims(sample.image_path)
    gt = tuple(sample.gt_boxes or ())
    letters = tuple(letter for letter, _ in sample.choices)
    reqs = [
        ChatRequest(
            messages=messages,
            temperature=cfg.effective_ird_temperature,
            max_tokens=cfg.max_tokens,
            model_name=cfg.model_name,
            seed=derive_seed(cfg.global_seed, sample.sample_id, "rollout", i),
            meta=RequestMeta(
                sample_id=sample.sample_id,
                rollout_index=i,
                stage="ird",
                modality=cfg.modality,
                dims=dims,
                gt_boxes=gt,
                answer_letter=sample.answer_letter,
                choice_letters=letters,
            ),
        )
        for i in range(cfg.consistency_n)
    ]
    results = batched_complete(backend, reqs, max_in_flight)
    hypotheses: List[IrdHypothesis] = []
    errors: List[str] = []
    completion_tokens = 0
    for i, result in enumerate(results):
        if isinstance(result, BackendError):
            errors.append(f"rollout {i}: {result}")
            continue
        completion_tokens += result.completion_tokens
        raw = RawModelText(result.text, stage="ird", rollout_index=i)
        if cfg.modality == "box":
            hypotheses.append(parse_boxes(raw, dims, cfg.coord_space_hint))
        else:
            hypotheses.append(parse_points(raw, dims, coord_space=cfg.point_coord_space))
    return hypotheses, errors, completion_tokens


def extract_crops(
    fused: Sequence[FusedBox],
    original: Image.Image,
    cfg: PipelineConfig,
) -> Tuple[List[Crop], List[str]]:
    """Cut fused boxes out of the full-resolution original.

    Box corners are snapped outward to integer pixels and clamped; crops whose
    longest side exceeds the budget's crop cap are downsized (never upscaled).
    Boxes that collapse to zero area after clamping are skipped with a warning.
    """
    width, height = original.size
    cap = ResolutionBudget(longest_side=cfg.budget.effective_crop_cap)
    crops: List[Crop] = []
    warnings: List[str] = []
    for i, fb in enumerate(fused):
        x1 = max(math.floor(fb.box.x1), 0)
        y1 = max(math.floor(fb.box.y1), 0)
        x2 = min(math.ceil(fb.box.x2), width)
        y2 = min(math.ceil(fb.box.y2), height)
        if x2 - x1 < 1 or y2 - y1 < 1:
            warnings.append(f"crop {i}: box {fb.box.as_tuple()} has no area inside the image, skipped")
            continue
        crop_dims = ImageDims(x2 - x1, y2 - y1)
        target = resize_dims(crop_dims, cap)
        image = original.crop((x1, y1, x2, y2))
        if target != crop_dims:
            image = _resize_image(image, target)
        crops.append(Crop(image=image, dims=target, source_box=BoundingBox(x1, y1, x2, y2)))
    return crops, warnings


def run_sample(
    sample,
    cfg: PipelineConfig,
    backend: Backend,
    forced_boxes: Optional[Sequence[BoundingBox]] = None,
    seed_salt: str = "",
    ird_parallelism: int = 4,
) -> EvalRecord:
    """Run the full two-stage pipeline on one sample and score it.

    With forced_boxes the detection stage is bypassed: the given boxes (in
    original pixel space) act as the raw stage-1 output of a single rollout,
    and an empty list reproduces the zero-crop native baseline. Per-stage
    backend failures are recorded in the result, not raised.
    """
    start = time.perf_counter()
    warnings: List[str] = []
    original = _load_image(sample.image_path)
    dims = ImageDims(*original.size)
    base = base_image_block(sample.image_path, cfg.budget)

    hypotheses: List[IrdHypothesis] = []
    stage1_texts: List[str] = []
    stage1_completion = 0
    pairs: List[Tuple[int, BoundingBox]] = []
    ird_messages: Tuple[Block, ...] = ()

    if forced_boxes is None:
        ird_messages = build_ird_prompt(sample, cfg, base)
        hypotheses, errors, stage1_completion = run_ird(
            sample, cfg, backend, base_block=base, max_in_flight=ird_parallelism
        )
        warnings += errors
        for hyp in hypotheses:
            stage1_texts.append(hyp.raw_text)
            warnings += [f"rollout {hyp.rollout_index}: {w}" for w in hyp.parse_warnings]
            if cfg.modality == "box":
                pairs += [(hyp.rollout_index, box) for box in hyp.boxes]
            else:
                for point in hyp.points:
                    try:
                        pairs.append((hyp.rollout_index, point_to_crop(point, dims, cfg.point_side)))
                    except ValueError as exc:
                        warnings.append(f"rollout {hyp.rollout_index}: {exc}")
        stage1_visual = visual_tokens(base.dims, cfg.patch)
    else:
        pairs = [(0, box) for box in forced_boxes]
        stage1_visual = 0

    fused = wbf(pairs, cfg.fusion)
    crops, crop_warnings = extract_crops(fused, original, cfg)
    warnings += crop_warnings
    crop_blocks = [ImageBlock(data=encode_png(c.image), dims=c.dims) for c in crops]
    reasoning_messages = build_reasoning_prompt(sample, crop_blocks, cfg, base)

    seed_parts: List[object] = [cfg.global_seed, sample.sample_id, "reasoning"]
    if seed_salt:
        seed_parts.append(seed_salt)
    request = ChatRequest(
        messages=reasoning_messages,
        temperature=0.0,  # reasoning stays greedy even when detection samples
        max_tokens=cfg.max_tokens,
        model_name=cfg.model_name,
        seed=derive_seed(*seed_parts),
        meta=RequestMeta(
            sample_id=sample.sample_id,
            rollout_index=0,
            stage="reasoning",
            modality=cfg.modality,
            dims=dims,
            gt_boxes=tuple(sample.gt_boxes or ()),
            crop_boxes=tuple(c.source_box for c in crops),
            answer_letter=sample.answer_letter,
            choice_letters=tuple(letter for letter, _ in sample.choices),
        ),
    )
    predicted: Optional[str] = None
    stage2_completion = 0
    error: Optional[str] = None
    try:
        response = backend.complete(request)
        stage2_completion = response.completion_tokens
        predicted = extract_choice_letter(
            RawModelText(response.text, stage="reasoning"),
            {letter for letter, _ in sample.choices},
        )
    except BackendError as exc:
        # detection failures degrade to the native baseline, but a failed
        # reasoning request leaves the sample unscored
        error = f"reasoning: {exc}"
        warnings.append(error)

    stage2_visual = visual_tokens(base.dims, cfg.patch) + sum(
        visual_tokens(c.dims, cfg.patch) for c in crops
    )
    prompt_text_tokens = sum(
        (len(block.text) + 3) // 4
        for messages in (ird_messages, reasoning_messages)
        for block in messages
        if isinstance(block, TextBlock)
    )
    return EvalRecord(
        sample_id=sample.sample_id,
        resolution=cfg.budget.label,
        base_dims=base.dims,
        raw_box_count=len(pairs),
        fused_boxes=list(fused),
        crops_dims=[c.dims for c in crops],
        stage1_visual_tokens=stage1_visual,
        stage2_visual_tokens=stage2_visual,
        stage1_completion_tokens=stage1_completion,
        stage2_completion_tokens=stage2_completion,
        prompt_text_tokens=prompt_text_tokens,
        stage1_texts=stage1_texts,
        predicted_letter=predicted,
        correct=predicted is not None and predicted == sample.answer_letter,
        warnings=warnings,
        error=error,
        timing_s=time.perf_counter() - start,
        prompts=StagePrompts(
            ird_messages=ird_messages,
            reasoning_messages=reasoning_messages,
            shared_image_ref=base.data,
        ),
        hypotheses=hypotheses,
    )
