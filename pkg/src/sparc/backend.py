"""Uniform access to chat-style VLM inference.

Two backends share one request/response contract: an HTTP client for
chat-completions-style endpoints, and a seeded in-process oracle that
simulates localization noise and overlap-dependent answer accuracy for
desk-scale runs. All oracle randomness derives from explicit seeds, so
responses are byte-identical across runs and parallelism levels.
"""

from __future__ import annotations

import base64
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import requests

from .geometry import BoundingBox, ImageDims, TokenCounter, overlap_ratio, visual_tokens

#: Env var holding the bearer token for the HTTP backend.
API_KEY_ENV = "SPARC_API_KEY"

_RETRY_STATUSES = {429, 500, 502, 503, 504}


@dataclass(frozen=True)
class TextBlock:
    text: str


@dataclass(frozen=True)
class ImageBlock:
    data: bytes
    dims: ImageDims


Block = Union[TextBlock, ImageBlock]


@dataclass(frozen=True)
class RequestMeta:
    """Bookkeeping attached to a request: identity plus oracle context.

    The HTTP backend only uses the identity fields for error reporting; the
    oracle additionally reads the ground-truth geometry and answer key.
    """

    sample_id: str = ""
    rollout_index: int = 0
    stage: str = "ird"  # "ird" or "reasoning"
    modality: str = "box"  # "box" or "point"
    dims: Optional[ImageDims] = None
    gt_boxes: Tuple[BoundingBox, ...] = ()
    crop_boxes: Tuple[BoundingBox, ...] = ()
    answer_letter: str = ""
    choice_letters: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ChatRequest:
    """One single-turn completion request: ordered content blocks plus decoding knobs."""

    messages: Tuple[Block, ...]
    temperature: float = 0.0
    max_tokens: int = 512
    model_name: str = ""
    seed: Optional[int] = None
    meta: Optional[RequestMeta] = None

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("request needs at least one content block")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if not isinstance(self.messages, tuple):
            object.__setattr__(self, "messages", tuple(self.messages))


@dataclass(frozen=True)
class ChatResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: float = 0.0


class BackendError(Exception):
    """Inference failure carrying the sample/rollout identity for bookkeeping."""

    def __init__(self, message: str, *, sample_id: str = "", rollout_index: Optional[int] = None, stage: str = ""):
        super().__init__(message)
        self.sample_id = sample_id
        self.rollout_index = rollout_index
        self.stage = stage

    @classmethod
    def for_request(cls, message: str, req: ChatRequest) -> "BackendError":
        meta = req.meta
        return cls(
            message,
            sample_id=meta.sample_id if meta else "",
            rollout_index=meta.rollout_index if meta else None,
            stage=meta.stage if meta else "",
        )


def _text_token_estimate(text: str) -> int:
    return (len(text) + 3) // 4


def _prompt_token_estimate(messages: Sequence[Block], patch_px: int) -> int:
    counter = TokenCounter(patch_px=patch_px)
    total = 0
    for block in messages:
        if isinstance(block, ImageBlock):
            total += visual_tokens(block.dims, counter)
        else:
            total += _text_token_estimate(block.text)
    return total


@dataclass(frozen=True)
class OracleConfig:
    """Behavior of the seeded simulation backend.

    sigma_frac scales localization noise: the emitted box center is displaced
    by Normal(0, sigma) per axis with sigma = sigma_frac * temperature *
    gt-half-diagonal, so greedy decoding is exact. The answer-accuracy curve
    is a piecewise-linear ramp in the best crop/gt overlap ratio: p_floor
    below ramp_a, p_ceil above ramp_b, linear in between.
    """

    sigma_frac: float = 0.15
    p_floor: float = 0.3
    p_ceil: float = 0.95
    ramp_a: float = 0.2
    ramp_b: float = 0.8
    seed: int = 0
    patch_px: int = 28

    def __post_init__(self) -> None:
        if not (0 <= self.p_floor <= self.p_ceil <= 1):
            raise ValueError(f"need 0 <= p_floor <= p_ceil <= 1, got {self.p_floor}, {self.p_ceil}")
        if not (0 <= self.ramp_a < self.ramp_b <= 1):
            raise ValueError(f"need 0 <= ramp_a < ramp_b <= 1, got {self.ramp_a}, {self.ramp_b}")
        if self.sigma_frac < 0:
            raise ValueError(f"sigma_frac must be >= 0, got {self.sigma_frac}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")

    def answer_probability(self, overlap: float) -> float:
        """Closed-form accuracy ramp evaluated at an overlap ratio."""
        if self.ramp_b == self.ramp_a:
            t = 1.0 if overlap >= self.ramp_b else 0.0
        else:
            t = min(max((overlap - self.ramp_a) / (self.ramp_b - self.ramp_a), 0.0), 1.0)
        return self.p_floor + (self.p_ceil - self.p_floor) * t


class OracleBackend:
    """Deterministic test-double backend.

    Detection requests get back noisy copies of the ground-truth boxes in the
    native output format of the configured modality (JSON boxes in norm_1000,
    or percent point tags). Reasoning requests are answered correctly with
    probability given by the overlap ramp. All randomness comes from
    (config seed, request seed), so identical requests always produce
    identical responses.
    """

    def __init__(self, config: OracleConfig | None = None):
        self.config = config or OracleConfig()

    def _rng(self, req: ChatRequest) -> np.random.Generator:
        return np.random.default_rng([self.config.seed, req.seed or 0])

    def complete(self, req: ChatRequest) -> ChatResponse:
        meta = req.meta
        if meta is None:
            raise BackendError("oracle backend requires request meta", stage="")
        if meta.stage == "ird":
            text = self._ird_text(req, meta)
        elif meta.stage == "reasoning":
            text = self._reasoning_text(req, meta)
        else:
            raise BackendError.for_request(f"unknown stage {meta.stage!r}", req)
        return ChatResponse(
            text=text,
            prompt_tokens=_prompt_token_estimate(req.messages, self.config.patch_px),
            completion_tokens=_text_token_estimate(text),
            latency_ms=0.0,
        )

    def _ird_text(self, req: ChatRequest, meta: RequestMeta) -> str:
        if meta.dims is None:
            raise BackendError.for_request("ird oracle request needs image dims in meta", req)
        rng = self._rng(req)
        dims = meta.dims
        noisy: List[BoundingBox] = []
        for gt in meta.gt_boxes:
            sigma = self.config.sigma_frac * req.temperature * gt.half_diagonal
            dx, dy = (rng.normal(0.0, sigma), rng.normal(0.0, sigma)) if sigma > 0 else (0.0, 0.0)
            noisy.append(BoundingBox(gt.x1 + dx, gt.y1 + dy, gt.x2 + dx, gt.y2 + dy))
        if meta.modality == "point":
            tags = []
            for i, box in enumerate(noisy):
                cx, cy = box.center
                x = min(max(cx / dims.width * 100.0, 0.0), 100.0)
                y = min(max(cy / dims.height * 100.0, 0.0), 100.0)
                tags.append(f'<point x="{x!r}" y="{y!r}" alt="target-{i}">target-{i}</point>')
            return " ".join(tags)
        entries = [
            {
                "bbox_2d": [
                    box.x1 / dims.width * 1000.0,
                    box.y1 / dims.height * 1000.0,
                    box.x2 / dims.width * 1000.0,
                    box.y2 / dims.height * 1000.0,
                ],
                "label": f"target-{i}",
            }
            for i, box in enumerate(noisy)
        ]
        return json.dumps(entries)

    def _reasoning_text(self, req: ChatRequest, meta: RequestMeta) -> str:
        rng = self._rng(req)
        if not meta.gt_boxes:
            overlap = 1.0  # nothing to localize: treat as answerable from the base image
        elif not meta.crop_boxes:
            overlap = 0.0
        else:
            overlap = max(overlap_ratio(crop, gt) for gt in meta.gt_boxes for crop in meta.crop_boxes)
        p = self.config.answer_probability(overlap)
        letters = meta.choice_letters or ("A",)
        answer = meta.answer_letter or letters[0]
        if rng.uniform() <= p:
            return answer
        wrong = [l for l in letters if l != answer]
        if not wrong:
            return answer
        return wrong[int(rng.integers(len(wrong)))]


@dataclass(frozen=True)
class HttpBackendConfig:
    """Connection settings for a chat-completions-style endpoint."""

    url: str
    model_name: str = ""
    timeout_s: float = 120.0
    max_attempts: int = 3
    backoff_base_s: float = 0.5
    backoff_factor: float = 2.0
    api_key_env: str = API_KEY_ENV

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError(f"max_attempts must be >= 1, got {self.max_attempts}")


class HttpBackend:
    """Client for a remote chat-completions endpoint with image content blocks.

    Transient failures (connection errors, timeouts, HTTP 429/5xx) are retried
    with exponential backoff up to max_attempts; retries re-send the exact same
    serialized body. Auth is a bearer token read from the configured env var.
    """

    def __init__(self, config: HttpBackendConfig):
        self.config = config

    def _payload(self, req: ChatRequest) -> dict:
        content: List[dict] = []
        for block in req.messages:
            if isinstance(block, ImageBlock):
                b64 = base64.b64encode(block.data).decode("ascii")
                content.append({"type": "image_url", "image_url": {"url": f"data:image/png;base64,{b64}"}})
            else:
                content.append({"type": "text", "text": block.text})
        payload = {
            "model": req.model_name or self.config.model_name,
            "messages": [{"role": "user", "content": content}],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        if req.seed is not None:
            payload["seed"] = req.seed
        return payload

    def complete(self, req: ChatRequest) -> ChatResponse:
        body = json.dumps(self._payload(req), separators=(",", ":")).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last_error = ""
        for attempt in range(self.config.max_attempts):
            if attempt > 0:
                time.sleep(self.config.backoff_base_s * self.config.backoff_factor ** (attempt - 1))
            start = time.perf_counter()
            try:
                resp = requests.post(self.config.url, data=body, headers=headers, timeout=self.config.timeout_s)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = f"transport failure: {exc}"
                continue
            latency_ms = (time.perf_counter() - start) * 1000.0
            if resp.status_code in _RETRY_STATUSES:
                last_error = f"HTTP {resp.status_code}"
                continue
            if not 200 <= resp.status_code < 300:
                raise BackendError.for_request(f"HTTP {resp.status_code}: {resp.text[:500]}", req)
            return self._parse_response(resp, req, latency_ms)
        raise BackendError.for_request(
            f"giving up after {self.config.max_attempts} attempts: {last_error}", req
        )

    def _parse_response(self, resp: requests.Response, req: ChatRequest, latency_ms: float) -> ChatResponse:
        try:
            doc = resp.json()
            text = doc["choices"][0]["message"]["content"]
            if not isinstance(text, str):
                raise TypeError("message content is not a string")
            usage = doc.get("usage", {})
            return ChatResponse(
                text=text,
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
                latency_ms=latency_ms,
            )
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError.for_request(f"unexpected response schema: {exc}", req)


Backend = Union[OracleBackend, HttpBackend]


def batched_complete(
    backend: Backend,
    requests_: Sequence[ChatRequest],
    max_in_flight: int,
) -> List[Union[ChatResponse, BackendError]]:
    """Run requests with bounded concurrency, responses in request order.

    Individual failures come back positionally as BackendError instances so
    sibling requests are unaffected.
    """
    if max_in_flight < 1:
        raise ValueError(f"max_in_flight must be >= 1, got {max_in_flight}")
    if not requests_:
        return []

    def one(req: ChatRequest) -> Union[ChatResponse, BackendError]:
        try:
            return backend.complete(req)
        except BackendError as exc:
            return exc
        except Exception as exc:  # defensive: keep siblings alive
            return BackendError.for_request(f"unexpected failure: {exc}", req)

    if max_in_flight == 1 or len(requests_) == 1:
        return [one(r) for r in requests_]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(one, requests_))
