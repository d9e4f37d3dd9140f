"""Parsers that turn raw model text into typed grounding hypotheses.

All parsers are total: malformed input degrades to an empty hypothesis with
warnings, never an exception, so a failed detection pass falls back to a
zero-crop reasoning run instead of killing a benchmark batch.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Set, Tuple

from .geometry import BoundingBox, CoordSpace, ImageDims, PointHypothesis, denormalize

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_+-]*[ \t]*\r?\n?(.*?)```", re.S)
_TAG_RE = re.compile(r"<(points?)\b([^<>]*?)/?>", re.I)
_ATTR_RE = re.compile(r"([a-zA-Z_][a-zA-Z0-9_]*)\s*=\s*\"([^\"]*)\"")
_DECODER = json.JSONDecoder()

#: Keys accepted for box coordinates inside a JSON object entry.
BOX_KEYS = ("bbox_2d", "bbox", "box")

#: Bound on how many '[' positions are probed per text, so adversarial
#: bracket floods cannot blow up parse time.
_MAX_ARRAY_STARTS = 200


@dataclass(frozen=True)
class RawModelText:
    """One completion as it came back from a backend."""

    text: str
    stage: str = "ird"  # "ird" or "reasoning"
    rollout_index: int = 0

    def __post_init__(self) -> None:
        if self.rollout_index < 0:
            raise ValueError(f"rollout_index must be >= 0, got {self.rollout_index}")


@dataclass
class IrdHypothesis:
    """Parsed grounding result of a single rollout.

    Boxes are in original-image pixel space (denormalized and clamped);
    points are converted to pixel space as well. A hypothesis carries boxes
    or points, never both.
    """

    rollout_index: int
    boxes: List[BoundingBox] = field(default_factory=list)
    points: List[PointHypothesis] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)
    parse_warnings: List[str] = field(default_factory=list)
    raw_text: str = ""

    @property
    def is_empty(self) -> bool:
        return not self.boxes and not self.points


def _first_json_array(text: str) -> Optional[list]:
    """First JSON array found in the text, searching inside code fences first."""
    candidates = [m.group(1) for m in _FENCE_RE.finditer(text)]
    candidates.append(text)
    for chunk in candidates:
        idx = chunk.find("[")
        starts = 0
        while idx != -1 and starts < _MAX_ARRAY_STARTS:
            try:
                value, _ = _DECODER.raw_decode(chunk, idx)
            except ValueError:
                pass
            else:
                if isinstance(value, list):
                    return value
            starts += 1
            idx = chunk.find("[", idx + 1)
    return None


def _entry_coords(entry: object) -> Tuple[Optional[Sequence[float]], str, str]:
    """Extract (coords, label, error) from one array entry."""
    if isinstance(entry, dict):
        for key in BOX_KEYS:
            if key in entry:
                label = entry.get("label", "")
                return entry[key], (label if isinstance(label, str) else str(label)), ""
        return None, "", f"object has none of the box keys {BOX_KEYS}"
    if isinstance(entry, (list, tuple)):
        return entry, "", ""
    return None, "", f"entry of type {type(entry).__name__} is not a box"


def _valid_coords(coords: object) -> Optional[List[float]]:
    if not isinstance(coords, (list, tuple)) or len(coords) != 4:
        return None
    out: List[float] = []
    for c in coords:
        if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
            return None
        out.append(float(c))
    return out


def detect_coord_space(all_coords: Iterable[float], dims: ImageDims) -> CoordSpace:
    """Heuristic coordinate space when no hint is given.

    Values that cannot be pixels (beyond the longest image side) are treated
    as norm_1000, as are values all within [0, 1000] on an image larger than
    1000 px. Percent is never auto-detected; it needs an explicit hint.
    """
    coords = list(all_coords)
    if not coords:
        return "pixel"
    peak = max(abs(c) for c in coords)
    if peak > dims.longest:
        return "norm_1000"
    if peak <= 1000 and dims.longest > 1000:
        return "norm_1000"
    return "pixel"


def parse_boxes(
    raw: RawModelText,
    dims: ImageDims,
    coord_space_hint: Optional[CoordSpace] = None,
) -> IrdHypothesis:
    """Parse a JSON-style box list out of model text.

    Accepts the first JSON array in the text (code fences included), with
    entries shaped either ``{"bbox_2d": [x1, y1, x2, y2], "label": ...}``
    (keys bbox_2d/bbox/box) or bare ``[x1, y1, x2, y2]``. Coordinates are
    converted to original-image pixel space and clamped; the space is taken
    from the hint or auto-detected. Invalid entries are skipped with a
    warning; an unparseable text yields an empty hypothesis with a warning.
    """
    hyp = IrdHypothesis(rollout_index=raw.rollout_index, raw_text=raw.text)
    array = _first_json_array(raw.text)
    if array is None:
        hyp.parse_warnings.append("no JSON array found in model output")
        return hyp

    entries: List[Tuple[List[float], str]] = []
    for i, entry in enumerate(array):
        coords, label, err = _entry_coords(entry)
        if err:
            hyp.parse_warnings.append(f"entry {i}: {err}")
            continue
        valid = _valid_coords(coords)
        if valid is None:
            hyp.parse_warnings.append(f"entry {i}: expected 4 finite numbers, got {coords!r}")
            continue
        entries.append((valid, label))

    space: CoordSpace = coord_space_hint or detect_coord_space(
        (c for coords, _ in entries for c in coords), dims
    )
    for i, (coords, label) in enumerate(entries):
        x1, y1, x2, y2 = coords
        if x1 >= x2 or y1 >= y2:
            hyp.parse_warnings.append(f"entry {i}: inverted or empty box {coords}")
            continue
        try:
            box = denormalize(BoundingBox(x1, y1, x2, y2), space, dims)
        except ValueError as exc:
            hyp.parse_warnings.append(f"entry {i}: {exc}")
            continue
        hyp.boxes.append(box)
        hyp.labels.append(label)
    if not hyp.boxes and not hyp.parse_warnings:
        hyp.parse_warnings.append("JSON array contained no boxes")
    return hyp


def _tag_points(attrs: str) -> List[Tuple[float, float]]:
    """Coordinate pairs from a point tag's attribute string: x/y, then x1/y1, x2/y2, ..."""
    values = {name.lower(): val for name, val in _ATTR_RE.findall(attrs)}
    pairs: List[Tuple[str, str]] = []
    if "x" in values and "y" in values:
        pairs.append(("x", "y"))
    indices = sorted(
        int(m.group(1)) for m in (re.fullmatch(r"x(\d+)", k) for k in values) if m
    )
    for i in indices:
        if f"y{i}" in values:
            pairs.append((f"x{i}", f"y{i}"))
    out: List[Tuple[float, float]] = []
    for xk, yk in pairs:
        try:
            out.append((float(values[xk]), float(values[yk])))
        except ValueError:
            raise ValueError(f"non-numeric coordinates {values[xk]!r}, {values[yk]!r}")
    return out


def parse_points(
    raw: RawModelText,
    dims: ImageDims,
    coord_space: str = "percent",
) -> IrdHypothesis:
    """Parse ``<point x=".." y="..">`` / ``<points x1=".." y1=".." ...>`` tags.

    Coordinates default to percent of the image dimensions and come back as
    pixel-space points. Malformed or out-of-range tags are skipped with a
    warning; no tags at all yields an empty hypothesis.
    """
    if coord_space not in ("percent", "pixel"):
        raise ValueError(f"unknown point coord_space {coord_space!r}")
    hyp = IrdHypothesis(rollout_index=raw.rollout_index, raw_text=raw.text)
    found_any = False
    for m in _TAG_RE.finditer(raw.text):
        found_any = True
        attrs = m.group(2)
        label_m = _ATTR_RE.findall(attrs)
        label = next((v for k, v in label_m if k.lower() == "alt"), "")
        try:
            pairs = _tag_points(attrs)
        except ValueError as exc:
            hyp.parse_warnings.append(f"tag {m.group(0)!r}: {exc}")
            continue
        if not pairs:
            hyp.parse_warnings.append(f"tag {m.group(0)!r}: no coordinate attributes")
            continue
        for x, y in pairs:
            if not (math.isfinite(x) and math.isfinite(y)):
                hyp.parse_warnings.append(f"non-finite point ({x}, {y})")
                continue
            if coord_space == "percent":
                if not (0 <= x <= 100 and 0 <= y <= 100):
                    hyp.parse_warnings.append(f"percent point ({x}, {y}) outside [0, 100]")
                    continue
                px, py = x / 100.0 * dims.width, y / 100.0 * dims.height
            else:
                if not (0 <= x <= dims.width and 0 <= y <= dims.height):
                    hyp.parse_warnings.append(f"pixel point ({x}, {y}) outside the image")
                    continue
                px, py = x, y
            hyp.points.append(PointHypothesis(px, py, "pixel"))
            hyp.labels.append(label)
    if not found_any:
        hyp.parse_warnings.append("no point tags found in model output")
    return hyp


def extract_choice_letter(raw: RawModelText, valid_letters: Set[str]) -> Optional[str]:
    """First valid option letter in reasoning output, or None.

    Matching is case-insensitive and whitespace-tolerant. A bare decorated
    letter ("A", "(b)", "C.") wins, then an explicit "answer ... X" phrase,
    then the first standalone letter token.
    """
    if not valid_letters:
        raise ValueError("valid_letters must be non-empty")
    if any(len(l) != 1 or not l.isalpha() for l in valid_letters):
        raise ValueError(f"valid letters must be single alphabetic characters, got {sorted(valid_letters)}")
    letters = {l.upper() for l in valid_letters}
    cls = "".join(sorted(re.escape(l) for l in letters))
    text = raw.text

    m = re.fullmatch(r"\s*\(?([%s])\)?[\s.:,;!]*" % cls, text, re.I)
    if m:
        return m.group(1).upper()
    m = re.search(r"\banswer\s*(?:is)?\s*[:\-]?\s*\(?([%s])\)?(?![a-zA-Z0-9])" % cls, text, re.I)
    if m:
        return m.group(1).upper()
    m = re.search(r"\b([%s])\b" % cls, text, re.I)
    if m:
        return m.group(1).upper()
    return None
