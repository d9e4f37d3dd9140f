"""Seeded synthetic benchmarks for desk-scale runs against the oracle backend.

Generates a small pool of PNG images plus a JSONL dataset whose ground-truth
boxes are placed at seeded random positions. Image pixel content is
decorative (the oracle only reads geometry), so samples may share image
files; that keeps encode costs low for large sweeps.
"""

from __future__ import annotations

import json
import os
from typing import Sequence, Tuple

import numpy as np
from PIL import Image, ImageDraw

DEFAULT_LETTERS = ("A", "B", "C", "D")


def _draw_image(path: str, size: Tuple[int, int], rng: np.random.Generator) -> None:
    img = Image.new("RGB", size, tuple(int(v) for v in rng.integers(180, 240, 3)))
    draw = ImageDraw.Draw(img)
    for _ in range(6):
        x1, y1 = rng.integers(0, size[0] - 40), rng.integers(0, size[1] - 40)
        w, h = rng.integers(20, 200), rng.integers(20, 200)
        color = tuple(int(v) for v in rng.integers(0, 255, 3))
        draw.rectangle([int(x1), int(y1), int(min(x1 + w, size[0] - 1)), int(min(y1 + h, size[1] - 1))], fill=color)
    img.save(path, format="PNG", compress_level=1)


def make_synthetic_dataset(
    out_dir: str,
    n_samples: int,
    seed: int = 0,
    image_size: Tuple[int, int] = (1280, 960),
    box_side_range: Tuple[int, int] = (90, 160),
    n_images: int = 8,
    letters: Sequence[str] = DEFAULT_LETTERS,
    jsonl_name: str = "dataset.jsonl",
) -> str:
    """Write a synthetic multiple-choice dataset with ground-truth boxes.

    Returns the path of the JSONL file. Deterministic for a given seed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    image_names = []
    for i in range(min(n_images, n_samples)):
        name = f"image_{i:03d}.png"
        _draw_image(os.path.join(out_dir, name), image_size, rng)
        image_names.append(name)

    width, height = image_size
    lines = []
    for i in range(n_samples):
        side_w = int(rng.integers(box_side_range[0], box_side_range[1] + 1))
        side_h = int(rng.integers(box_side_range[0], box_side_range[1] + 1))
        margin = max(side_w, side_h)  # keep room so perturbed crops rarely clip
        x1 = int(rng.integers(margin, width - side_w - margin))
        y1 = int(rng.integers(margin, height - side_h - margin))
        answer = letters[int(rng.integers(len(letters)))]
        record = {
            "sample_id": f"synthetic-{i:05d}",
            "image_path": image_names[i % len(image_names)],
            "question": f"What is the color of object {i}?",
            "choices": [[letter, f"color-{letter.lower()}"] for letter in letters],
            "answer_letter": answer,
            "gt_boxes": [[x1, y1, x1 + side_w, y1 + side_h]],
            "tags": ["synthetic"],
        }
        lines.append(json.dumps(record, separators=(",", ":")))
    jsonl_path = os.path.join(out_dir, jsonl_name)
    with open(jsonl_path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")
    return jsonl_path
