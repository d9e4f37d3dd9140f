import json

import numpy as np
import pytest

from sparc.geometry import BoundingBox, ImageDims
from sparc.parsing import (
    IrdHypothesis,
    RawModelText,
    extract_choice_letter,
    parse_boxes,
    parse_points,
)

DIMS = ImageDims(4000, 3000)


def ird(text, rollout=0):
    return RawModelText(text, stage="ird", rollout_index=rollout)


def reasoning(text):
    return RawModelText(text, stage="reasoning")


class TestParseBoxes:
    def test_direct_mapping_pixel_space(self):
        hyp = parse_boxes(ird('[{"bbox_2d":[10,20,110,220],"label":"scarf"}]'), DIMS, "pixel")
        assert hyp.boxes == [BoundingBox(10, 20, 110, 220)]
        assert hyp.labels == ["scarf"]
        assert hyp.parse_warnings == []

    def test_fenced_array_order_preserved(self):
        text = (
            "Here are the objects:\n```json\n"
            '[{"bbox_2d": [10, 10, 50, 50], "label": "cat"},\n'
            ' {"bbox_2d": [100, 100, 200, 200], "label": "dog"}]\n'
            "```\nthanks"
        )
        hyp = parse_boxes(ird(text), DIMS, "pixel")
        assert [b.as_tuple() for b in hyp.boxes] == [(10, 10, 50, 50), (100, 100, 200, 200)]
        assert hyp.labels == ["cat", "dog"]

    def test_absence_yields_empty_with_warning(self):
        hyp = parse_boxes(ird("no objects found"), DIMS)
        assert hyp.is_empty
        assert hyp.parse_warnings

    def test_alternate_keys_and_bare_arrays(self):
        hyp = parse_boxes(ird('[{"bbox":[1,2,3,4]},{"box":[5,6,7,8]},[9,10,11,12]]'), DIMS, "pixel")
        assert len(hyp.boxes) == 3
        assert hyp.labels == ["", "", ""]

    def test_invalid_entries_skipped_not_fatal(self):
        text = '[{"bbox_2d":[10,20,110,220]},{"bbox_2d":[9,9]},{"other":1},"junk",{"bbox_2d":[50,50,20,20]}]'
        hyp = parse_boxes(ird(text), DIMS, "pixel")
        assert len(hyp.boxes) == 1
        # one warning each: short coords, missing box key, non-dict entry, inverted box
        assert len(hyp.parse_warnings) == 4

    def test_norm1000_auto_detected_when_image_larger(self):
        hyp = parse_boxes(ird('[{"bbox_2d":[250,250,750,750]}]'), ImageDims(2000, 2000))
        assert hyp.boxes[0] == BoundingBox(500, 500, 1500, 1500)

    def test_values_beyond_image_imply_norm1000(self):
        hyp = parse_boxes(ird('[{"bbox_2d":[0,0,1000,1000]}]'), ImageDims(640, 480))
        assert hyp.boxes[0] == BoundingBox(0, 0, 640, 480)

    def test_explicit_hint_wins(self):
        hyp = parse_boxes(ird('[{"bbox_2d":[100,100,200,200]}]'), ImageDims(2000, 2000), "pixel")
        assert hyp.boxes[0] == BoundingBox(100, 100, 200, 200)

    def test_boxes_clamped_into_image(self):
        hyp = parse_boxes(ird("[[-50, -50, 900, 900]]"), ImageDims(640, 480), "pixel")
        assert hyp.boxes[0] == BoundingBox(0, 0, 640, 480)

    def test_round_trip_exact_in_pixel_space(self):
        rng = np.random.default_rng(5)
        boxes = []
        for _ in range(20):
            x1, y1 = rng.uniform(0, 1000, 2)
            w, h = rng.uniform(1, 500, 2)
            boxes.append(BoundingBox(x1, y1, min(x1 + w, 4000.0), min(y1 + h, 3000.0)))
        text = json.dumps([{"bbox_2d": list(b.as_tuple()), "label": f"o{i}"} for i, b in enumerate(boxes)])
        hyp = parse_boxes(ird(text), DIMS, "pixel")
        assert hyp.boxes == boxes

    def test_rollout_index_carried(self):
        hyp = parse_boxes(ird("[]", rollout=5), DIMS, "pixel")
        assert hyp.rollout_index == 5


class TestParsePoints:
    def test_single_percent_point(self):
        hyp = parse_points(ird('<point x="50.0" y="50.0">ear</point>'), ImageDims(1000, 1000))
        assert len(hyp.points) == 1
        assert (hyp.points[0].x, hyp.points[0].y) == (500.0, 500.0)
        assert hyp.points[0].coord_space == "pixel"

    def test_multi_point_tag(self):
        hyp = parse_points(ird('<points x1="10" y1="20" x2="30" y2="40" alt="objects">objects</points>'), ImageDims(1000, 500))
        assert [(p.x, p.y) for p in hyp.points] == [(100.0, 100.0), (300.0, 200.0)]
        assert hyp.labels == ["objects", "objects"]

    def test_empty_string(self):
        hyp = parse_points(ird(""), DIMS)
        assert hyp.is_empty
        assert hyp.parse_warnings

    def test_alt_attribute_as_label(self):
        hyp = parse_points(ird('<point x="10" y="10" alt="cat"/>'), ImageDims(100, 100))
        assert hyp.labels == ["cat"]

    def test_out_of_range_percent_skipped(self):
        hyp = parse_points(ird('<point x="150" y="50">x</point> <point x="20" y="20">y</point>'), DIMS)
        assert len(hyp.points) == 1
        assert any("outside [0, 100]" in w for w in hyp.parse_warnings)

    def test_malformed_coordinates_skipped(self):
        hyp = parse_points(ird('<point x="abc" y="10">x</point>'), DIMS)
        assert hyp.is_empty
        assert hyp.parse_warnings

    def test_pixel_coord_space_option(self):
        hyp = parse_points(ird('<point x="120" y="80">t</point>'), ImageDims(1000, 1000), coord_space="pixel")
        assert (hyp.points[0].x, hyp.points[0].y) == (120.0, 80.0)

    def test_unknown_space_rejected(self):
        with pytest.raises(ValueError):
            parse_points(ird("<point x='1' y='1'/>"), DIMS, coord_space="bogus")


class TestExtractChoiceLetter:
    LETTERS = {"A", "B", "C", "D"}

    def test_bare_letter(self):
        assert extract_choice_letter(reasoning("A"), self.LETTERS) == "A"

    def test_phrase_priority_oracle(self):
        # enumerated phrasings and their expected extraction
        cases = [
            ("A", "A"),
            ("(A)", "A"),
            ("A.", "A"),
            ("a", "A"),
            ("  B \n", "B"),
            ("Answer: A", "A"),
            ("answer: d", "D"),
            ("The answer is (B).", "B"),
            ("The answer is C", "C"),
            ("I think the answer is: B", "B"),
            ("Option (C) looks right", "C"),
            ("blue", None),
            ("", None),
            ("ABBA tribute", None),
        ]
        for text, expected in cases:
            assert extract_choice_letter(reasoning(text), self.LETTERS) == expected, text

    def test_absence_is_none(self):
        assert extract_choice_letter(reasoning("the scarf is blue"), self.LETTERS) is None

    def test_whitespace_and_case_invariance(self):
        for text in ("c", "C", " c\t", "\n C . \n"):
            assert extract_choice_letter(reasoning(text), self.LETTERS) == "C"

    def test_respects_letter_set(self):
        assert extract_choice_letter(reasoning("E"), self.LETTERS) is None
        assert extract_choice_letter(reasoning("E"), {"E", "F"}) == "E"

    def test_letter_validation(self):
        with pytest.raises(ValueError):
            extract_choice_letter(reasoning("A"), set())
        with pytest.raises(ValueError):
            extract_choice_letter(reasoning("A"), {"AA"})


class TestTotality:
    def test_fuzz_smoke_random_bytes(self):
        rng = np.random.default_rng(99)
        for _ in range(2000):
            n = int(rng.integers(0, 200))
            text = rng.bytes(n).decode("utf-8", errors="replace")
            raw = RawModelText(text, stage="ird")
            assert isinstance(parse_boxes(raw, DIMS), IrdHypothesis)
            assert isinstance(parse_points(raw, DIMS), IrdHypothesis)
            out = extract_choice_letter(RawModelText(text, stage="reasoning"), {"A", "B", "C", "D"})
            assert out is None or out in {"A", "B", "C", "D"}

    def test_adversarial_fragments(self):
        nasty = [
            "[" * 500,
            "```json\n[\n```",
            '[{"bbox_2d": [1e400, 0, 10, 10]}]',
            '[{"bbox_2d": [true, false, null, 4]}]',
            '[{"bbox_2d": "not a list"}]',
            "<points " + " ".join(f'x{i}="{i}" y{i}="{i}"' for i in range(50)) + ">",
            "<point x=\"\" y=\"\">",
            "\x00\x01\x02[]{}<>",
            "answer answer answer",
        ]
        for text in nasty:
            parse_boxes(RawModelText(text), DIMS)
            parse_points(RawModelText(text), DIMS)
            extract_choice_letter(RawModelText(text, stage="reasoning"), {"A", "B"})
