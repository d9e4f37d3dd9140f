"""Weighted box fusion over hypotheses from independent rollouts.

Overlapping boxes are merged into their uniform-weight coordinate mean;
disjoint boxes are kept as singleton clusters and forwarded unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, Sequence, Tuple

from .geometry import BoundingBox, iou, mean_box

if TYPE_CHECKING:
    from .pipeline import EvalRecord


@dataclass(frozen=True)
class FusionConfig:
    """Clustering threshold and the (fixed) deterministic input ordering rule."""

    iou_threshold: float = 0.5
    ordering: str = "rollout-then-box"

    def __post_init__(self) -> None:
        if not (0 < self.iou_threshold <= 1):
            raise ValueError(f"iou_threshold must lie in (0, 1], got {self.iou_threshold}")
        if self.ordering != "rollout-then-box":
            raise ValueError(f"unsupported ordering rule {self.ordering!r}")


@dataclass(frozen=True)
class FusedBox:
    """One output cluster: mean box, member count, and contributing rollouts."""

    box: BoundingBox
    member_count: int
    member_rollouts: frozenset

    def __post_init__(self) -> None:
        if self.member_count < 1:
            raise ValueError("fused box needs at least one member")


class _Cluster:
    __slots__ = ("members", "rollouts", "fused")

    def __init__(self, rollout_index: int, box: BoundingBox) -> None:
        self.members: List[BoundingBox] = [box]
        self.rollouts: List[int] = [rollout_index]
        self.fused: BoundingBox = box

    def add(self, rollout_index: int, box: BoundingBox) -> None:
        self.members.append(box)
        self.rollouts.append(rollout_index)
        self.fused = mean_box(self.members)


def wbf(
    hypotheses: Sequence[Tuple[int, BoundingBox]],
    cfg: FusionConfig | None = None,
) -> List[FusedBox]:
    """Greedily cluster (rollout_index, box) pairs and average each cluster.

    Boxes are visited in deterministic order (rollout index, then position
    within the rollout). Each box joins the first cluster whose *current*
    fused box reaches the IoU threshold, else opens a new cluster; the fused
    box is the uniform-weight mean of member corners, recomputed on every
    join. Output clusters appear in order of their first member.

    Empty input yields an empty list.
    """
    cfg = cfg or FusionConfig()
    ordered = sorted(hypotheses, key=lambda pair: pair[0])  # stable: keeps box order within a rollout
    clusters: List[_Cluster] = []
    for rollout_index, box in ordered:
        for cluster in clusters:
            if iou(cluster.fused, box) >= cfg.iou_threshold:
                cluster.add(rollout_index, box)
                break
        else:
            clusters.append(_Cluster(rollout_index, box))
    return [
        FusedBox(box=c.fused, member_count=len(c.members), member_rollouts=frozenset(c.rollouts))
        for c in clusters
    ]


@dataclass(frozen=True)
class CropCountStats:
    """Average crop counts before and after fusion, overall and per resolution."""

    mean_fused: float
    mean_raw: float
    per_resolution: Dict[str, Tuple[float, float]]  # label -> (mean_fused, mean_raw)


def crop_count_stats(records: Sequence["EvalRecord"]) -> CropCountStats:
    """Mean raw and fused crop counts over evaluation records.

    Records must carry ``raw_box_count``, ``fused_boxes`` and a ``resolution``
    label. Raises ValueError on empty input.
    """
    if not records:
        raise ValueError("no records to aggregate")
    groups: Dict[str, List[Tuple[int, int]]] = {}
    for r in records:
        groups.setdefault(r.resolution, []).append((len(r.fused_boxes), r.raw_box_count))
    per_resolution = {
        label: (
            sum(f for f, _ in counts) / len(counts),
            sum(raw for _, raw in counts) / len(counts),
        )
        for label, counts in sorted(groups.items())
    }
    return CropCountStats(
        mean_fused=sum(len(r.fused_boxes) for r in records) / len(records),
        mean_raw=sum(r.raw_box_count for r in records) / len(records),
        per_resolution=per_resolution,
    )
