"""Temporal localization metrics for per-frame alert masks.

A screening run produces one boolean mask per video. Quality is scored
against inclusive annotated intervals from both directions at once:
positive temporal IoU (alert frames vs hazard-active frames, hazard
videos only) and negative temporal IoU (silent frames vs non-hazard
frames, every video). The two means are collapsed into a single global
score: the normalized Euclidean distance to the ideal corner (1, 1),

    global = 1 - sqrt((1 - p)^2 + (1 - n)^2) / sqrt(2)

which is 1 only for a perfect screen and 0 at the opposite corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Mapping

import numpy as np

from .errors import (
    EmptyCorpus,
    FrameCountMismatch,
    IntervalOutOfRange,
    MissingActiveInterval,
    MissingMask,
    NoHazardVideos,
    NoNonHazardVideos,
    OrderViolation,
    OutOfRange,
    ValidationError,
)

__all__ = [
    "FrameMask",
    "HazardAnnotation",
    "PerVideoIou",
    "TiouReport",
    "frame_iou",
    "positive_tiou",
    "negative_tiou",
    "global_tiou",
    "video_tpr",
    "video_tnr",
    "evaluate_masks",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class FrameMask:
    """Boolean alert flags for one video, one entry per frame."""

    video_id: str
    flags: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.flags)
        if arr.dtype != np.bool_:
            raise ValidationError("flags must be a boolean array")
        if arr.ndim != 1:
            raise ValidationError("flags must be 1-D")
        object.__setattr__(self, "flags", arr)

    @property
    def frame_count(self) -> int:
        return int(self.flags.shape[0])


@dataclass(frozen=True)
class HazardAnnotation:
    """Ground truth for one video.

    Intervals are inclusive frame index pairs, 0-based. Hazard videos
    carry an active interval (the span a screen should flag) and may
    carry a visible interval that starts at or before it. Non-hazard
    videos carry neither.
    """

    video_id: str
    frame_count: int
    is_hazard: bool
    category: str | None = None
    visible: tuple[int, int] | None = None
    active: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.frame_count < 1:
            raise ValidationError(
                f"video {self.video_id!r}: frame_count must be >= 1"
            )
        if self.is_hazard:
            if self.active is None:
                raise MissingActiveInterval(
                    f"hazard video {self.video_id!r} has no active interval"
                )
            if not self.category:
                raise ValidationError(
                    f"hazard video {self.video_id!r} has no category label"
                )
        else:
            if self.active is not None or self.visible is not None:
                raise ValidationError(
                    f"non-hazard video {self.video_id!r} must not carry intervals"
                )
            if self.category is not None:
                raise ValidationError(
                    f"non-hazard video {self.video_id!r} must not carry a category"
                )
        for name, interval in (("visible", self.visible), ("active", self.active)):
            if interval is None:
                continue
            start, end = interval
            if start > end:
                raise OrderViolation(
                    f"video {self.video_id!r}: {name} interval start {start} > end {end}"
                )
            if start < 0 or end >= self.frame_count:
                raise IntervalOutOfRange(
                    f"video {self.video_id!r}: {name} interval [{start}, {end}] "
                    f"outside [0, {self.frame_count})"
                )
        if self.visible is not None and self.active is not None:
            if self.visible[0] > self.active[0]:
                raise OrderViolation(
                    f"video {self.video_id!r}: visible starts after active"
                )

    def active_mask(self) -> np.ndarray:
        """Boolean array marking the hazard-active frames."""
        out = np.zeros(self.frame_count, dtype=bool)
        if self.active is not None:
            out[self.active[0] : self.active[1] + 1] = True
        return out

    def active_frames(self) -> frozenset[int]:
        if self.active is None:
            return frozenset()
        return frozenset(range(self.active[0], self.active[1] + 1))


@dataclass(frozen=True)
class PerVideoIou:
    """One video's contribution to the corpus means."""

    video_id: str
    positive_iou: float | None
    negative_iou: float


@dataclass(frozen=True)
class TiouReport:
    positive_tiou: float
    negative_tiou: float
    global_tiou: float
    per_video: tuple[PerVideoIou, ...]


def frame_iou(a: AbstractSet[int] | Iterable[int], b: AbstractSet[int] | Iterable[int]) -> float:
    """Intersection over union of two frame sets; IoU of two empty sets is 1."""
    sa, sb = set(a), set(b)
    union = len(sa | sb)
    if union == 0:
        return 1.0
    return len(sa & sb) / union


def global_tiou(positive: float, negative: float) -> float:
    """Collapse the two directional means into one score in [0, 1]."""
    for name, value in (("positive", positive), ("negative", negative)):
        if not (0.0 <= value <= 1.0):
            raise OutOfRange(f"{name} tIoU {value!r} outside [0, 1]")
    return 1.0 - math.sqrt((1.0 - positive) ** 2 + (1.0 - negative) ** 2) / _SQRT2


def positive_tiou(
    masks: Mapping[str, FrameMask],
    annotations: Mapping[str, HazardAnnotation],
) -> float:
    """Mean alert-vs-active IoU over hazard videos, ascending video id.

    Only hazard videos need masks here; non-hazard annotations are
    ignored.
    """
    values = []
    for video_id in sorted(annotations):
        ann = annotations[video_id]
        if not ann.is_hazard:
            continue
        flags = _checked_flags(masks, ann)
        active = ann.active_mask()
        inter = int(np.count_nonzero(flags & active))
        union = int(np.count_nonzero(flags | active))
        values.append(1.0 if union == 0 else inter / union)
    if not values:
        raise NoHazardVideos("corpus has no hazard-annotated videos")
    return sum(values) / len(values)


def negative_tiou(
    masks: Mapping[str, FrameMask],
    annotations: Mapping[str, HazardAnnotation],
) -> float:
    """Mean silent-vs-non-hazard IoU over every video, ascending video id."""
    values = [pv.negative_iou for pv in _per_video(masks, annotations)]
    if not values:
        raise EmptyCorpus("no videos to evaluate")
    return sum(values) / len(values)


def video_tpr(
    masks: Mapping[str, FrameMask],
    annotations: Mapping[str, HazardAnnotation],
) -> float:
    """Fraction of hazard videos whose mask flags at least one frame."""
    hits = total = 0
    for video_id in sorted(annotations):
        ann = annotations[video_id]
        if not ann.is_hazard:
            continue
        flags = _checked_flags(masks, ann)
        total += 1
        if bool(flags.any()):
            hits += 1
    if total == 0:
        raise NoHazardVideos("corpus has no hazard-annotated videos")
    return hits / total


def video_tnr(
    masks: Mapping[str, FrameMask],
    annotations: Mapping[str, HazardAnnotation],
) -> float:
    """Fraction of non-hazard videos whose mask stays fully silent."""
    silent = total = 0
    for video_id in sorted(annotations):
        ann = annotations[video_id]
        if ann.is_hazard:
            continue
        flags = _checked_flags(masks, ann)
        total += 1
        if not bool(flags.any()):
            silent += 1
    if total == 0:
        raise NoNonHazardVideos("corpus has no non-hazard videos")
    return silent / total


def evaluate_masks(
    masks: Mapping[str, FrameMask],
    annotations: Mapping[str, HazardAnnotation],
) -> TiouReport:
    """Full directional report for a set of masks."""
    per_video = _per_video(masks, annotations)
    if not per_video:
        raise EmptyCorpus("no videos to evaluate")
    pos_values = [pv.positive_iou for pv in per_video if pv.positive_iou is not None]
    if not pos_values:
        raise NoHazardVideos("corpus has no hazard-annotated videos")
    neg_values = [pv.negative_iou for pv in per_video]
    p = sum(pos_values) / len(pos_values)
    n = sum(neg_values) / len(neg_values)
    return TiouReport(
        positive_tiou=p,
        negative_tiou=n,
        global_tiou=global_tiou(p, n),
        per_video=tuple(per_video),
    )


def _checked_flags(
    masks: Mapping[str, FrameMask], ann: HazardAnnotation
) -> np.ndarray:
    if ann.video_id not in masks:
        raise MissingMask(f"no mask for video {ann.video_id!r}")
    mask = masks[ann.video_id]
    if mask.frame_count != ann.frame_count:
        raise FrameCountMismatch(
            f"video {ann.video_id!r}: mask has {mask.frame_count} frames, "
            f"annotation says {ann.frame_count}"
        )
    return mask.flags


def _per_video(
    masks: Mapping[str, FrameMask],
    annotations: Mapping[str, HazardAnnotation],
) -> list[PerVideoIou]:
    out: list[PerVideoIou] = []
    for video_id in sorted(annotations):
        ann = annotations[video_id]
        flags = _checked_flags(masks, ann)
        active = ann.active_mask()
        pos_iou: float | None = None
        if ann.is_hazard:
            inter = int(np.count_nonzero(flags & active))
            union = int(np.count_nonzero(flags | active))
            pos_iou = 1.0 if union == 0 else inter / union
        silent = ~flags
        gt_neg = ~active
        inter_n = int(np.count_nonzero(silent & gt_neg))
        union_n = int(np.count_nonzero(silent | gt_neg))
        neg_iou = 1.0 if union_n == 0 else inter_n / union_n
        out.append(
            PerVideoIou(video_id=video_id, positive_iou=pos_iou, negative_iou=neg_iou)
        )
    return out
