"""Threshold calibration by exhaustive sweep.

Candidate thresholds form a fixed grid anchored at the lowest observed
margin: {min + k * step} up to the highest observed margin. A frame is
flagged when its margin is strictly greater than the threshold. The
sweep keeps the candidate with the best global temporal IoU, breaking
ties toward the lowest threshold, which makes the result deterministic
and shift-equivariant (adding a constant to every margin moves the
whole grid, and the selection, by that constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import (
    EmptySignal,
    FrameCountMismatch,
    InsufficientCorpus,
    MissingCategorySubset,
    MissingProfileEntry,
    ValidationError,
)
from .signal import MarginSeries
from .temporal import (
    FrameMask,
    HazardAnnotation,
    TiouReport,
    evaluate_masks,
    global_tiou,
)

__all__ = [
    "SweepConfig",
    "SweepResult",
    "CalibrationEntry",
    "CalibrationProfile",
    "sweep_threshold",
    "tune_categories",
    "validate_profile_covers",
]


@dataclass(frozen=True)
class SweepConfig:
    """Sweep settings.

    Only the grid step is configurable. The comparison is fixed at
    strict-greater and ties resolve to the lowest maximizing threshold.
    """

    step: float = 0.001

    def __post_init__(self) -> None:
        if not math.isfinite(self.step) or self.step <= 0.0:
            raise ValidationError(f"step must be positive and finite, got {self.step!r}")


class SweepResult(NamedTuple):
    threshold: float
    report: TiouReport


@dataclass(frozen=True)
class CalibrationEntry:
    """Tuned threshold and the report it achieved on its sweep corpus."""

    threshold: float
    report: TiouReport


@dataclass(frozen=True)
class CalibrationProfile:
    """Per-category thresholds produced by :func:`tune_categories`."""

    entries: dict[str, CalibrationEntry]
    general_category: str | None = None
    step: float = 0.001
    prompt_set_hash: str | None = None
    corpus_hash: str | None = None
    created_at: str | None = None

    def __post_init__(self) -> None:
        if self.general_category is not None and self.general_category not in self.entries:
            raise ValidationError(
                f"general category {self.general_category!r} has no profile entry"
            )

    def categories(self) -> list[str]:
        """Non-general category ids, sorted."""
        return sorted(c for c in self.entries if c != self.general_category)


def sweep_threshold(
    series: Mapping[str, MarginSeries],
    annotations: Mapping[str, HazardAnnotation],
    config: SweepConfig | None = None,
) -> SweepResult:
    """Pick the grid threshold maximizing global temporal IoU.

    ``series`` maps video id to that video's margin signal; every video
    needs an annotation. Returns the selected threshold and the report
    it achieves, computed exactly as :func:`evaluate_masks` would.
    """
    cfg = config or SweepConfig()
    videos = _validated_videos(series, annotations)

    lo = min(float(s.margins.min()) for s, _ in videos.values())
    hi = max(float(s.margins.max()) for s, _ in videos.values())
    count = int(math.ceil((hi - lo) / cfg.step)) + 1
    thresholds = lo + np.arange(count, dtype=np.float64) * cfg.step

    # Per video: how many margins exceed each candidate, overall and
    # within the active interval. searchsorted keeps this exact.
    stats = []
    for video_id in sorted(videos):
        s, ann = videos[video_id]
        margins = s.margins
        total = margins.shape[0]
        active = ann.active_mask()
        active_count = int(np.count_nonzero(active))
        pred = total - np.searchsorted(np.sort(margins), thresholds, side="right")
        inter = (
            active_count
            - np.searchsorted(np.sort(margins[active]), thresholds, side="right")
            if active_count
            else np.zeros(count, dtype=np.int64)
        )
        stats.append((ann.is_hazard, total, active_count, pred, inter))

    best_k = 0
    best_score = -math.inf
    for k in range(count):
        pos_values = []
        neg_values = []
        for is_hazard, total, active_count, pred_arr, inter_arr in stats:
            pred = int(pred_arr[k])
            inter = int(inter_arr[k])
            if is_hazard:
                union = pred + active_count - inter
                pos_values.append(1.0 if union == 0 else inter / union)
            union_n = total - inter
            inter_n = total - active_count - pred + inter
            neg_values.append(1.0 if union_n == 0 else inter_n / union_n)
        p = sum(pos_values) / len(pos_values)
        n = sum(neg_values) / len(neg_values)
        score = global_tiou(p, n)
        if score > best_score:
            best_score = score
            best_k = k

    threshold = float(thresholds[best_k])
    masks = {
        video_id: FrameMask(video_id=video_id, flags=s.margins > threshold)
        for video_id, (s, _) in videos.items()
    }
    report = evaluate_masks(masks, {vid: ann for vid, (_, ann) in videos.items()})
    return SweepResult(threshold=threshold, report=report)


def tune_categories(
    signals: Mapping[str, Mapping[str, MarginSeries]],
    annotations: Mapping[str, HazardAnnotation],
    *,
    general_category: str | None = None,
    categories: Iterable[str] | None = None,
    config: SweepConfig | None = None,
) -> CalibrationProfile:
    """Sweep one threshold per category.

    Each plain category is tuned on its own hazard videos plus every
    non-hazard video; the general channel, when present, is tuned on
    every hazard video plus every non-hazard video. Categories with no
    labeled videos fail as a group so the caller sees the full list.
    """
    cfg = config or SweepConfig()
    wanted = sorted(categories) if categories is not None else sorted(signals)
    if not wanted:
        raise ValidationError("no categories to tune")
    for cat in wanted:
        if cat not in signals:
            raise ValidationError(f"no margin signals for category {cat!r}")

    nominal_ids = sorted(v for v, a in annotations.items() if not a.is_hazard)
    hazard_ids = sorted(v for v, a in annotations.items() if a.is_hazard)

    missing = [
        cat
        for cat in wanted
        if cat != general_category
        and not any(annotations[v].category == cat for v in hazard_ids)
    ]
    if missing:
        raise MissingCategorySubset(missing)

    entries: dict[str, CalibrationEntry] = {}
    for cat in wanted:
        if cat == general_category:
            chosen = hazard_ids + nominal_ids
        else:
            chosen = [
                v for v in hazard_ids if annotations[v].category == cat
            ] + nominal_ids
        subset: dict[str, MarginSeries] = {}
        for video_id in chosen:
            if video_id not in signals[cat]:
                raise ValidationError(
                    f"video {video_id!r} has no margin signal for category {cat!r}"
                )
            subset[video_id] = signals[cat][video_id]
        result = sweep_threshold(subset, annotations, cfg)
        entries[cat] = CalibrationEntry(threshold=result.threshold, report=result.report)

    return CalibrationProfile(
        entries=entries,
        general_category=general_category if general_category in entries else None,
        step=cfg.step,
    )


def validate_profile_covers(
    profile: CalibrationProfile, categories: Iterable[str]
) -> None:
    """Check the profile holds a threshold for every listed category."""
    missing = sorted(c for c in set(categories) if c not in profile.entries)
    if missing:
        raise MissingProfileEntry(
            "profile lacks entries for: " + ", ".join(missing)
        )


def _validated_videos(
    series: Mapping[str, MarginSeries],
    annotations: Mapping[str, HazardAnnotation],
) -> dict[str, tuple[MarginSeries, HazardAnnotation]]:
    if not series:
        raise InsufficientCorpus("sweep needs at least one video")
    out: dict[str, tuple[MarginSeries, HazardAnnotation]] = {}
    non_hazard_frames = 0
    hazards = 0
    for video_id in sorted(series):
        s = series[video_id]
        if s.frame_count == 0:
            raise EmptySignal(f"video {video_id!r} has a zero-frame signal")
        if video_id not in annotations:
            raise ValidationError(f"no annotation for video {video_id!r}")
        ann = annotations[video_id]
        if s.frame_count != ann.frame_count:
            raise FrameCountMismatch(
                f"video {video_id!r}: signal has {s.frame_count} frames, "
                f"annotation says {ann.frame_count}"
            )
        if ann.is_hazard:
            hazards += 1
            non_hazard_frames += ann.frame_count - int(
                np.count_nonzero(ann.active_mask())
            )
        else:
            non_hazard_frames += ann.frame_count
        out[video_id] = (s, ann)
    if hazards == 0:
        raise InsufficientCorpus("sweep needs at least one hazard video")
    if non_hazard_frames == 0:
        raise InsufficientCorpus("sweep needs at least one non-hazard frame")
    return out
