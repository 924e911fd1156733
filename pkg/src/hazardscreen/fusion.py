"""Combining per-category detectors into one alert stream.

A detector bank holds, for one video, a thresholded margin channel per
category and optionally a general hazard channel. Three fusion rules are
supported: union of the category channels, union including the general
channel, and the gated rule where the general channel must agree with at
least one category on the same frame. Fused masks collapse into maximal
runs of consecutive alert frames with inclusive endpoints.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    FrameCountMismatch,
    IntervalOutOfRange,
    MissingGeneralChannel,
    OrderViolation,
    ValidationError,
)
from .signal import MarginSeries
from .temporal import FrameMask

__all__ = [
    "FusionPolicy",
    "DetectorBank",
    "AlertSegment",
    "threshold_mask",
    "fuse",
    "extract_segments",
    "segments_to_mask",
]


class FusionPolicy(str, enum.Enum):
    """How category channels and the general channel combine."""

    CATEGORIES_ONLY = "categories"
    WITH_GENERAL = "with-general"
    HAZARD_GATED = "dual"


def threshold_mask(series: MarginSeries, threshold: float) -> FrameMask:
    """Flag frames whose margin is strictly greater than the threshold."""
    if not math.isfinite(threshold):
        raise ValidationError(f"threshold must be finite, got {threshold!r}")
    return FrameMask(video_id=series.video_id, flags=series.margins > threshold)


@dataclass(frozen=True)
class DetectorBank:
    """Thresholded channels of one video.

    ``category_channels`` maps category id to (margin series, threshold);
    ``general_channel`` is the same pair for the general hazard prompt.
    All channels must describe the same video with the same frame count.
    """

    video_id: str
    category_channels: dict[str, tuple[MarginSeries, float]]
    general_channel: tuple[MarginSeries, float] | None = None

    def __post_init__(self) -> None:
        channels = list(self.category_channels.values())
        if self.general_channel is not None:
            channels.append(self.general_channel)
        if not channels:
            raise ValidationError(f"bank for video {self.video_id!r} has no channels")
        counts = set()
        for series, threshold in channels:
            if series.video_id != self.video_id:
                raise ValidationError(
                    f"bank for video {self.video_id!r} holds a series "
                    f"for video {series.video_id!r}"
                )
            if not math.isfinite(threshold):
                raise ValidationError(
                    f"bank for video {self.video_id!r} has a non-finite threshold"
                )
            counts.add(series.frame_count)
        if len(counts) != 1:
            raise FrameCountMismatch(
                f"bank for video {self.video_id!r} mixes frame counts {sorted(counts)}"
            )

    @property
    def frame_count(self) -> int:
        if self.general_channel is not None:
            return self.general_channel[0].frame_count
        series, _ = next(iter(self.category_channels.values()))
        return series.frame_count


def fuse(bank: DetectorBank, policy: FusionPolicy) -> FrameMask:
    """Combine the bank's channels under the given policy.

    The union policies OR their member channels frame by frame; the
    gated policy requires the general channel and at least one category
    channel to fire on the same frame.
    """
    category_or = np.zeros(bank.frame_count, dtype=bool)
    for category in sorted(bank.category_channels):
        series, threshold = bank.category_channels[category]
        category_or |= series.margins > threshold

    if policy is FusionPolicy.CATEGORIES_ONLY:
        flags = category_or
    elif policy is FusionPolicy.WITH_GENERAL:
        flags = category_or.copy()
        if bank.general_channel is not None:
            series, threshold = bank.general_channel
            flags |= series.margins > threshold
    elif policy is FusionPolicy.HAZARD_GATED:
        if bank.general_channel is None:
            raise MissingGeneralChannel(
                f"policy {policy.value!r} needs a general channel "
                f"(video {bank.video_id!r})"
            )
        series, threshold = bank.general_channel
        flags = category_or & (series.margins > threshold)
    else:  # pragma: no cover - enum is closed
        raise ValidationError(f"unknown policy {policy!r}")
    return FrameMask(video_id=bank.video_id, flags=flags)


@dataclass(frozen=True)
class AlertSegment:
    """Maximal run of consecutive alert frames, endpoints inclusive."""

    video_id: str
    start_frame: int
    end_frame: int
    policy: FusionPolicy | None = None

    def __post_init__(self) -> None:
        if self.start_frame < 0:
            raise IntervalOutOfRange(f"segment start {self.start_frame} < 0")
        if self.start_frame > self.end_frame:
            raise OrderViolation(
                f"segment start {self.start_frame} > end {self.end_frame}"
            )

    @property
    def duration(self) -> int:
        return self.end_frame - self.start_frame + 1


def extract_segments(
    mask: FrameMask,
    policy: FusionPolicy | None = None,
    min_duration: int = 1,
) -> list[AlertSegment]:
    """Collapse a mask into its maximal alert runs.

    Runs shorter than ``min_duration`` frames are dropped; the default
    of 1 keeps everything.
    """
    if min_duration < 1:
        raise ValidationError(f"min_duration must be >= 1, got {min_duration}")
    flags = mask.flags
    if flags.shape[0] == 0:
        return []
    edges = np.flatnonzero(np.diff(flags.astype(np.int8)))
    starts = [0] if flags[0] else []
    starts += [int(i) + 1 for i in edges if not flags[i]]
    ends = [int(i) for i in edges if flags[i]]
    if flags[-1]:
        ends.append(flags.shape[0] - 1)
    segments = [
        AlertSegment(
            video_id=mask.video_id, start_frame=s, end_frame=e, policy=policy
        )
        for s, e in zip(starts, ends)
    ]
    return [seg for seg in segments if seg.duration >= min_duration]


def segments_to_mask(
    segments: Iterable[AlertSegment] | Sequence[tuple[int, int]],
    video_id: str,
    frame_count: int,
) -> FrameMask:
    """Rasterize segments back into a boolean mask."""
    flags = np.zeros(frame_count, dtype=bool)
    for seg in segments:
        if isinstance(seg, AlertSegment):
            start, end = seg.start_frame, seg.end_frame
        else:
            start, end = seg
        if start > end:
            raise OrderViolation(f"segment start {start} > end {end}")
        if start < 0 or end >= frame_count:
            raise IntervalOutOfRange(
                f"segment [{start}, {end}] outside [0, {frame_count})"
            )
        flags[start : end + 1] = True
    return FrameMask(video_id=video_id, flags=flags)
