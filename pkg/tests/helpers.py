"""Shared constructors for tests; keyword-only to keep call sites readable."""

from __future__ import annotations

import numpy as np

from hazardscreen import FrameMask, HazardAnnotation, MarginSeries


def series(
    *,
    video: str = "v0",
    category: str = "c",
    margins,
) -> MarginSeries:
    return MarginSeries(
        video_id=video,
        category=category,
        margins=np.asarray(margins, dtype=np.float64),
    )


def annotation(
    *,
    video: str = "v0",
    frames: int,
    active: tuple[int, int] | None = None,
    visible: tuple[int, int] | None = None,
    category: str | None = None,
) -> HazardAnnotation:
    is_hazard = active is not None
    return HazardAnnotation(
        video_id=video,
        frame_count=frames,
        is_hazard=is_hazard,
        category=(category or "c") if is_hazard else None,
        visible=visible,
        active=active,
    )


def mask(*, video: str = "v0", flags) -> FrameMask:
    return FrameMask(video_id=video, flags=np.asarray(flags, dtype=bool))
