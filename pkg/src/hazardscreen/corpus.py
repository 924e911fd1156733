"""Corpus loading: manifests plus per-video data become margin signals.

A video contributes one margin series per screened category, computed
either from its frame embeddings paired with the prompt embeddings, or
read directly from a precomputed score table. Signals and annotations
are materialized once into an in-memory corpus that the calibration,
fusion, and evaluation layers consume.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .calibration import CalibrationProfile
from .errors import FrameCountMismatch, ValidationError
from .formats import (
    Manifest,
    ManifestVideo,
    PromptSet,
    load_annotation,
    load_manifest,
    load_prompt_embeddings,
    load_score_table,
    read_embedding_file,
)
from .fusion import DetectorBank
from .signal import MarginSeries, margin_signal
from .temporal import HazardAnnotation

__all__ = ["Corpus", "load_corpus", "detector_banks"]


@dataclass(frozen=True)
class Corpus:
    """Materialized signals and ground truth for a set of videos."""

    prompts: PromptSet | None
    annotations: dict[str, HazardAnnotation]
    signals: dict[str, dict[str, MarginSeries]] = field(repr=False)
    content_hash: str = ""

    @property
    def video_ids(self) -> list[str]:
        return sorted(self.annotations)

    @property
    def hazard_ids(self) -> list[str]:
        return sorted(v for v, a in self.annotations.items() if a.is_hazard)

    @property
    def nominal_ids(self) -> list[str]:
        return sorted(v for v, a in self.annotations.items() if not a.is_hazard)


def load_corpus(
    manifest: Manifest | str | Path,
    prompts: PromptSet | None = None,
    split: str | None = None,
    jobs: int = 1,
    categories: Sequence[str] | None = None,
) -> Corpus:
    """Load every video of the manifest (optionally one split).

    Margins are computed for the prompt set's categories, or for the
    explicit ``categories`` list when no prompt set is given (possible
    only for score-table corpora, which carry margins directly).

    ``jobs`` sizes a worker pool for per-video loading; results are
    reduced in ascending video id order either way, so the output is
    identical for any job count.
    """
    if prompts is None and categories is None:
        raise ValidationError("need a prompt set or an explicit category list")
    wanted = prompts.categories() if prompts is not None else sorted(set(categories or ()))
    if not wanted:
        raise ValidationError("no categories to load")

    if not isinstance(manifest, Manifest):
        manifest = load_manifest(manifest)
    chosen = [
        v for v in manifest.videos if split is None or v.split == split
    ]
    if split is not None and not chosen:
        raise ValidationError(f"manifest has no videos in split {split!r}")

    prompt_lookup = None
    if any(v.embeddings_path is not None for v in chosen):
        if prompts is None:
            raise ValidationError(
                "embedding-backed videos need a prompt set to derive margins"
            )
        if manifest.prompt_embeddings_path is None:
            raise ValidationError(
                "manifest lists embedding videos but no prompt_embeddings"
            )
        prompt_lookup, _ = load_prompt_embeddings(manifest.prompt_embeddings_path)

    def load_one(video: ManifestVideo) -> tuple[str, HazardAnnotation, dict[str, np.ndarray]]:
        ann = load_annotation(video.annotation_path)
        if ann.video_id != video.video_id:
            raise ValidationError(
                f"annotation {video.annotation_path} is for video "
                f"{ann.video_id!r}, manifest says {video.video_id!r}"
            )
        if ann.frame_count != video.frame_count:
            raise FrameCountMismatch(
                f"video {video.video_id!r}: manifest says {video.frame_count} "
                f"frames, annotation says {ann.frame_count}"
            )
        if ann.is_hazard == video.nominal:
            raise ValidationError(
                f"video {video.video_id!r}: manifest nominal={video.nominal} "
                f"disagrees with annotation is_hazard={ann.is_hazard}"
            )
        margins = _video_margins(video, wanted, prompts, prompt_lookup)
        return video.video_id, ann, margins

    if jobs > 1 and len(chosen) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            loaded = list(pool.map(load_one, chosen))
    else:
        loaded = [load_one(v) for v in chosen]

    annotations: dict[str, HazardAnnotation] = {}
    signals: dict[str, dict[str, MarginSeries]] = {cat: {} for cat in wanted}
    for video_id, ann, margins in sorted(loaded, key=lambda item: item[0]):
        annotations[video_id] = ann
        for cat, values in margins.items():
            signals[cat][video_id] = MarginSeries(
                video_id=video_id, category=cat, margins=values
            )

    return Corpus(
        prompts=prompts,
        annotations=annotations,
        signals=signals,
        content_hash=_content_hash(annotations, signals),
    )


def _video_margins(
    video: ManifestVideo,
    wanted: Sequence[str],
    prompts: PromptSet | None,
    prompt_lookup: dict[str, np.ndarray] | None,
) -> dict[str, np.ndarray]:
    if video.scores_path is not None:
        table = load_score_table(video.scores_path, video.frame_count)
        out = {}
        for cat in wanted:
            if cat not in table:
                raise ValidationError(
                    f"video {video.video_id!r}: score table has no rows for "
                    f"category {cat!r}"
                )
            out[cat] = table[cat]
        return out

    assert video.embeddings_path is not None
    assert prompts is not None and prompt_lookup is not None
    data = read_embedding_file(video.embeddings_path)
    if data.embeddings.shape[0] != video.frame_count:
        raise FrameCountMismatch(
            f"video {video.video_id!r}: embedding file has "
            f"{data.embeddings.shape[0]} rows, manifest says {video.frame_count}"
        )
    # The frame file's stored scale is the model temperature for scoring.
    return {
        cat: margin_signal(
            data.embeddings,
            prompts.pair(cat),
            prompt_lookup,
            scale=data.logit_scale,
        )
        for cat in wanted
    }


def _content_hash(
    annotations: dict[str, HazardAnnotation],
    signals: dict[str, dict[str, MarginSeries]],
) -> str:
    digest = hashlib.sha256()
    meta = [
        {
            "video_id": vid,
            "frame_count": ann.frame_count,
            "is_hazard": ann.is_hazard,
            "category": ann.category,
            "visible": ann.visible,
            "active": ann.active,
        }
        for vid, ann in sorted(annotations.items())
    ]
    digest.update(json.dumps(meta, sort_keys=True).encode("utf-8"))
    for cat in sorted(signals):
        digest.update(cat.encode("utf-8"))
        for vid in sorted(signals[cat]):
            digest.update(vid.encode("utf-8"))
            digest.update(np.ascontiguousarray(signals[cat][vid].margins).tobytes())
    return digest.hexdigest()


def detector_banks(
    corpus: Corpus, profile: CalibrationProfile
) -> dict[str, DetectorBank]:
    """One thresholded bank per corpus video from a calibration profile."""
    categories = [c for c in profile.categories() if c in corpus.signals]
    missing = [c for c in profile.categories() if c not in corpus.signals]
    if missing:
        raise ValidationError(
            "corpus lacks signals for profile categories: " + ", ".join(missing)
        )
    banks: dict[str, DetectorBank] = {}
    for video_id in corpus.video_ids:
        channels = {
            cat: (corpus.signals[cat][video_id], profile.entries[cat].threshold)
            for cat in categories
        }
        general = None
        if profile.general_category is not None:
            cat = profile.general_category
            if cat not in corpus.signals:
                raise ValidationError(
                    f"corpus lacks signals for general category {cat!r}"
                )
            general = (
                corpus.signals[cat][video_id],
                profile.entries[cat].threshold,
            )
        banks[video_id] = DetectorBank(
            video_id=video_id,
            category_channels=channels,
            general_channel=general,
        )
    return banks
