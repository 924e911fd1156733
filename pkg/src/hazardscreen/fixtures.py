"""Synthetic corpora for tests, demos, and pipeline checks.

A fixture is a complete on-disk corpus: manifest, prompt set,
annotations, and either score tables or embedding files. Margins are
pseudo-random noise, lifted by a separability offset inside each hazard
video's active interval on its own category channel (and on the general
channel when present). The same seed always reproduces the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .formats import (
    PromptSet,
    save_annotation,
    save_manifest,
    save_prompt_embeddings,
    save_prompt_set,
    write_embedding_file,
    write_score_table,
)
from .signal import DEFAULT_LOGIT_SCALE, PromptPair
from .temporal import HazardAnnotation

__all__ = ["FixtureSpec", "generate_fixture"]

GENERAL_CATEGORY = "hazard"


@dataclass(frozen=True)
class FixtureSpec:
    """Shape of a synthetic corpus."""

    videos: int = 6
    frames: int = 80
    categories: tuple[str, ...] = ("animal", "pedestrian", "road debris")
    separability: float = 5.0
    include_general: bool = True
    noise_sigma: float = 0.8
    data_format: str = "scores"
    split: str = "calibration"

    def __post_init__(self) -> None:
        if self.videos < 2:
            raise ValidationError("need at least 2 videos (one hazard, one nominal)")
        if self.frames < 8:
            raise ValidationError("need at least 8 frames per video")
        if not self.categories and not self.include_general:
            raise ValidationError("need at least one channel")
        if len(set(self.categories)) != len(self.categories):
            raise ValidationError("duplicate categories")
        if GENERAL_CATEGORY in self.categories:
            raise ValidationError(
                f"{GENERAL_CATEGORY!r} is reserved for the general channel"
            )
        if self.categories and self.hazard_count < len(self.categories):
            raise ValidationError(
                f"{len(self.categories)} categories need at least "
                f"{2 * len(self.categories)} videos so every category gets a hazard video"
            )
        if not (self.separability >= 0.0 and math.isfinite(self.separability)):
            raise ValidationError("separability must be finite and >= 0")
        if not (self.noise_sigma > 0.0 and math.isfinite(self.noise_sigma)):
            raise ValidationError("noise_sigma must be finite and > 0")
        if self.data_format not in ("scores", "embeddings"):
            raise ValidationError("data_format must be 'scores' or 'embeddings'")
        if self.split not in ("calibration", "evaluation"):
            raise ValidationError("split must be 'calibration' or 'evaluation'")

    @property
    def hazard_count(self) -> int:
        # Even indices are hazard videos, so ids alternate hazard/nominal.
        return (self.videos + 1) // 2

    @property
    def channels(self) -> tuple[str, ...]:
        if self.include_general:
            return self.categories + (GENERAL_CATEGORY,)
        return self.categories


def _prompt_set(spec: FixtureSpec) -> PromptSet:
    pairs = [
        PromptPair(
            category=cat,
            positive=(f"a {cat} on the road",),
            negative=("a road with nothing unusual",),
        )
        for cat in spec.categories
    ]
    if spec.include_general:
        pairs.append(
            PromptPair(
                category=GENERAL_CATEGORY,
                positive=("a driving hazard on the road",),
                negative=("normal driving scene",),
            )
        )
    return PromptSet(
        pairs=tuple(pairs),
        general_category=GENERAL_CATEGORY if spec.include_general else None,
    )


def generate_fixture(
    seed: int, spec: FixtureSpec, out_dir: str | Path
) -> Path:
    """Write a synthetic corpus and return its manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "annotations").mkdir(exist_ok=True)
    rng = np.random.default_rng(seed)

    prompts = _prompt_set(spec)
    save_prompt_set(out / "prompts.json", prompts)

    annotations: list[HazardAnnotation] = []
    hazard_seen = 0
    for i in range(spec.videos):
        video_id = f"video_{i:03d}"
        is_hazard = i % 2 == 0
        if not is_hazard:
            annotations.append(
                HazardAnnotation(
                    video_id=video_id, frame_count=spec.frames, is_hazard=False
                )
            )
            continue
        category = (
            spec.categories[hazard_seen % len(spec.categories)]
            if spec.categories
            else GENERAL_CATEGORY
        )
        hazard_seen += 1
        min_len = max(2, spec.frames // 4)
        length = int(rng.integers(min_len, spec.frames // 2 + 1))
        start = int(rng.integers(1, spec.frames - length))
        end = start + length - 1
        lead = int(rng.integers(0, max(1, spec.frames // 8)))
        annotations.append(
            HazardAnnotation(
                video_id=video_id,
                frame_count=spec.frames,
                is_hazard=True,
                category=category,
                visible=(max(0, start - lead), end),
                active=(start, end),
            )
        )

    margins: dict[str, dict[str, np.ndarray]] = {}
    for ann in annotations:
        per_channel: dict[str, np.ndarray] = {}
        for channel in spec.channels:
            values = rng.normal(0.0, spec.noise_sigma, spec.frames)
            boosted = ann.is_hazard and (
                channel == ann.category or channel == GENERAL_CATEGORY
            )
            if boosted and spec.separability > 0.0:
                start, end = ann.active  # type: ignore[misc]
                values[start : end + 1] += spec.separability
            per_channel[channel] = values
        margins[ann.video_id] = per_channel

    for ann in annotations:
        save_annotation(out / "annotations" / f"{ann.video_id}.json", ann)

    if spec.data_format == "scores":
        data_entries = _write_scores(out, spec, margins, rng)
        prompt_embeddings = None
    else:
        data_entries = _write_embeddings(out, spec, prompts, margins)
        prompt_embeddings = "prompt_index.json"

    videos = [
        {
            "video_id": ann.video_id,
            "frame_count": spec.frames,
            "annotation": f"annotations/{ann.video_id}.json",
            "split": spec.split,
            "nominal": not ann.is_hazard,
            **data_entries[ann.video_id],
        }
        for ann in annotations
    ]
    manifest_path = out / "manifest.json"
    save_manifest(manifest_path, videos, prompt_embeddings=prompt_embeddings)
    return manifest_path


def _write_scores(
    out: Path,
    spec: FixtureSpec,
    margins: dict[str, dict[str, np.ndarray]],
    rng: np.random.Generator,
) -> dict[str, dict[str, str]]:
    (out / "scores").mkdir(exist_ok=True)
    entries = {}
    for video_id in sorted(margins):
        table = {}
        for channel in spec.channels:
            negatives = rng.normal(12.0, 1.0, spec.frames)
            positives = negatives + margins[video_id][channel]
            table[channel] = list(zip(positives, negatives))
        rel = f"scores/{video_id}.csv"
        write_score_table(out / rel, table, spec.frames)
        entries[video_id] = {"scores": rel}
    return entries


def _write_embeddings(
    out: Path,
    spec: FixtureSpec,
    prompts: PromptSet,
    margins: dict[str, dict[str, np.ndarray]],
) -> dict[str, dict[str, str]]:
    """Realize the drawn margins geometrically.

    Every distinct phrasing gets its own orthogonal axis. A frame puts
    component m/scale on each channel's positive axis and nothing on the
    negative axes (which may be shared between channels), so scoring
    recovers margin m per channel to f32 precision; the remaining mass
    parks on a slack axis to keep the vector unit length.
    """
    (out / "embeddings").mkdir(exist_ok=True)
    channels = spec.channels
    positives = [prompts.pair(c).positive[0] for c in channels]
    if len(set(positives)) != len(positives):
        raise ValidationError("channels must not share a positive phrasing")
    phrasings = prompts.phrasings()
    dim = len(phrasings) + 1
    scale = DEFAULT_LOGIT_SCALE
    axis = {text: i for i, text in enumerate(phrasings)}

    prompt_vectors: dict[str, np.ndarray] = {}
    for text, i in axis.items():
        vec = np.zeros(dim, dtype=np.float64)
        vec[i] = 1.0
        prompt_vectors[text] = vec
    save_prompt_embeddings(out / "prompt_index.json", prompt_vectors, scale)

    entries = {}
    for video_id in sorted(margins):
        frames = np.zeros((spec.frames, dim), dtype=np.float64)
        for channel, positive in zip(channels, positives):
            frames[:, axis[positive]] = margins[video_id][channel] / scale
        mass = np.sum(frames[:, :-1] ** 2, axis=1)
        if np.any(mass >= 0.99):
            raise ValidationError(
                "margins too large to embed at this scale; lower separability"
            )
        frames[:, -1] = np.sqrt(1.0 - mass)
        rel = f"embeddings/{video_id}.hse"
        write_embedding_file(out / rel, frames, scale)
        entries[video_id] = {"embeddings": rel}
    return entries
