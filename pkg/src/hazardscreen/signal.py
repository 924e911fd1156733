"""Prompt-margin signal construction.

Image and text embeddings are compared CLIP-style: L2-normalize both
sides, take the dot product, and amplify by a learned logit scale. The
hazard confidence signal for a frame is the margin between the score of
a hazard phrasing and the score of a matched benign phrasing; with
several phrasings per side the margins of every positive x negative
combination are aggregated with max (default) or mean.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    MissingPromptEmbedding,
    ValidationError,
    ZeroVector,
)

__all__ = [
    "DEFAULT_LOGIT_SCALE",
    "MarginAggregation",
    "PromptPair",
    "MarginSeries",
    "l2_normalize",
    "clip_score",
    "margin",
    "margin_signal",
]

# Used when a score source does not carry its own learned temperature.
DEFAULT_LOGIT_SCALE = 100.0

_ZERO_NORM_FLOOR = 1e-12


class MarginAggregation(str, enum.Enum):
    """How to collapse the positive x negative phrasing combinations."""

    MAX = "max"
    MEAN = "mean"


@dataclass(frozen=True)
class PromptPair:
    """Positive (hazard) and negative (benign) phrasings for one category."""

    category: str
    positive: tuple[str, ...]
    negative: tuple[str, ...]
    aggregation: MarginAggregation = MarginAggregation.MAX

    def __post_init__(self) -> None:
        if not self.category:
            raise ValidationError("prompt pair needs a category id")
        if not self.positive or not self.negative:
            raise ValidationError(
                f"prompt pair {self.category!r} needs at least one phrasing per side"
            )


@dataclass(frozen=True)
class MarginSeries:
    """Per-frame margin signal of one video under one category's prompts."""

    video_id: str
    category: str
    margins: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.margins, dtype=np.float64)
        if arr.ndim != 1:
            raise ValidationError("margins must be a 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValidationError(
                f"non-finite margin in series for video {self.video_id!r}"
            )
        object.__setattr__(self, "margins", arr)

    @property
    def frame_count(self) -> int:
        return int(self.margins.shape[0])


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """Return v scaled to unit L2 norm.

    Rejects vectors whose norm is below 1e-12, which have no usable
    direction.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError("expected a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector has non-finite components")
    norm = float(np.linalg.norm(arr))
    if norm < _ZERO_NORM_FLOOR:
        raise ZeroVector(f"norm {norm:.3e} is below {_ZERO_NORM_FLOOR:.0e}")
    return arr / norm


def clip_score(image: np.ndarray, text: np.ndarray, scale: float) -> float:
    """Scaled cosine similarity between an image and a text embedding.

    Both inputs are normalized first, so pre-normalized and raw
    embeddings give the same score.
    """
    img = np.asarray(image, dtype=np.float64)
    txt = np.asarray(text, dtype=np.float64)
    if img.shape != txt.shape:
        raise DimensionMismatch(
            f"image dim {img.shape} vs text dim {txt.shape}"
        )
    _check_scale(scale)
    return float(scale * np.dot(l2_normalize(img), l2_normalize(txt)))


def margin(positive_score: float, negative_score: float) -> float:
    """Positive-minus-negative score difference."""
    return float(positive_score) - float(negative_score)


def margin_signal(
    frames: np.ndarray,
    pair: PromptPair,
    prompt_embeddings: Mapping[str, np.ndarray],
    scale: float = DEFAULT_LOGIT_SCALE,
) -> np.ndarray:
    """Per-frame aggregated margin for one prompt pair.

    ``frames`` is an (n, d) stack of frame embeddings. For each frame the
    margin of every positive x negative phrasing combination is computed
    and collapsed per ``pair.aggregation``. Returns an (n,) float array.
    """
    stack = np.asarray(frames, dtype=np.float64)
    if stack.ndim == 1:
        stack = stack[None, :]
    if stack.ndim != 2:
        raise ValidationError("frames must be an (n, d) array")
    _check_scale(scale)

    pos = _phrasing_matrix(pair.positive, prompt_embeddings, stack.shape[1])
    neg = _phrasing_matrix(pair.negative, prompt_embeddings, stack.shape[1])
    unit = _normalize_rows(stack)

    pos_scores = scale * (unit @ pos.T)  # (n, P)
    neg_scores = scale * (unit @ neg.T)  # (n, N)

    # Margin over the cross product collapses in closed form for both
    # aggregations: max combo = max(pos) - min(neg), mean combo =
    # mean(pos) - mean(neg).
    if pair.aggregation is MarginAggregation.MAX:
        out = pos_scores.max(axis=1) - neg_scores.min(axis=1)
    else:
        out = pos_scores.mean(axis=1) - neg_scores.mean(axis=1)
    return np.asarray(out, dtype=np.float64)


def _check_scale(scale: float) -> None:
    if not np.isfinite(scale) or scale <= 0.0:
        raise ValidationError(f"logit scale must be positive and finite, got {scale!r}")


def _normalize_rows(stack: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(stack)):
        raise ValidationError("frame embeddings have non-finite components")
    norms = np.linalg.norm(stack, axis=1)
    bad = norms < _ZERO_NORM_FLOOR
    if np.any(bad):
        raise ZeroVector(f"frame {int(np.argmax(bad))} has near-zero norm")
    return stack / norms[:, None]


def _phrasing_matrix(
    phrasings: Sequence[str],
    prompt_embeddings: Mapping[str, np.ndarray],
    dim: int,
) -> np.ndarray:
    rows = []
    for text in phrasings:
        if text not in prompt_embeddings:
            raise MissingPromptEmbedding(f"no embedding for phrasing {text!r}")
        vec = np.asarray(prompt_embeddings[text], dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] != dim:
            raise DimensionMismatch(
                f"phrasing {text!r} has dim {vec.shape}, frames have dim {dim}"
            )
        rows.append(l2_normalize(vec))
    return np.stack(rows)
