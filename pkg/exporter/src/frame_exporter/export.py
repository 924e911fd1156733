"""Turn frame directories into embedding files and manifest pieces.

An export job names a frames directory, a prompt file, a model, and an
output directory.  The frames directory is either a flat folder of
images (one video) or a folder of subdirectories (one video each);
frames within a video are ordered by filename.  The job produces one
.hse file per video, an embedded copy of every prompt phrasing with its
index JSON, and a manifest fragment that a corpus manifest can absorb
once annotations and splits are known.  With scores enabled it also
writes the per-category score table for each video.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .backends import Backend, resolve_backend
from .errors import EmptyJob, ExporterError, OutputCollision, TowerMismatch
from .hse import atomic_write_bytes, write_embeddings
from .prompts import PromptFile, load_prompt_file

FRAGMENT_SCHEMA = "hazardscreen/manifest-fragment/v1"
PROMPT_INDEX_SCHEMA = "hazardscreen/prompt-index/v1"

PROMPT_INDEX_NAME = "prompt-index.json"
PROMPT_EMBEDDINGS_NAME = "prompts.hse"
FRAGMENT_NAME = "manifest-fragment.json"

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".webp")

_SCORE_COLUMNS = ("frame_index", "category", "positive_score", "negative_score")


@dataclass(frozen=True)
class ExportJob:
    frames_dir: Path
    prompts_path: Path
    model: str
    out_dir: Path
    scores: bool = False


@dataclass(frozen=True)
class VideoPlan:
    """One discovered video and its ordered frame files."""

    video_id: str
    frame_paths: tuple[Path, ...]


@dataclass(frozen=True)
class ExportedVideo:
    video_id: str
    frame_count: int
    embeddings_name: str
    scores_name: str | None


@dataclass(frozen=True)
class ExportSummary:
    model: str
    logit_scale: float
    dim: int
    videos: tuple[ExportedVideo, ...] = field(default_factory=tuple)


def _image_files(directory: Path) -> list[Path]:
    return sorted(
        p
        for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    )


def discover_videos(frames_dir: Path) -> list[VideoPlan]:
    """Find the videos under a frames directory.

    Loose image files make the directory itself a single video named
    after it.  Otherwise each subdirectory containing images becomes a
    video, in name order.  A directory yielding no videos is an
    EmptyJob.
    """
    frames_dir = Path(frames_dir)
    if not frames_dir.is_dir():
        raise FileNotFoundError(f"frames directory {frames_dir} does not exist")
    loose = _image_files(frames_dir)
    if loose:
        return [VideoPlan(video_id=frames_dir.name, frame_paths=tuple(loose))]
    plans = []
    for entry in sorted(frames_dir.iterdir()):
        if not entry.is_dir():
            continue
        files = _image_files(entry)
        if files:
            plans.append(VideoPlan(video_id=entry.name, frame_paths=tuple(files)))
    if not plans:
        raise EmptyJob(
            f"{frames_dir}: no image files or subdirectories with image files "
            f"(recognized extensions: {', '.join(IMAGE_EXTENSIONS)})"
        )
    return plans


def similarity_scores(
    image_rows: np.ndarray, text_rows: np.ndarray, scale: float
) -> np.ndarray:
    """Scaled cosine similarity of every frame against every phrasing.

    Rows are re-normalized in float64, so the result matches scoring the
    stored float32 vectors one pair at a time.
    """
    img = np.asarray(image_rows, dtype=np.float64)
    txt = np.asarray(text_rows, dtype=np.float64)
    img = img / np.linalg.norm(img, axis=1, keepdims=True)
    txt = txt / np.linalg.norm(txt, axis=1, keepdims=True)
    return float(scale) * (img @ txt.T)


def score_pairs(
    sim: np.ndarray, prompt_file: PromptFile, phrasings: Sequence[str]
) -> dict[str, list[tuple[float, float]]]:
    """Collapse a similarity matrix into per-category score pairs.

    For max aggregation the stored pair is (max positive, min negative)
    so the margin equals the best positive-negative combination; for
    mean it is the per-side means.
    """
    index = {text: i for i, text in enumerate(phrasings)}
    out: dict[str, list[tuple[float, float]]] = {}
    for channel in prompt_file.channels:
        pos = sim[:, [index[t] for t in channel.positive]]
        neg = sim[:, [index[t] for t in channel.negative]]
        if channel.aggregation == "max":
            pos_col, neg_col = pos.max(axis=1), neg.min(axis=1)
        else:
            pos_col, neg_col = pos.mean(axis=1), neg.mean(axis=1)
        out[channel.category] = list(zip(pos_col.tolist(), neg_col.tolist()))
    return out


def _dump_json(payload: object) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write_score_table(
    path: Path, scores: dict[str, list[tuple[float, float]]], frame_count: int
) -> None:
    lines = [",".join(_SCORE_COLUMNS)]
    for cat in sorted(scores):
        for frame, (pos, neg) in enumerate(scores[cat]):
            lines.append(f"{frame},{cat},{pos:.6f},{neg:.6f}")
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))


def _check_out_dir(job: ExportJob) -> Path:
    frames = Path(job.frames_dir).resolve()
    out = Path(job.out_dir).resolve()
    if out == frames or frames in out.parents or out in frames.parents:
        raise OutputCollision(
            f"output directory {out} overlaps frames directory {frames}"
        )
    return Path(job.out_dir)


def export(job: ExportJob, backend: Backend | None = None) -> ExportSummary:
    """Run one export job and return what was written.

    The backend argument exists for tests; normally the model name picks
    it.  Output files land in job.out_dir, which is created if needed
    and must not overlap the frames directory.
    """
    out_dir = _check_out_dir(job)
    plans = discover_videos(Path(job.frames_dir))
    prompt_file = load_prompt_file(job.prompts_path)
    if backend is None:
        backend = resolve_backend(job.model)

    phrasings = prompt_file.phrasings()
    text_rows = backend.embed_texts(phrasings)
    scale = backend.logit_scale
    dim = text_rows.shape[1]

    out_dir.mkdir(parents=True, exist_ok=True)
    exported: list[ExportedVideo] = []
    fragment_videos: list[dict[str, object]] = []
    for plan in plans:
        image_rows = backend.embed_images(plan.frame_paths)
        if image_rows.shape[1] != dim:
            raise TowerMismatch(
                f"model {backend.name!r}: image dim {image_rows.shape[1]} "
                f"vs text dim {dim}"
            )
        embeddings_name = f"{plan.video_id}.hse"
        write_embeddings(out_dir / embeddings_name, image_rows, scale)
        scores_name = None
        if job.scores:
            sim = similarity_scores(image_rows, text_rows, scale)
            scores_name = f"{plan.video_id}.scores.csv"
            _write_score_table(
                out_dir / scores_name,
                score_pairs(sim, prompt_file, phrasings),
                len(plan.frame_paths),
            )
        exported.append(
            ExportedVideo(
                video_id=plan.video_id,
                frame_count=len(plan.frame_paths),
                embeddings_name=embeddings_name,
                scores_name=scores_name,
            )
        )
        entry: dict[str, object] = {
            "video_id": plan.video_id,
            "frame_count": len(plan.frame_paths),
            "embeddings": embeddings_name,
        }
        if scores_name is not None:
            entry["scores"] = scores_name
        fragment_videos.append(entry)

    write_embeddings(out_dir / PROMPT_EMBEDDINGS_NAME, text_rows, scale)
    index_payload = {
        "schema": PROMPT_INDEX_SCHEMA,
        "embedding_file": PROMPT_EMBEDDINGS_NAME,
        "phrasings": list(phrasings),
    }
    atomic_write_bytes(
        out_dir / PROMPT_INDEX_NAME, _dump_json(index_payload).encode("utf-8")
    )

    fragment = {
        "schema": FRAGMENT_SCHEMA,
        "model": backend.name,
        "logit_scale": scale,
        "prompt_embeddings": PROMPT_INDEX_NAME,
        "videos": fragment_videos,
    }
    atomic_write_bytes(
        out_dir / FRAGMENT_NAME, _dump_json(fragment).encode("utf-8")
    )
    return ExportSummary(
        model=backend.name, logit_scale=scale, dim=dim, videos=tuple(exported)
    )
