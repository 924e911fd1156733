"""On-disk interchange formats.

Binary embedding files use a fixed little-endian layout: the magic
bytes ``HSE1``, a u32 format version (currently 1), u32 row count, u32
embedding dimension, an f32 logit scale, then count x dim f32 values in
row-major order. Everything else is JSON or delimited text. All writers
go through a temp-file-then-rename step so a crash never leaves a
half-written file, and all readers reject malformed input with typed
errors instead of propagating decoder internals.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .calibration import CalibrationEntry, CalibrationProfile
from .errors import (
    BadMagic,
    CorruptPayload,
    DanglingPath,
    DuplicateVideoId,
    MissingGroundTruth,
    NonPositiveScale,
    ParseError,
    SchemaVersionMismatch,
    TruncatedPayload,
    UnsupportedVersion,
    ValidationError,
)
from .fusion import AlertSegment, FusionPolicy
from .signal import MarginAggregation, PromptPair
from .temporal import HazardAnnotation, PerVideoIou, TiouReport
from .trajectory import CohortReport, Trajectory

__all__ = [
    "EMBEDDING_MAGIC",
    "EMBEDDING_VERSION",
    "EMBEDDING_HEADER_SIZE",
    "EmbeddingFileData",
    "write_embedding_file",
    "read_embedding_file",
    "PromptSet",
    "load_prompt_set",
    "save_prompt_set",
    "prompt_set_hash",
    "load_prompt_embeddings",
    "save_prompt_embeddings",
    "load_annotation",
    "save_annotation",
    "load_score_table",
    "write_score_table",
    "SceneRuns",
    "load_trajectory_table",
    "write_trajectory_table",
    "ManifestVideo",
    "Manifest",
    "load_manifest",
    "save_manifest",
    "save_profile",
    "load_profile",
    "VideoSegments",
    "SegmentsFile",
    "save_segments",
    "load_segments",
    "save_screen_report",
    "save_cohort_report",
    "atomic_write_bytes",
    "atomic_write_text",
]

EMBEDDING_MAGIC = b"HSE1"
EMBEDDING_VERSION = 1
EMBEDDING_HEADER_SIZE = 20

MANIFEST_SCHEMA = "hazardscreen/manifest/v1"
PROMPTS_SCHEMA = "hazardscreen/prompts/v1"
PROMPT_INDEX_SCHEMA = "hazardscreen/prompt-index/v1"
ANNOTATION_SCHEMA = "hazardscreen/annotation/v1"
PROFILE_SCHEMA = "hazardscreen/profile/v1"
SEGMENTS_SCHEMA = "hazardscreen/segments/v1"
REPORT_SCHEMA = "hazardscreen/report/v1"
TRAJ_REPORT_SCHEMA = "hazardscreen/traj-report/v1"

_SCORE_COLUMNS = ("frame_index", "category", "positive_score", "negative_score")
_TRAJ_COLUMNS = ("scene_id", "condition", "instruction_id", "t", "x", "y")


# -- low-level helpers --------------------------------------------------------

def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write via a sibling temp file and rename into place."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _load_json(path: str | Path) -> Any:
    raw = Path(path).read_bytes()
    try:
        return json.loads(raw)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from err


def _require_schema(payload: Any, expected: str, path: str | Path) -> dict:
    if not isinstance(payload, dict):
        raise ParseError(f"{path}: expected a JSON object")
    schema = payload.get("schema")
    if schema != expected:
        raise SchemaVersionMismatch(
            f"{path}: schema {schema!r}, this reader supports {expected!r}"
        )
    return payload


# -- binary embedding files ---------------------------------------------------

class EmbeddingFileData(NamedTuple):
    embeddings: np.ndarray
    logit_scale: float


def write_embedding_file(
    path: str | Path, embeddings: np.ndarray, logit_scale: float
) -> None:
    """Serialize an (n, d) embedding stack with its logit scale."""
    arr = np.ascontiguousarray(np.asarray(embeddings), dtype="<f4")
    if arr.ndim != 2:
        raise ValidationError("embeddings must be an (n, d) array")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("embeddings must be finite")
    scale = float(logit_scale)
    if not math.isfinite(scale) or scale <= 0.0:
        raise NonPositiveScale(f"logit scale must be positive, got {scale!r}")
    n, d = arr.shape
    header = struct.pack("<4sIIIf", EMBEDDING_MAGIC, EMBEDDING_VERSION, n, d, scale)
    atomic_write_bytes(path, header + arr.tobytes())


def read_embedding_file(path: str | Path) -> EmbeddingFileData:
    """Read and validate a binary embedding file."""
    raw = Path(path).read_bytes()
    if raw[:4] != EMBEDDING_MAGIC:
        raise BadMagic(f"{path}: bad magic {raw[:4]!r}")
    if len(raw) < EMBEDDING_HEADER_SIZE:
        raise TruncatedPayload(EMBEDDING_HEADER_SIZE, len(raw))
    _, version, n, d, scale = struct.unpack(
        "<4sIIIf", raw[:EMBEDDING_HEADER_SIZE]
    )
    if version != EMBEDDING_VERSION:
        raise UnsupportedVersion(
            f"{path}: version {version}, this reader supports {EMBEDDING_VERSION}"
        )
    if not math.isfinite(scale) or scale <= 0.0:
        raise NonPositiveScale(f"{path}: stored logit scale {scale!r}")
    expected = EMBEDDING_HEADER_SIZE + 4 * n * d
    if len(raw) != expected:
        raise TruncatedPayload(expected, len(raw))
    payload = np.frombuffer(raw[EMBEDDING_HEADER_SIZE:], dtype="<f4")
    embeddings = payload.reshape(n, d).copy()
    if not np.all(np.isfinite(embeddings)):
        raise CorruptPayload(f"{path}: payload contains non-finite values")
    return EmbeddingFileData(embeddings=embeddings, logit_scale=float(scale))


# -- prompt sets --------------------------------------------------------------

@dataclass(frozen=True)
class PromptSet:
    """Prompt pairs for every screened category, at most one general."""

    pairs: tuple[PromptPair, ...]
    general_category: str | None = None

    def __post_init__(self) -> None:
        ids = [p.category for p in self.pairs]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate category in prompt set")
        if not self.pairs:
            raise ValidationError("prompt set has no categories")
        if self.general_category is not None and self.general_category not in ids:
            raise ValidationError(
                f"general category {self.general_category!r} has no prompt pair"
            )

    def categories(self) -> list[str]:
        """All category ids including the general one, sorted."""
        return sorted(p.category for p in self.pairs)

    def pair(self, category: str) -> PromptPair:
        for p in self.pairs:
            if p.category == category:
                return p
        raise ValidationError(f"no prompt pair for category {category!r}")

    def phrasings(self) -> list[str]:
        """Every distinct phrasing, in first-seen order."""
        seen: dict[str, None] = {}
        for p in self.pairs:
            for text in p.positive + p.negative:
                seen.setdefault(text, None)
        return list(seen)


def load_prompt_set(path: str | Path) -> PromptSet:
    payload = _require_schema(_load_json(path), PROMPTS_SCHEMA, path)
    default_agg = payload.get("aggregation", "max")
    raw = payload.get("categories")
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"{path}: 'categories' must be a nonempty list")
    pairs = []
    general = None
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ParseError(f"{path}: categories[{i}] must be an object")
        try:
            agg = MarginAggregation(entry.get("aggregation", default_agg))
        except ValueError as err:
            raise ParseError(f"{path}: categories[{i}]: bad aggregation") from err
        name = entry.get("category")
        positive = entry.get("positive")
        negative = entry.get("negative")
        if not isinstance(name, str) or not isinstance(positive, list) or not isinstance(negative, list):
            raise ParseError(
                f"{path}: categories[{i}] needs 'category', 'positive', 'negative'"
            )
        pairs.append(
            PromptPair(
                category=name,
                positive=tuple(str(t) for t in positive),
                negative=tuple(str(t) for t in negative),
                aggregation=agg,
            )
        )
        if entry.get("general", False):
            if general is not None:
                raise ParseError(f"{path}: more than one general category")
            general = name
    return PromptSet(pairs=tuple(pairs), general_category=general)


def save_prompt_set(path: str | Path, prompts: PromptSet) -> None:
    payload = {
        "schema": PROMPTS_SCHEMA,
        "categories": [
            {
                "category": p.category,
                "general": p.category == prompts.general_category,
                "positive": list(p.positive),
                "negative": list(p.negative),
                "aggregation": p.aggregation.value,
            }
            for p in prompts.pairs
        ],
    }
    atomic_write_text(path, _dump_json(payload))


def prompt_set_hash(prompts: PromptSet) -> str:
    """Content digest, independent of file layout."""
    canonical = {
        "general": prompts.general_category,
        "pairs": sorted(
            (p.category, p.aggregation.value, p.positive, p.negative)
            for p in prompts.pairs
        ),
    }
    blob = json.dumps(canonical, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


# -- prompt embeddings --------------------------------------------------------

def save_prompt_embeddings(
    index_path: str | Path,
    embeddings_by_phrasing: Mapping[str, np.ndarray],
    logit_scale: float,
    embedding_file_name: str = "prompts.hse",
) -> None:
    """Write the phrasing-keyed embedding bundle: index JSON + binary file."""
    index_path = Path(index_path)
    phrasings = list(embeddings_by_phrasing)
    stack = np.stack([np.asarray(embeddings_by_phrasing[p]) for p in phrasings])
    write_embedding_file(index_path.parent / embedding_file_name, stack, logit_scale)
    payload = {
        "schema": PROMPT_INDEX_SCHEMA,
        "embedding_file": embedding_file_name,
        "phrasings": phrasings,
    }
    atomic_write_text(index_path, _dump_json(payload))


def load_prompt_embeddings(
    index_path: str | Path,
) -> tuple[dict[str, np.ndarray], float]:
    index_path = Path(index_path)
    payload = _require_schema(_load_json(index_path), PROMPT_INDEX_SCHEMA, index_path)
    phrasings = payload.get("phrasings")
    rel = payload.get("embedding_file")
    if not isinstance(phrasings, list) or not isinstance(rel, str):
        raise ParseError(f"{index_path}: needs 'phrasings' and 'embedding_file'")
    bin_path = index_path.parent / rel
    if not bin_path.exists():
        raise DanglingPath(f"{index_path}: embedding file {bin_path} does not exist")
    data = read_embedding_file(bin_path)
    if data.embeddings.shape[0] != len(phrasings):
        raise ParseError(
            f"{index_path}: {len(phrasings)} phrasings but "
            f"{data.embeddings.shape[0]} embedding rows"
        )
    if len(set(phrasings)) != len(phrasings):
        raise ParseError(f"{index_path}: duplicate phrasings")
    lookup = {str(p): data.embeddings[i] for i, p in enumerate(phrasings)}
    return lookup, data.logit_scale


# -- annotations --------------------------------------------------------------

def load_annotation(path: str | Path) -> HazardAnnotation:
    payload = _require_schema(_load_json(path), ANNOTATION_SCHEMA, path)
    try:
        video_id = str(payload["video_id"])
        frame_count = int(payload["frame_count"])
        is_hazard = bool(payload["is_hazard"])
    except KeyError as err:
        raise ParseError(f"{path}: missing field {err.args[0]!r}") from err

    def interval(name: str) -> tuple[int, int] | None:
        value = payload.get(name)
        if value is None:
            return None
        if (
            not isinstance(value, list)
            or len(value) != 2
            or not all(isinstance(v, int) for v in value)
        ):
            raise ParseError(f"{path}: {name} must be a [start, end] integer pair")
        return (value[0], value[1])

    category = payload.get("category")
    return HazardAnnotation(
        video_id=video_id,
        frame_count=frame_count,
        is_hazard=is_hazard,
        category=None if category is None else str(category),
        visible=interval("visible"),
        active=interval("active"),
    )


def save_annotation(path: str | Path, ann: HazardAnnotation) -> None:
    payload: dict[str, Any] = {
        "schema": ANNOTATION_SCHEMA,
        "video_id": ann.video_id,
        "frame_count": ann.frame_count,
        "is_hazard": ann.is_hazard,
    }
    if ann.category is not None:
        payload["category"] = ann.category
    if ann.visible is not None:
        payload["visible"] = list(ann.visible)
    if ann.active is not None:
        payload["active"] = list(ann.active)
    atomic_write_text(path, _dump_json(payload))


# -- score tables -------------------------------------------------------------

def load_score_table(
    path: str | Path, frame_count: int
) -> dict[str, np.ndarray]:
    """Read per-frame margins per category from a delimited score table.

    Every category appearing in the table must cover every frame exactly
    once; the margin is positive minus negative score.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: missing header row")
        if set(reader.fieldnames) != set(_SCORE_COLUMNS):
            raise ParseError(
                f"{path}: header must have columns {list(_SCORE_COLUMNS)}, "
                f"found {reader.fieldnames}"
            )
        seen: dict[tuple[int, str], float] = {}
        for row in reader:
            line = reader.line_num
            try:
                frame = int(row["frame_index"])
                pos = float(row["positive_score"])
                neg = float(row["negative_score"])
            except (TypeError, ValueError) as err:
                raise ParseError(f"{path}: line {line}: {err}") from err
            category = row["category"]
            if not category:
                raise ParseError(f"{path}: line {line}: empty category")
            if not (math.isfinite(pos) and math.isfinite(neg)):
                raise ParseError(f"{path}: line {line}: non-finite score")
            if not 0 <= frame < frame_count:
                raise ParseError(
                    f"{path}: line {line}: frame {frame} outside [0, {frame_count})"
                )
            key = (frame, category)
            if key in seen:
                raise ParseError(
                    f"{path}: line {line}: duplicate entry for frame {frame}, "
                    f"category {category!r}"
                )
            seen[key] = pos - neg
    categories = sorted({cat for _, cat in seen})
    if not categories:
        raise ParseError(f"{path}: table has no rows")
    out: dict[str, np.ndarray] = {}
    for cat in categories:
        margins = np.empty(frame_count, dtype=np.float64)
        hole = np.ones(frame_count, dtype=bool)
        for (frame, c), value in seen.items():
            if c == cat:
                margins[frame] = value
                hole[frame] = False
        if hole.any():
            raise ParseError(
                f"{path}: category {cat!r} missing frame {int(np.argmax(hole))}"
            )
        out[cat] = margins
    return out


def write_score_table(
    path: str | Path,
    scores: Mapping[str, Sequence[tuple[float, float]]],
    frame_count: int,
) -> None:
    """Write (positive, negative) score pairs per category, frames ascending."""
    lines = [",".join(_SCORE_COLUMNS)]
    for cat in sorted(scores):
        pairs = scores[cat]
        if len(pairs) != frame_count:
            raise ValidationError(
                f"category {cat!r}: {len(pairs)} rows for {frame_count} frames"
            )
        for frame, (pos, neg) in enumerate(pairs):
            lines.append(f"{frame},{cat},{pos:.6f},{neg:.6f}")
    atomic_write_text(path, "\n".join(lines) + "\n")


# -- trajectory tables --------------------------------------------------------

@dataclass(frozen=True)
class SceneRuns:
    """All logged runs of one scene."""

    scene_id: str
    ground_truth: Trajectory
    baseline: Trajectory
    instructions: dict[str, Trajectory]


def load_trajectory_table(path: str | Path) -> dict[str, SceneRuns]:
    """Read logged trajectories grouped per scene.

    Each scene needs exactly one ground_truth run, exactly one baseline
    run, and any number of instruction runs keyed by instruction id.
    """
    groups: dict[tuple[str, str, str], list[tuple[float, float, float]]] = {}
    order: list[tuple[str, str, str]] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: missing header row")
        if set(reader.fieldnames) != set(_TRAJ_COLUMNS):
            raise ParseError(
                f"{path}: header must have columns {list(_TRAJ_COLUMNS)}, "
                f"found {reader.fieldnames}"
            )
        for row in reader:
            line = reader.line_num
            scene = row["scene_id"]
            condition = row["condition"]
            instruction = row["instruction_id"] or ""
            if not scene:
                raise ParseError(f"{path}: line {line}: empty scene_id")
            if condition not in ("ground_truth", "baseline", "instruction"):
                raise ParseError(
                    f"{path}: line {line}: condition must be ground_truth, "
                    f"baseline, or instruction, found {condition!r}"
                )
            if condition == "instruction" and not instruction:
                raise ParseError(
                    f"{path}: line {line}: instruction rows need an instruction_id"
                )
            if condition != "instruction" and instruction:
                raise ParseError(
                    f"{path}: line {line}: {condition} rows must leave "
                    f"instruction_id empty"
                )
            try:
                t, x, y = float(row["t"]), float(row["x"]), float(row["y"])
            except (TypeError, ValueError) as err:
                raise ParseError(f"{path}: line {line}: {err}") from err
            if not (math.isfinite(t) and math.isfinite(x) and math.isfinite(y)):
                raise ParseError(f"{path}: line {line}: non-finite value")
            key = (scene, condition, instruction)
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append((t, x, y))

    def build(key: tuple[str, str, str]) -> Trajectory:
        rows = groups[key]
        times = np.array([r[0] for r in rows], dtype=np.float64)
        if times.shape[0] > 1 and not np.all(np.diff(times) > 0):
            scene, condition, instruction = key
            label = f"{condition} {instruction}".strip()
            raise ParseError(
                f"{path}: scene {scene!r} {label}: timestamps must be "
                f"strictly increasing"
            )
        points = np.array([(r[1], r[2]) for r in rows], dtype=np.float64)
        return Trajectory(times=times, points=points)

    scenes: dict[str, SceneRuns] = {}
    for scene in sorted({k[0] for k in order}):
        keys = [k for k in order if k[0] == scene]
        gt = [k for k in keys if k[1] == "ground_truth"]
        base = [k for k in keys if k[1] == "baseline"]
        if not gt:
            raise MissingGroundTruth(f"{path}: scene {scene!r} has no ground_truth run")
        if not base:
            raise ValidationError(f"{path}: scene {scene!r} has no baseline run")
        instructions = {
            k[2]: build(k) for k in keys if k[1] == "instruction"
        }
        scenes[scene] = SceneRuns(
            scene_id=scene,
            ground_truth=build(gt[0]),
            baseline=build(base[0]),
            instructions=instructions,
        )
    if not scenes:
        raise ParseError(f"{path}: table has no rows")
    return scenes


def write_trajectory_table(path: str | Path, scenes: Iterable[SceneRuns]) -> None:
    lines = [",".join(_TRAJ_COLUMNS)]

    def emit(scene: str, condition: str, instruction: str, traj: Trajectory) -> None:
        for t, (x, y) in zip(traj.times, traj.points):
            lines.append(
                f"{scene},{condition},{instruction},"
                f"{float(t)!r},{float(x)!r},{float(y)!r}"
            )

    for runs in sorted(scenes, key=lambda r: r.scene_id):
        emit(runs.scene_id, "ground_truth", "", runs.ground_truth)
        emit(runs.scene_id, "baseline", "", runs.baseline)
        for instruction in sorted(runs.instructions):
            emit(runs.scene_id, "instruction", instruction, runs.instructions[instruction])
    atomic_write_text(path, "\n".join(lines) + "\n")


# -- corpus manifest ----------------------------------------------------------

@dataclass(frozen=True)
class ManifestVideo:
    video_id: str
    frame_count: int
    annotation_path: Path
    split: str
    nominal: bool
    embeddings_path: Path | None = None
    scores_path: Path | None = None

    def __post_init__(self) -> None:
        if self.frame_count < 1:
            raise ValidationError(f"video {self.video_id!r}: frame_count must be >= 1")
        if self.split not in ("calibration", "evaluation"):
            raise ValidationError(
                f"video {self.video_id!r}: split must be calibration or evaluation"
            )
        if (self.embeddings_path is None) == (self.scores_path is None):
            raise ValidationError(
                f"video {self.video_id!r}: needs exactly one of embeddings/scores"
            )


@dataclass(frozen=True)
class Manifest:
    path: Path
    videos: tuple[ManifestVideo, ...]
    prompt_embeddings_path: Path | None = None

    def video(self, video_id: str) -> ManifestVideo:
        for v in self.videos:
            if v.video_id == video_id:
                return v
        raise ValidationError(f"manifest has no video {video_id!r}")


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    payload = _require_schema(_load_json(path), MANIFEST_SCHEMA, path)
    base = path.parent
    raw_videos = payload.get("videos")
    if not isinstance(raw_videos, list):
        raise ParseError(f"{path}: 'videos' must be a list")

    videos = []
    seen: set[str] = set()
    for i, entry in enumerate(raw_videos):
        if not isinstance(entry, dict):
            raise ParseError(f"{path}: videos[{i}] must be an object")
        try:
            video_id = str(entry["video_id"])
            frame_count = int(entry["frame_count"])
            annotation = str(entry["annotation"])
            split = str(entry["split"])
            nominal = bool(entry["nominal"])
        except KeyError as err:
            raise ParseError(
                f"{path}: videos[{i}] missing field {err.args[0]!r}"
            ) from err
        if video_id in seen:
            raise DuplicateVideoId(f"{path}: video {video_id!r} listed twice")
        seen.add(video_id)
        embeddings = entry.get("embeddings")
        scores = entry.get("scores")
        video = ManifestVideo(
            video_id=video_id,
            frame_count=frame_count,
            annotation_path=base / annotation,
            split=split,
            nominal=nominal,
            embeddings_path=None if embeddings is None else base / str(embeddings),
            scores_path=None if scores is None else base / str(scores),
        )
        for label, p in (
            ("annotation", video.annotation_path),
            ("embeddings", video.embeddings_path),
            ("scores", video.scores_path),
        ):
            if p is not None and not p.exists():
                raise DanglingPath(f"{path}: video {video_id!r} {label} {p} does not exist")
        videos.append(video)

    prompt_embeddings = payload.get("prompt_embeddings")
    pe_path = None if prompt_embeddings is None else base / str(prompt_embeddings)
    if pe_path is not None and not pe_path.exists():
        raise DanglingPath(f"{path}: prompt embeddings {pe_path} does not exist")
    return Manifest(path=path, videos=tuple(videos), prompt_embeddings_path=pe_path)


def save_manifest(
    path: str | Path,
    videos: Sequence[dict[str, Any]],
    prompt_embeddings: str | None = None,
) -> None:
    """Write a manifest from already-relative video entries."""
    payload: dict[str, Any] = {"schema": MANIFEST_SCHEMA, "videos": list(videos)}
    if prompt_embeddings is not None:
        payload["prompt_embeddings"] = prompt_embeddings
    atomic_write_text(path, _dump_json(payload))


# -- calibration profiles -----------------------------------------------------

def _report_payload(report: TiouReport) -> dict[str, Any]:
    return {
        "positive_tiou": report.positive_tiou,
        "negative_tiou": report.negative_tiou,
        "global_tiou": report.global_tiou,
        "per_video": [
            {
                "video_id": pv.video_id,
                "positive_iou": pv.positive_iou,
                "negative_iou": pv.negative_iou,
            }
            for pv in report.per_video
        ],
    }


def _report_from_payload(payload: dict, where: str) -> TiouReport:
    try:
        per_video = tuple(
            PerVideoIou(
                video_id=str(pv["video_id"]),
                positive_iou=pv["positive_iou"],
                negative_iou=float(pv["negative_iou"]),
            )
            for pv in payload["per_video"]
        )
        return TiouReport(
            positive_tiou=float(payload["positive_tiou"]),
            negative_tiou=float(payload["negative_tiou"]),
            global_tiou=float(payload["global_tiou"]),
            per_video=per_video,
        )
    except (KeyError, TypeError, ValueError) as err:
        raise ParseError(f"{where}: malformed report: {err}") from err


def save_profile(path: str | Path, profile: CalibrationProfile) -> None:
    payload = {
        "schema": PROFILE_SCHEMA,
        "step": profile.step,
        "general_category": profile.general_category,
        "prompt_set_hash": profile.prompt_set_hash,
        "corpus_hash": profile.corpus_hash,
        "created_at": profile.created_at,
        "entries": {
            cat: {
                "threshold": entry.threshold,
                "report": _report_payload(entry.report),
            }
            for cat, entry in profile.entries.items()
        },
    }
    atomic_write_text(path, _dump_json(payload))


def load_profile(path: str | Path) -> CalibrationProfile:
    payload = _require_schema(_load_json(path), PROFILE_SCHEMA, path)
    raw_entries = payload.get("entries")
    if not isinstance(raw_entries, dict) or not raw_entries:
        raise ParseError(f"{path}: 'entries' must be a nonempty object")
    entries: dict[str, CalibrationEntry] = {}
    for cat in sorted(raw_entries):
        entry = raw_entries[cat]
        if not isinstance(entry, dict):
            raise ParseError(f"{path}: entry {cat!r} must be an object")
        try:
            threshold = float(entry["threshold"])
        except (KeyError, TypeError, ValueError) as err:
            raise ParseError(f"{path}: entry {cat!r}: bad threshold") from err
        entries[cat] = CalibrationEntry(
            threshold=threshold,
            report=_report_from_payload(entry.get("report", {}), f"{path}: entry {cat!r}"),
        )
    general = payload.get("general_category")
    return CalibrationProfile(
        entries=entries,
        general_category=None if general is None else str(general),
        step=float(payload.get("step", 0.001)),
        prompt_set_hash=payload.get("prompt_set_hash"),
        corpus_hash=payload.get("corpus_hash"),
        created_at=payload.get("created_at"),
    )


# -- alert segments -----------------------------------------------------------

@dataclass(frozen=True)
class VideoSegments:
    video_id: str
    frame_count: int
    segments: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class SegmentsFile:
    policy: FusionPolicy
    min_duration: int
    videos: tuple[VideoSegments, ...]


def save_segments(
    path: str | Path,
    policy: FusionPolicy,
    min_duration: int,
    per_video: Mapping[str, tuple[int, Sequence[AlertSegment]]],
) -> None:
    """Write alert segments for every screened video, sorted by id."""
    videos = []
    for video_id in sorted(per_video):
        frame_count, segments = per_video[video_id]
        ordered = sorted(segments, key=lambda s: s.start_frame)
        videos.append(
            {
                "video_id": video_id,
                "frame_count": frame_count,
                "segments": [[s.start_frame, s.end_frame] for s in ordered],
            }
        )
    payload = {
        "schema": SEGMENTS_SCHEMA,
        "policy": policy.value,
        "min_duration": min_duration,
        "videos": videos,
    }
    atomic_write_text(path, _dump_json(payload))


def load_segments(path: str | Path) -> SegmentsFile:
    payload = _require_schema(_load_json(path), SEGMENTS_SCHEMA, path)
    try:
        policy = FusionPolicy(payload["policy"])
    except (KeyError, ValueError) as err:
        raise ParseError(f"{path}: bad or missing policy") from err
    raw_videos = payload.get("videos")
    if not isinstance(raw_videos, list):
        raise ParseError(f"{path}: 'videos' must be a list")
    videos = []
    seen: set[str] = set()
    for i, entry in enumerate(raw_videos):
        try:
            video_id = str(entry["video_id"])
            frame_count = int(entry["frame_count"])
            segments = tuple(
                (int(s), int(e)) for s, e in entry["segments"]
            )
        except (KeyError, TypeError, ValueError) as err:
            raise ParseError(f"{path}: videos[{i}]: {err}") from err
        if video_id in seen:
            raise DuplicateVideoId(f"{path}: video {video_id!r} listed twice")
        seen.add(video_id)
        for start, end in segments:
            if start > end:
                raise ParseError(
                    f"{path}: video {video_id!r}: segment [{start}, {end}] reversed"
                )
            if start < 0 or end >= frame_count:
                raise ParseError(
                    f"{path}: video {video_id!r}: segment [{start}, {end}] "
                    f"outside [0, {frame_count})"
                )
        videos.append(
            VideoSegments(video_id=video_id, frame_count=frame_count, segments=segments)
        )
    return SegmentsFile(
        policy=policy,
        min_duration=int(payload.get("min_duration", 1)),
        videos=tuple(videos),
    )


# -- evaluation reports -------------------------------------------------------

def save_screen_report(
    path: str | Path,
    policy: FusionPolicy,
    report: TiouReport,
    tpr: float | None,
    tnr: float | None,
) -> None:
    payload = {
        "schema": REPORT_SCHEMA,
        "policy": policy.value,
        "global_tiou": report.global_tiou,
        "positive_tiou": report.positive_tiou,
        "negative_tiou": report.negative_tiou,
        "video_tpr": tpr,
        "video_tnr": tnr,
        "per_video": _report_payload(report)["per_video"],
    }
    atomic_write_text(path, _dump_json(payload))


def save_cohort_report(path: str | Path, report: CohortReport) -> None:
    payload = {
        "schema": TRAJ_REPORT_SCHEMA,
        "q": report.q,
        "cutoff": report.cutoff,
        "mean_all": report.mean_all,
        "mean_filtered": report.mean_filtered,
        "win_rate": report.win_rate,
        "win_rate_all_scenes": report.win_rate_all_scenes,
        "retained_scene_ids": list(report.retained_scene_ids),
        "removed_scene_ids": list(report.removed_scene_ids),
        "per_scene": [
            {
                "scene_id": s.scene_id,
                "baseline": s.baseline,
                "best": s.best,
                "avg": s.avg,
                "worst": s.worst,
                "retained": s.retained,
            }
            for s in report.per_scene
        ],
    }
    atomic_write_text(path, _dump_json(payload))
