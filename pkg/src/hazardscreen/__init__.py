"""Calibrated prompt-margin hazard screening for driving video.

The toolkit turns per-frame image/text embedding scores into a hazard
confidence signal, calibrates per-category alert thresholds by
exhaustive sweep, fuses category detectors into alert segments, and
scores both the screening quality (temporal IoU both ways plus
video-level rates) and instruction-conditioned trajectory quality
(displacement error with upper-percentile outlier filtering).
"""

from __future__ import annotations

from . import errors
from .errors import (
    BadMagic,
    BadPercentile,
    CorpusError,
    CorruptPayload,
    DanglingPath,
    DimensionMismatch,
    DuplicateVideoId,
    EmptyCorpus,
    EmptyInput,
    EmptySignal,
    FrameCountMismatch,
    HazardScreenError,
    InsufficientCorpus,
    IntervalOutOfRange,
    LengthMismatch,
    MissingActiveInterval,
    MissingCategorySubset,
    MissingGeneralChannel,
    MissingGroundTruth,
    MissingMask,
    MissingProfileEntry,
    MissingPromptEmbedding,
    NoHazardVideos,
    NoInstructions,
    NoNonHazardVideos,
    NonPositiveScale,
    OrderViolation,
    OutOfRange,
    ParseError,
    ProfileMismatchWarning,
    SchemaVersionMismatch,
    TimestampMismatch,
    TruncatedPayload,
    UnsupportedVersion,
    ValidationError,
    ZeroVector,
)
from .calibration import (
    CalibrationEntry,
    CalibrationProfile,
    SweepConfig,
    SweepResult,
    sweep_threshold,
    tune_categories,
    validate_profile_covers,
)
from .corpus import Corpus, detector_banks, load_corpus
from .fixtures import FixtureSpec, generate_fixture
from .formats import (
    EMBEDDING_HEADER_SIZE,
    EMBEDDING_MAGIC,
    EMBEDDING_VERSION,
    EmbeddingFileData,
    atomic_write_bytes,
    atomic_write_text,
    Manifest,
    ManifestVideo,
    PromptSet,
    SceneRuns,
    SegmentsFile,
    VideoSegments,
    load_annotation,
    load_manifest,
    load_profile,
    load_prompt_embeddings,
    load_prompt_set,
    load_score_table,
    load_segments,
    load_trajectory_table,
    prompt_set_hash,
    read_embedding_file,
    save_annotation,
    save_cohort_report,
    save_manifest,
    save_profile,
    save_prompt_embeddings,
    save_prompt_set,
    save_screen_report,
    save_segments,
    write_embedding_file,
    write_score_table,
    write_trajectory_table,
)
from .fusion import (
    AlertSegment,
    DetectorBank,
    FusionPolicy,
    extract_segments,
    fuse,
    segments_to_mask,
    threshold_mask,
)
from .signal import (
    DEFAULT_LOGIT_SCALE,
    MarginAggregation,
    MarginSeries,
    PromptPair,
    clip_score,
    l2_normalize,
    margin,
    margin_signal,
)
from .temporal import (
    FrameMask,
    HazardAnnotation,
    PerVideoIou,
    TiouReport,
    evaluate_masks,
    frame_iou,
    global_tiou,
    negative_tiou,
    positive_tiou,
    video_tnr,
    video_tpr,
)
from .trajectory import (
    TIMESTAMP_TOLERANCE,
    CohortReport,
    SceneEvaluation,
    SceneStats,
    Trajectory,
    ade,
    instruction_stats,
    percentile_filter,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "__version__",
    # error taxonomy
    "HazardScreenError",
    "ValidationError",
    "CorpusError",
    "ZeroVector",
    "DimensionMismatch",
    "MissingPromptEmbedding",
    "OutOfRange",
    "MissingMask",
    "NoHazardVideos",
    "NoNonHazardVideos",
    "EmptyCorpus",
    "InsufficientCorpus",
    "EmptySignal",
    "MissingCategorySubset",
    "MissingGeneralChannel",
    "FrameCountMismatch",
    "LengthMismatch",
    "TimestampMismatch",
    "EmptyInput",
    "BadPercentile",
    "NoInstructions",
    "MissingGroundTruth",
    "ParseError",
    "DanglingPath",
    "DuplicateVideoId",
    "BadMagic",
    "UnsupportedVersion",
    "TruncatedPayload",
    "CorruptPayload",
    "NonPositiveScale",
    "IntervalOutOfRange",
    "OrderViolation",
    "MissingActiveInterval",
    "SchemaVersionMismatch",
    "MissingProfileEntry",
    "ProfileMismatchWarning",
    # signal
    "DEFAULT_LOGIT_SCALE",
    "MarginAggregation",
    "MarginSeries",
    "PromptPair",
    "clip_score",
    "l2_normalize",
    "margin",
    "margin_signal",
    # temporal
    "FrameMask",
    "HazardAnnotation",
    "PerVideoIou",
    "TiouReport",
    "evaluate_masks",
    "frame_iou",
    "global_tiou",
    "negative_tiou",
    "positive_tiou",
    "video_tnr",
    "video_tpr",
    # calibration
    "CalibrationEntry",
    "CalibrationProfile",
    "SweepConfig",
    "SweepResult",
    "sweep_threshold",
    "tune_categories",
    "validate_profile_covers",
    # fusion
    "AlertSegment",
    "DetectorBank",
    "FusionPolicy",
    "extract_segments",
    "fuse",
    "segments_to_mask",
    "threshold_mask",
    # trajectory
    "TIMESTAMP_TOLERANCE",
    "CohortReport",
    "SceneEvaluation",
    "SceneStats",
    "Trajectory",
    "ade",
    "instruction_stats",
    "percentile_filter",
    # formats
    "EMBEDDING_HEADER_SIZE",
    "EMBEDDING_MAGIC",
    "EMBEDDING_VERSION",
    "EmbeddingFileData",
    "atomic_write_bytes",
    "atomic_write_text",
    "Manifest",
    "ManifestVideo",
    "PromptSet",
    "SceneRuns",
    "SegmentsFile",
    "VideoSegments",
    "load_annotation",
    "load_manifest",
    "load_profile",
    "load_prompt_embeddings",
    "load_prompt_set",
    "load_score_table",
    "load_segments",
    "load_trajectory_table",
    "prompt_set_hash",
    "read_embedding_file",
    "save_annotation",
    "save_cohort_report",
    "save_manifest",
    "save_profile",
    "save_prompt_embeddings",
    "save_prompt_set",
    "save_screen_report",
    "save_segments",
    "write_embedding_file",
    "write_score_table",
    "write_trajectory_table",
    # corpus
    "Corpus",
    "detector_banks",
    "load_corpus",
    # fixtures
    "FixtureSpec",
    "generate_fixture",
]
