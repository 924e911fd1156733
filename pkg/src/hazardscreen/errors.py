"""Exception hierarchy for the toolkit.

Every failure mode surfaced by the library is a subclass of
:class:`HazardScreenError`, grouped by the exit code the command line
maps it to: validation problems (exit 2), corpus insufficiency (exit 3).
I/O failures propagate as ``OSError`` and map to exit 4.
"""

from __future__ import annotations

__all__ = [
    "HazardScreenError",
    "ValidationError",
    "ZeroVector",
    "DimensionMismatch",
    "MissingPromptEmbedding",
    "OutOfRange",
    "MissingMask",
    "FrameCountMismatch",
    "MissingGeneralChannel",
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
    "CorpusError",
    "EmptyCorpus",
    "NoHazardVideos",
    "NoNonHazardVideos",
    "InsufficientCorpus",
    "EmptySignal",
    "MissingCategorySubset",
    "ProfileMismatchWarning",
]


class HazardScreenError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(HazardScreenError):
    """Bad argument values, malformed inputs, contract violations."""


class CorpusError(HazardScreenError):
    """The corpus cannot support the requested computation."""


# -- signal construction ------------------------------------------------------

class ZeroVector(ValidationError):
    """A vector with near-zero norm cannot be direction-normalized."""


class DimensionMismatch(ValidationError):
    """Operands do not share a common embedding dimension."""


class MissingPromptEmbedding(ValidationError):
    """A phrasing has no embedding in the supplied lookup."""


# -- temporal metrics ---------------------------------------------------------

class OutOfRange(ValidationError):
    """A ratio argument fell outside [0, 1]."""


class MissingMask(ValidationError):
    """A video required by the metric has no mask."""


class NoHazardVideos(CorpusError):
    """The metric needs at least one hazard-annotated video."""


class NoNonHazardVideos(CorpusError):
    """The metric needs at least one non-hazard video."""


class EmptyCorpus(CorpusError):
    """No videos at all."""


# -- calibration --------------------------------------------------------------

class InsufficientCorpus(CorpusError):
    """Sweeping needs a hazard video and at least one non-hazard frame."""


class EmptySignal(CorpusError):
    """A margin series with zero frames cannot be swept."""


class MissingCategorySubset(CorpusError):
    """Requested categories with no labeled videos in the corpus."""

    def __init__(self, categories: list[str]) -> None:
        self.categories = sorted(categories)
        super().__init__(
            "no labeled videos for categories: " + ", ".join(self.categories)
        )


# -- fusion -------------------------------------------------------------------

class MissingGeneralChannel(ValidationError):
    """The policy needs a general channel the bank does not carry."""


class FrameCountMismatch(ValidationError):
    """Series or masks disagree on the number of frames."""


# -- trajectory metrics -------------------------------------------------------

class LengthMismatch(ValidationError):
    """Paired trajectories carry different waypoint counts."""


class TimestampMismatch(ValidationError):
    """Paired waypoints are not aligned in time."""


class EmptyInput(ValidationError):
    """An operation received an empty collection."""


class BadPercentile(ValidationError):
    """Percentile must satisfy 0 < q <= 100."""


class NoInstructions(ValidationError):
    """A scene carries no instruction evaluations."""


class MissingGroundTruth(ValidationError):
    """A scene has no ground-truth trajectory to score against."""


# -- ingestion ----------------------------------------------------------------

class ParseError(ValidationError):
    """A structured file violates its schema; message names the location."""


class DanglingPath(ValidationError):
    """A manifest-referenced path does not exist."""


class DuplicateVideoId(ValidationError):
    """The same video id appears more than once."""


class BadMagic(ValidationError):
    """Binary file does not start with the expected magic bytes."""


class UnsupportedVersion(ValidationError):
    """Binary file declares a version this reader does not support."""


class TruncatedPayload(ValidationError):
    """Actual byte count disagrees with the header's promise."""

    def __init__(self, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"expected {expected} bytes, found {actual}")


class CorruptPayload(ValidationError):
    """Payload decodes to non-finite values."""


class NonPositiveScale(ValidationError):
    """The stored logit scale must be a positive finite number."""


class IntervalOutOfRange(ValidationError):
    """An annotated interval leaves [0, frame_count)."""


class OrderViolation(ValidationError):
    """Interval endpoints or interval ordering constraints violated."""


class MissingActiveInterval(ValidationError):
    """A hazard annotation must carry an active interval."""


class SchemaVersionMismatch(ValidationError):
    """A structured file declares an unknown schema identifier."""


class MissingProfileEntry(ValidationError):
    """A profile lacks a threshold for a category the prompt set defines."""


class ProfileMismatchWarning(UserWarning):
    """Profile digests disagree with the inputs it is applied to."""
