"""Typed failures raised by the exporter.

Everything the exporter can reject on purpose derives from ExporterError,
so callers (and the CLI) can separate bad jobs from genuine bugs or I/O
surprises with a single except clause.
"""

from __future__ import annotations

__all__ = [
    "ExporterError",
    "BadPromptFile",
    "EmptyJob",
    "OutputCollision",
    "UndecodableFrame",
    "UnknownModel",
    "TowerMismatch",
]


class ExporterError(Exception):
    """Base class for every deliberate exporter rejection."""


class BadPromptFile(ExporterError):
    """The prompt file is missing, malformed, or violates the schema."""


class EmptyJob(ExporterError):
    """The frames directory yields no videos with at least one frame."""


class OutputCollision(ExporterError):
    """The output directory overlaps the input frames directory."""


class UndecodableFrame(ExporterError):
    """A frame image could not be decoded; the message names the file."""


class UnknownModel(ExporterError):
    """The requested model name matches no backend that can be loaded."""


class TowerMismatch(ExporterError):
    """Image and text embeddings disagree on dimensionality."""
