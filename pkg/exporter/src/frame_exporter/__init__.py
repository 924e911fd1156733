"""Frame embedding exporter for the hazard screening toolkit.

Walks a directory of frame images, embeds every frame and every prompt
phrasing with a named image/text model, and writes the binary embedding
files, prompt index, and manifest fragment the screening toolkit reads.
"""

from .backends import ClipBackend, DeterministicBackend, resolve_backend
from .errors import (
    BadPromptFile,
    EmptyJob,
    ExporterError,
    OutputCollision,
    TowerMismatch,
    UndecodableFrame,
    UnknownModel,
)
from .export import (
    ExportJob,
    ExportSummary,
    discover_videos,
    export,
    score_pairs,
    similarity_scores,
)
from .prompts import PromptChannel, PromptFile, load_prompt_file

__all__ = [
    "BadPromptFile",
    "ClipBackend",
    "DeterministicBackend",
    "EmptyJob",
    "ExportJob",
    "ExportSummary",
    "ExporterError",
    "OutputCollision",
    "PromptChannel",
    "PromptFile",
    "TowerMismatch",
    "UndecodableFrame",
    "UnknownModel",
    "discover_videos",
    "export",
    "load_prompt_file",
    "resolve_backend",
    "score_pairs",
    "similarity_scores",
]

__version__ = "0.1.0"
