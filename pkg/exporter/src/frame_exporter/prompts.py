"""Reader for the shared prompt-set JSON schema.

The exporter consumes the same prompt files the screening toolkit does:
a "hazardscreen/prompts/v1" object with a category list, each category
carrying positive and negative phrasings, an aggregation mode, and an
optional general flag.  This module only needs enough of the schema to
know which phrasings to embed and how to collapse them into per-category
scores, so it parses independently rather than importing the toolkit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import BadPromptFile

PROMPTS_SCHEMA = "hazardscreen/prompts/v1"

_AGGREGATIONS = ("max", "mean")


@dataclass(frozen=True)
class PromptChannel:
    """One category's phrasings and its score-collapse rule."""

    category: str
    positive: tuple[str, ...]
    negative: tuple[str, ...]
    aggregation: str
    general: bool


@dataclass(frozen=True)
class PromptFile:
    channels: tuple[PromptChannel, ...]

    @property
    def general_category(self) -> str | None:
        for channel in self.channels:
            if channel.general:
                return channel.category
        return None

    def phrasings(self) -> tuple[str, ...]:
        """Every distinct phrasing, in first-seen order."""
        seen: dict[str, None] = {}
        for channel in self.channels:
            for text in channel.positive + channel.negative:
                seen.setdefault(text, None)
        return tuple(seen)


def load_prompt_file(path: str | Path) -> PromptFile:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise BadPromptFile(f"{path}: {err.strerror or err}") from err
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as err:
        raise BadPromptFile(
            f"{path}: line {err.lineno} column {err.colno}: {err.msg}"
        ) from err
    if not isinstance(payload, dict):
        raise BadPromptFile(f"{path}: expected a JSON object")
    schema = payload.get("schema")
    if schema != PROMPTS_SCHEMA:
        raise BadPromptFile(
            f"{path}: schema {schema!r}, this exporter supports {PROMPTS_SCHEMA!r}"
        )
    default_agg = payload.get("aggregation", "max")
    raw_categories = payload.get("categories")
    if not isinstance(raw_categories, list) or not raw_categories:
        raise BadPromptFile(f"{path}: 'categories' must be a nonempty list")

    channels: list[PromptChannel] = []
    names: set[str] = set()
    general_seen = False
    for i, entry in enumerate(raw_categories):
        where = f"{path}: categories[{i}]"
        if not isinstance(entry, dict):
            raise BadPromptFile(f"{where}: must be an object")
        name = entry.get("category")
        positive = entry.get("positive")
        negative = entry.get("negative")
        if not isinstance(name, str) or not name:
            raise BadPromptFile(f"{where}: needs a nonempty 'category' string")
        if not isinstance(positive, list) or not isinstance(negative, list):
            raise BadPromptFile(f"{where}: 'positive' and 'negative' must be lists")
        if not positive or not negative:
            raise BadPromptFile(
                f"{where}: category {name!r} needs at least one phrasing on each side"
            )
        texts = [*positive, *negative]
        if not all(isinstance(t, str) and t for t in texts):
            raise BadPromptFile(f"{where}: phrasings must be nonempty strings")
        aggregation = entry.get("aggregation", default_agg)
        if aggregation not in _AGGREGATIONS:
            raise BadPromptFile(
                f"{where}: aggregation must be one of {list(_AGGREGATIONS)}, "
                f"found {aggregation!r}"
            )
        if name in names:
            raise BadPromptFile(f"{where}: category {name!r} listed twice")
        names.add(name)
        general = bool(entry.get("general", False))
        if general and general_seen:
            raise BadPromptFile(f"{path}: more than one general category")
        general_seen = general_seen or general
        channels.append(
            PromptChannel(
                category=name,
                positive=tuple(positive),
                negative=tuple(negative),
                aggregation=aggregation,
                general=general,
            )
        )
    return PromptFile(channels=tuple(channels))
