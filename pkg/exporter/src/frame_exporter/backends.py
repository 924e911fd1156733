"""Embedding backends: a deterministic dev model and a CLIP loader.

Every backend maps decoded frames and text phrasings into a shared unit
sphere and reports the logit scale its scores were trained for.  Rows
are normalized in float64 before the float32 cast, so stored norms stay
within float32 rounding of 1.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import UndecodableFrame, UnknownModel

_DEV_PREFIX = "dev-hash-"
_MAX_DEV_DIM = 4096


class Backend(Protocol):
    name: str

    @property
    def logit_scale(self) -> float: ...

    def embed_images(self, paths: Sequence[Path]) -> np.ndarray: ...

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray: ...


def decode_rgb(path: Path) -> Image.Image:
    """Decode one frame to RGB, or raise UndecodableFrame naming it."""
    try:
        with Image.open(path) as img:
            return img.convert("RGB")
    except (UnidentifiedImageError, OSError, ValueError) as err:
        raise UndecodableFrame(f"{path}: {err}") from err


def _unit_rows(rows: np.ndarray) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.float64)
    norms = np.linalg.norm(arr, axis=1, keepdims=True)
    return (arr / norms).astype(np.float32)


class DeterministicBackend:
    """Content-hash embeddings for tests, demos, and plumbing work.

    Every input is hashed into an RNG seed and mapped to a unit vector,
    so identical bytes embed identically on any machine while distinct
    inputs land in general position.  The vectors carry no semantics.
    Its defined logit scale is 100.0.
    """

    def __init__(self, dim: int):
        self.dim = int(dim)
        self.name = f"{_DEV_PREFIX}{self.dim}"

    @property
    def logit_scale(self) -> float:
        return 100.0

    def _draw(self, tag: bytes, payload: bytes) -> np.ndarray:
        digest = hashlib.sha256(tag + b"\x00" + payload).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "big"))
        return rng.standard_normal(self.dim)

    def embed_images(self, paths: Sequence[Path]) -> np.ndarray:
        rows = np.empty((len(paths), self.dim), dtype=np.float64)
        for i, path in enumerate(paths):
            img = decode_rgb(path)
            header = f"{img.width}x{img.height}".encode()
            rows[i] = self._draw(b"frame-exporter/image", header + img.tobytes())
        return _unit_rows(rows)

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        rows = np.empty((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            rows[i] = self._draw(b"frame-exporter/text", text.encode("utf-8"))
        return _unit_rows(rows)


class ClipBackend:
    """Contrastive image/text model loaded through transformers.

    The model name is anything CLIPModel.from_pretrained accepts; the
    logit scale is read from the trained temperature parameter rather
    than assumed.  Any load failure, including missing optional
    dependencies, surfaces as UnknownModel.
    """

    _BATCH = 16

    def __init__(self, name: str):
        self.name = name
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as err:
            raise UnknownModel(
                f"{name}: CLIP support needs the 'clip' extra (transformers, torch): {err}"
            ) from err
        try:
            self._model = CLIPModel.from_pretrained(name)
            self._processor = CLIPProcessor.from_pretrained(name)
        except Exception as err:
            raise UnknownModel(f"{name}: {err}") from err
        self._model.eval()
        self._torch = torch

    @property
    def logit_scale(self) -> float:
        return float(self._model.logit_scale.exp().item())

    def embed_images(self, paths: Sequence[Path]) -> np.ndarray:
        images = [decode_rgb(p) for p in paths]
        chunks = []
        with self._torch.no_grad():
            for start in range(0, len(images), self._BATCH):
                batch = self._processor(
                    images=images[start : start + self._BATCH], return_tensors="pt"
                )
                chunks.append(self._model.get_image_features(**batch).cpu().numpy())
        return _unit_rows(np.concatenate(chunks, axis=0))

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        chunks = []
        with self._torch.no_grad():
            for start in range(0, len(texts), self._BATCH):
                batch = self._processor(
                    text=list(texts[start : start + self._BATCH]),
                    return_tensors="pt",
                    padding=True,
                )
                chunks.append(self._model.get_text_features(**batch).cpu().numpy())
        return _unit_rows(np.concatenate(chunks, axis=0))


def resolve_backend(model: str) -> Backend:
    """Map a model name to a backend, or raise UnknownModel."""
    if model.startswith(_DEV_PREFIX):
        suffix = model[len(_DEV_PREFIX) :]
        if not suffix.isdigit() or not 1 <= int(suffix) <= _MAX_DEV_DIM:
            raise UnknownModel(
                f"{model!r}: dev model names look like {_DEV_PREFIX}<dim> "
                f"with dim in [1, {_MAX_DEV_DIM}]"
            )
        return DeterministicBackend(int(suffix))
    return ClipBackend(model)
