import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

STARTER_PROMPTS = Path(__file__).resolve().parent.parent / "prompts" / "starter.json"


def write_png(path: Path, seed: int, size=(12, 9)) -> Path:
    """Write a small deterministic RGB image."""
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(pixels, mode="RGB").save(path)
    return path


@pytest.fixture
def frames_tree(tmp_path):
    """Two videos of five frames each, as subdirectories of PNG files."""
    root = tmp_path / "frames"
    for v, video in enumerate(("clip-a", "clip-b")):
        for f in range(5):
            write_png(root / video / f"{f:04d}.png", seed=100 * v + f)
    return root


@pytest.fixture
def small_prompts(tmp_path):
    """Compact three-channel prompt file with a shared phrasing."""
    payload = {
        "schema": "hazardscreen/prompts/v1",
        "categories": [
            {
                "category": "hazard",
                "general": True,
                "positive": ["a driving hazard on the road"],
                "negative": ["normal driving scene"],
                "aggregation": "max",
            },
            {
                "category": "animal",
                "positive": ["an animal on the road", "a deer crossing the road"],
                "negative": ["normal driving scene"],
                "aggregation": "max",
            },
            {
                "category": "road debris",
                "positive": ["debris on the road surface"],
                "negative": ["clean road surface", "normal driving scene"],
                "aggregation": "mean",
            },
        ],
    }
    path = tmp_path / "prompts.json"
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path
