import json
from pathlib import Path

import numpy as np
import pytest

from hazardscreen import (
    FixtureSpec,
    FrameCountMismatch,
    SweepConfig,
    ValidationError,
    detector_banks,
    generate_fixture,
    load_corpus,
    load_manifest,
    load_prompt_set,
    load_score_table,
    tune_categories,
)

SMALL = FixtureSpec(videos=4, frames=16, categories=("animal", "pedestrian"))


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_fixture_is_byte_deterministic(tmp_path):
    a = generate_fixture(7, SMALL, tmp_path / "a")
    b = generate_fixture(7, SMALL, tmp_path / "b")
    assert a.name == b.name == "manifest.json"
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")


def test_fixture_seed_changes_bytes(tmp_path):
    generate_fixture(7, SMALL, tmp_path / "a")
    generate_fixture(8, SMALL, tmp_path / "b")
    a, b = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
    assert set(a) == set(b)
    assert any(a[name] != b[name] for name in a)


def test_fixture_shape(tmp_path):
    manifest_path = generate_fixture(3, SMALL, tmp_path)
    manifest = load_manifest(manifest_path)
    assert len(manifest.videos) == 4
    # Even indices are hazard videos, odd are nominal.
    assert [v.nominal for v in manifest.videos] == [False, True, False, True]
    assert all(v.split == "calibration" for v in manifest.videos)
    prompts = load_prompt_set(tmp_path / "prompts.json")
    assert prompts.categories() == ["animal", "hazard", "pedestrian"]
    assert prompts.general_category == "hazard"


def test_fixture_round_robins_categories(tmp_path):
    spec = FixtureSpec(videos=8, frames=16, categories=("animal", "pedestrian"))
    generate_fixture(5, spec, tmp_path)
    corpus = load_corpus(tmp_path / "manifest.json", load_prompt_set(tmp_path / "prompts.json"))
    cats = [corpus.annotations[v].category for v in corpus.hazard_ids]
    assert cats == ["animal", "pedestrian", "animal", "pedestrian"]


def test_fixture_spec_validation():
    with pytest.raises(ValidationError):
        FixtureSpec(videos=1)
    with pytest.raises(ValidationError):
        FixtureSpec(frames=4)
    with pytest.raises(ValidationError):
        FixtureSpec(categories=(), include_general=False)
    with pytest.raises(ValidationError):
        FixtureSpec(categories=("a", "a"))
    with pytest.raises(ValidationError):
        FixtureSpec(categories=("hazard",))
    with pytest.raises(ValidationError):
        FixtureSpec(videos=4, categories=("a", "b", "c"))
    with pytest.raises(ValidationError):
        FixtureSpec(data_format="parquet")
    with pytest.raises(ValidationError):
        FixtureSpec(split="test")
    with pytest.raises(ValidationError):
        FixtureSpec(noise_sigma=0.0)
    with pytest.raises(ValidationError):
        FixtureSpec(separability=-1.0)


def test_corpus_from_score_tables(tmp_path):
    manifest_path = generate_fixture(11, SMALL, tmp_path)
    prompts = load_prompt_set(tmp_path / "prompts.json")
    corpus = load_corpus(manifest_path, prompts)
    assert corpus.video_ids == [f"video_{i:03d}" for i in range(4)]
    assert corpus.hazard_ids == ["video_000", "video_002"]
    assert corpus.nominal_ids == ["video_001", "video_003"]
    assert set(corpus.signals) == {"animal", "hazard", "pedestrian"}
    for cat in corpus.signals:
        assert set(corpus.signals[cat]) == set(corpus.video_ids)
        for vid, series in corpus.signals[cat].items():
            assert series.frame_count == 16
            assert series.category == cat
            assert series.video_id == vid
    # Margins equal the table's positive minus negative column.
    table = load_score_table(tmp_path / "scores" / "video_000.csv", 16)
    assert np.array_equal(corpus.signals["animal"]["video_000"].margins, table["animal"])


def test_corpus_hash_is_stable_and_content_sensitive(tmp_path):
    manifest_path = generate_fixture(11, SMALL, tmp_path / "a")
    prompts = load_prompt_set(tmp_path / "a" / "prompts.json")
    first = load_corpus(manifest_path, prompts)
    second = load_corpus(manifest_path, prompts)
    assert first.content_hash == second.content_hash
    other_path = generate_fixture(12, SMALL, tmp_path / "b")
    other = load_corpus(other_path, load_prompt_set(tmp_path / "b" / "prompts.json"))
    assert other.content_hash != first.content_hash


def test_parallel_loading_gives_identical_corpus(tmp_path):
    manifest_path = generate_fixture(19, SMALL, tmp_path)
    prompts = load_prompt_set(tmp_path / "prompts.json")
    serial = load_corpus(manifest_path, prompts, jobs=1)
    parallel = load_corpus(manifest_path, prompts, jobs=4)
    assert serial.content_hash == parallel.content_hash
    assert serial.annotations == parallel.annotations
    for cat in serial.signals:
        for vid in serial.signals[cat]:
            assert np.array_equal(
                serial.signals[cat][vid].margins, parallel.signals[cat][vid].margins
            )


def test_embedding_fixture_reproduces_score_margins(tmp_path):
    """Same seed, both data formats: the margins must agree.

    The embedding route goes through f32 storage and renormalization,
    so agreement is approximate.
    """
    spec_scores = SMALL
    spec_emb = FixtureSpec(videos=4, frames=16, categories=("animal", "pedestrian"), data_format="embeddings")
    generate_fixture(23, spec_scores, tmp_path / "s")
    generate_fixture(23, spec_emb, tmp_path / "e")
    by_scores = load_corpus(
        tmp_path / "s" / "manifest.json", load_prompt_set(tmp_path / "s" / "prompts.json")
    )
    by_embeddings = load_corpus(
        tmp_path / "e" / "manifest.json", load_prompt_set(tmp_path / "e" / "prompts.json")
    )
    for cat in by_scores.signals:
        for vid in by_scores.signals[cat]:
            a = by_scores.signals[cat][vid].margins
            b = by_embeddings.signals[cat][vid].margins
            np.testing.assert_allclose(a, b, atol=2e-3)


def test_corpus_split_filter(tmp_path):
    manifest_path = generate_fixture(2, SMALL, tmp_path)
    prompts = load_prompt_set(tmp_path / "prompts.json")
    assert len(load_corpus(manifest_path, prompts, split="calibration").video_ids) == 4
    with pytest.raises(ValidationError):
        load_corpus(manifest_path, prompts, split="evaluation")


def test_corpus_without_prompts_needs_categories(tmp_path):
    manifest_path = generate_fixture(2, SMALL, tmp_path)
    with pytest.raises(ValidationError):
        load_corpus(manifest_path)
    corpus = load_corpus(manifest_path, categories=["animal", "hazard"])
    assert set(corpus.signals) == {"animal", "hazard"}
    assert corpus.prompts is None


def test_embedding_corpus_requires_prompts(tmp_path):
    spec = FixtureSpec(videos=4, frames=16, categories=("animal", "pedestrian"), data_format="embeddings")
    manifest_path = generate_fixture(2, spec, tmp_path)
    with pytest.raises(ValidationError):
        load_corpus(manifest_path, categories=["animal"])


def _patch_manifest(path: Path, **changes):
    payload = json.loads(path.read_text())
    payload["videos"][0].update(changes)
    path.write_text(json.dumps(payload))


def test_corpus_cross_checks_manifest_against_annotations(tmp_path):
    prompts_by = {}
    for name, changes in (
        ("frames", {"frame_count": 99}),
        ("polarity", {"nominal": True}),
    ):
        root = tmp_path / name
        manifest_path = generate_fixture(4, SMALL, root)
        prompts_by[name] = load_prompt_set(root / "prompts.json")
        _patch_manifest(manifest_path, **changes)
    with pytest.raises(FrameCountMismatch):
        load_corpus(tmp_path / "frames" / "manifest.json", prompts_by["frames"])
    with pytest.raises(ValidationError):
        load_corpus(tmp_path / "polarity" / "manifest.json", prompts_by["polarity"])


def test_corpus_rejects_annotation_for_other_video(tmp_path):
    manifest_path = generate_fixture(4, SMALL, tmp_path)
    ann_dir = tmp_path / "annotations"
    a = (ann_dir / "video_000.json").read_bytes()
    b = (ann_dir / "video_002.json").read_bytes()
    (ann_dir / "video_000.json").write_bytes(b)
    (ann_dir / "video_002.json").write_bytes(a)
    with pytest.raises(ValidationError):
        load_corpus(manifest_path, load_prompt_set(tmp_path / "prompts.json"))


def test_score_corpus_missing_category_rows(tmp_path):
    manifest_path = generate_fixture(4, SMALL, tmp_path)
    prompts = load_prompt_set(tmp_path / "prompts.json")
    with pytest.raises(ValidationError):
        load_corpus(manifest_path, prompts=None, categories=["bicycle"])


def test_detector_banks_from_profile(tmp_path):
    manifest_path = generate_fixture(31, SMALL, tmp_path)
    prompts = load_prompt_set(tmp_path / "prompts.json")
    corpus = load_corpus(manifest_path, prompts)
    profile = tune_categories(
        corpus.signals,
        corpus.annotations,
        general_category="hazard",
        config=SweepConfig(step=0.05),
    )
    banks = detector_banks(corpus, profile)
    assert set(banks) == set(corpus.video_ids)
    for vid, bank in banks.items():
        assert bank.video_id == vid
        assert set(bank.category_channels) == {"animal", "pedestrian"}
        assert bank.general_channel is not None
        series, threshold = bank.general_channel
        assert threshold == profile.entries["hazard"].threshold
        assert series.category == "hazard"


def test_detector_banks_reject_uncovered_profile(tmp_path):
    manifest_path = generate_fixture(31, SMALL, tmp_path)
    corpus = load_corpus(manifest_path, categories=["animal"])
    profile = tune_categories(
        {"animal": corpus.signals["animal"]},
        corpus.annotations,
        config=SweepConfig(step=0.05),
    )
    extra = {"animal": profile.entries["animal"], "bicycle": profile.entries["animal"]}
    from hazardscreen import CalibrationProfile

    widened = CalibrationProfile(entries=extra, step=0.05)
    with pytest.raises(ValidationError):
        detector_banks(corpus, widened)
