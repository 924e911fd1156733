"""Release acceptance suite.

Each test here covers one release criterion and prints a single
``[criterion] <name>: PASS/FAIL`` line straight to the terminal, so a
plain pytest run doubles as the acceptance report. Tolerances and
runtime budgets are asserted inside the test bodies, right next to the
work they bound.
"""

from __future__ import annotations

import contextlib
import json
import math
import struct
import time
from typing import Iterator

import numpy as np
import pytest

from hazardscreen import (
    BadMagic,
    CorruptPayload,
    DetectorBank,
    FixtureSpec,
    FusionPolicy,
    HazardScreenError,
    MarginSeries,
    NonPositiveScale,
    SceneEvaluation,
    SweepConfig,
    Trajectory,
    TruncatedPayload,
    UnsupportedVersion,
    ade,
    evaluate_masks,
    fuse,
    generate_fixture,
    global_tiou,
    instruction_stats,
    load_corpus,
    load_prompt_set,
    percentile_filter,
    read_embedding_file,
    sweep_threshold,
    video_tnr,
    video_tpr,
    write_embedding_file,
)
from hazardscreen.cli import main

from .helpers import annotation, mask
from .oracles import ade_by_loop, random_sweep_corpus, sweep_by_enumeration


@contextlib.contextmanager
def criterion(label: str, capsys: pytest.CaptureFixture) -> Iterator[None]:
    """Print one PASS/FAIL line for the wrapped block, bypassing capture."""
    verdict = "PASS"
    try:
        yield
    except BaseException:
        verdict = "FAIL"
        raise
    finally:
        with capsys.disabled():
            print(f"[criterion] {label}: {verdict}")


# Directional tIoU means paired with the combined score each pair
# produces. The values were recorded to three decimals, so the check
# runs at half a unit in the last recorded place.
REFERENCE_POINTS = (
    (0.589, 0.556, 0.572),
    (0.370, 0.828, 0.538),
    (0.532, 0.874, 0.657),
    (0.256, 0.951, 0.473),
    (0.667, 0.988, 0.765),
    (0.037, 0.949, 0.318),
    (0.381, 0.989, 0.563),
    (0.230, 0.898, 0.451),
    (0.554, 0.643, 0.596),
    (0.605, 0.539, 0.571),
    (0.532, 0.654, 0.589),
)


def test_combined_score_reference_points(capsys):
    with criterion("combined score reference points", capsys):
        start = time.perf_counter()
        for positive, negative, expected in REFERENCE_POINTS:
            assert global_tiou(positive, negative) == pytest.approx(
                expected, abs=1.5e-3
            )
        assert time.perf_counter() - start < 1.0


def _fixture_sweep_corpora(root):
    """General-channel sweep inputs loaded from generated fixture trees."""
    out = []
    for seed, step in ((11, 0.01), (12, 0.05)):
        corpus_dir = root / f"fixture-{seed}"
        manifest_path = generate_fixture(seed, FixtureSpec(), corpus_dir)
        prompts = load_prompt_set(corpus_dir / "prompts.json")
        corpus = load_corpus(manifest_path, prompts=prompts)
        series = dict(corpus.signals[prompts.general_category])
        out.append((series, dict(corpus.annotations), step))
    return out


def test_sweep_equals_enumeration(capsys, tmp_path):
    with criterion("sweep equals enumeration", capsys):
        start = time.perf_counter()
        rng = np.random.default_rng(0xACCE)
        corpora = []
        for i in range(48):
            if i % 4 == 0:
                step, sizes = 0.001, dict(max_videos=6, max_frames=50)
            elif i % 4 == 1:
                step, sizes = 0.01, dict(max_videos=10, max_frames=100)
            elif i % 4 == 2:
                step, sizes = 0.05, dict(max_videos=8, max_frames=60)
            else:
                step, sizes = 0.25, dict(max_videos=10, max_frames=100)
            series, annotations = random_sweep_corpus(rng, **sizes)
            corpora.append((series, annotations, step))
        corpora.extend(_fixture_sweep_corpora(tmp_path))
        assert len(corpora) == 50

        for series, annotations, step in corpora:
            want_t, want_g = sweep_by_enumeration(series, annotations, step)
            got = sweep_threshold(series, annotations, SweepConfig(step=step))
            assert got.threshold == want_t
            assert got.report.global_tiou == want_g
        assert time.perf_counter() - start < 30.0


def test_sweep_shift_covariance(capsys):
    with criterion("sweep shift covariance", capsys):
        rng = np.random.default_rng(0x5817F7)
        cfg = SweepConfig(step=0.05)
        for _ in range(20):
            series, annotations = random_sweep_corpus(
                rng, max_videos=6, max_frames=40
            )
            base = sweep_threshold(series, annotations, cfg)
            base_lo = min(float(s.margins.min()) for s in series.values())
            base_index = round((base.threshold - base_lo) / cfg.step)
            for offset in (-3.7, 0.0, 12.25):
                moved = {
                    vid: MarginSeries(
                        video_id=s.video_id,
                        category=s.category,
                        margins=s.margins + offset,
                    )
                    for vid, s in series.items()
                }
                got = sweep_threshold(moved, annotations, cfg)
                moved_lo = min(float(s.margins.min()) for s in moved.values())
                moved_index = round((got.threshold - moved_lo) / cfg.step)
                # The grid re-anchors at the shifted minimum, so the
                # same grid point wins and the metrics cannot move. The
                # float threshold may sit an ulp away from base + offset
                # because the additions round in a different order.
                assert moved_index == base_index
                assert got.threshold == pytest.approx(
                    base.threshold + offset, abs=1e-9
                )
                assert got.report == base.report


def test_fusion_inclusion_ordering(capsys):
    with criterion("fusion inclusion ordering", capsys):
        start = time.perf_counter()
        rng = np.random.default_rng(0xF05E)
        detected = {policy: [] for policy in FusionPolicy}
        hazard_flags = []
        for i in range(1000):
            video_id = f"b{i}"
            frames = int(rng.integers(4, 31))
            channels = {}
            for c in range(int(rng.integers(1, 5))):
                channels[f"c{c}"] = (
                    MarginSeries(
                        video_id=video_id,
                        category=f"c{c}",
                        margins=rng.normal(0.0, 1.0, frames),
                    ),
                    0.8,
                )
            general = (
                MarginSeries(
                    video_id=video_id,
                    category="hazard",
                    margins=rng.normal(0.0, 1.0, frames),
                ),
                0.8,
            )
            bank = DetectorBank(
                video_id=video_id,
                category_channels=channels,
                general_channel=general,
            )
            masks = {policy: fuse(bank, policy).flags for policy in FusionPolicy}
            gated = masks[FusionPolicy.HAZARD_GATED]
            categories = masks[FusionPolicy.CATEGORIES_ONLY]
            with_general = masks[FusionPolicy.WITH_GENERAL]
            assert np.all(with_general[gated])
            assert np.all(with_general[categories])
            assert np.all(categories[gated])
            hazard_flags.append(i % 2 == 0)
            for policy in FusionPolicy:
                detected[policy].append(bool(masks[policy].any()))

        hazard = np.asarray(hazard_flags)
        tpr = {}
        tnr = {}
        for policy in FusionPolicy:
            det = np.asarray(detected[policy])
            tpr[policy] = float(det[hazard].mean())
            tnr[policy] = float((~det[~hazard]).mean())
        gated, cats, withgen = (
            FusionPolicy.HAZARD_GATED,
            FusionPolicy.CATEGORIES_ONLY,
            FusionPolicy.WITH_GENERAL,
        )
        assert tpr[gated] <= tpr[cats] <= tpr[withgen]
        assert tnr[gated] >= tnr[cats] >= tnr[withgen]
        # The trade must actually show up, not hold as an equality.
        assert tpr[gated] < tpr[withgen]
        assert tnr[gated] > tnr[withgen]
        assert time.perf_counter() - start < 10.0


def test_metric_ground_cases(capsys):
    with criterion("metric ground cases", capsys):
        annotations = {
            "h0": annotation(video="h0", frames=12, active=(3, 7)),
            "h1": annotation(video="h1", frames=9, active=(0, 4)),
            "n0": annotation(video="n0", frames=10),
            "n1": annotation(video="n1", frames=7),
        }
        perfect = {
            "h0": mask(video="h0", flags=[3 <= i <= 7 for i in range(12)]),
            "h1": mask(video="h1", flags=[i <= 4 for i in range(9)]),
            "n0": mask(video="n0", flags=[False] * 10),
            "n1": mask(video="n1", flags=[False] * 7),
        }
        report = evaluate_masks(perfect, annotations)
        assert report.positive_tiou == 1.0
        assert report.negative_tiou == 1.0
        assert report.global_tiou == 1.0
        assert video_tpr(perfect, annotations) == 1.0
        assert video_tnr(perfect, annotations) == 1.0

        empty = {
            vid: mask(video=vid, flags=[False] * ann.frame_count)
            for vid, ann in annotations.items()
        }
        report = evaluate_masks(empty, annotations)
        assert report.positive_tiou == 0.0
        assert video_tpr(empty, annotations) == 0.0
        assert video_tnr(empty, annotations) == 1.0


def test_displacement_error_suite(capsys):
    with criterion("displacement error suite", capsys):
        times = np.arange(8, dtype=np.float64) * 0.5
        grid = np.stack([np.arange(8.0), np.arange(8.0) * 2.0], axis=1)
        reference = Trajectory(times=times, points=grid)
        assert ade(reference, reference) == 0.0

        offset = Trajectory(times=times, points=grid + np.array([3.0, 4.0]))
        assert ade(offset, reference) == 5.0

        rng = np.random.default_rng(0xADE)
        last = None
        for _ in range(100):
            n = int(rng.integers(2, 30))
            t = np.cumsum(rng.uniform(0.1, 1.0, n))
            a = Trajectory(times=t, points=rng.normal(0.0, 10.0, (n, 2)))
            b = Trajectory(times=t, points=rng.normal(0.0, 10.0, (n, 2)))
            assert ade(a, b) == pytest.approx(
                ade_by_loop(a.points, b.points), abs=1e-9
            )
            last = (t, a, b)

        t, a, b = last
        for shift in ((1.5, -2.25), (1000.0, 3.0), (-0.3, 0.7)):
            moved_a = Trajectory(times=t, points=a.points + np.array(shift))
            moved_b = Trajectory(times=t, points=b.points + np.array(shift))
            assert ade(moved_a, moved_b) == pytest.approx(ade(a, b), abs=1e-9)


def test_percentile_filter_suite(capsys):
    with criterion("percentile filter suite", capsys):
        values = np.arange(1.0, 41.0)
        np.random.default_rng(3).shuffle(values)
        cutoff, keep = percentile_filter(values, 97.5)
        assert cutoff == 39.0
        assert values[~keep].tolist() == [40.0]

        # Removal is driven by baselines alone: cohorts that differ only
        # in their instruction errors drop the same scenes.
        rng = np.random.default_rng(0xF117)
        baselines = rng.uniform(0.0, 10.0, 25)

        def cohort(scale):
            return [
                SceneEvaluation(
                    scene_id=f"s{i:02d}",
                    baseline_ade=float(b),
                    instruction_evals=(
                        ("i0", float(b * scale)),
                        ("i1", float(b + 1.0)),
                    ),
                )
                for i, b in enumerate(baselines)
            ]

        first = instruction_stats(cohort(0.5), q=90.0)
        second = instruction_stats(cohort(2.0), q=90.0)
        assert first.removed_scene_ids == second.removed_scene_ids
        assert first.removed_scene_ids != ()

        for _ in range(100):
            scenes = []
            for i in range(int(rng.integers(3, 16))):
                runs = tuple(
                    (f"i{j}", float(rng.uniform(0.0, 20.0)))
                    for j in range(int(rng.integers(1, 6)))
                )
                scenes.append(
                    SceneEvaluation(
                        scene_id=f"s{i:02d}",
                        baseline_ade=float(rng.uniform(0.0, 20.0)),
                        instruction_evals=runs,
                    )
                )
            q = float(rng.choice([80.0, 90.0, 97.5, 100.0]))
            report = instruction_stats(scenes, q=q)
            for means in (report.mean_all, report.mean_filtered):
                assert means["best"] <= means["avg"] <= means["worst"]


def test_embedding_format_robustness(capsys, tmp_path):
    with criterion("embedding format robustness", capsys):
        rng = np.random.default_rng(0xF0F0)
        vectors = rng.normal(0.0, 1.0, (17, 9)).astype(np.float32)
        path = tmp_path / "frames.hse"
        write_embedding_file(path, vectors, 100.0)
        original = path.read_bytes()

        data = read_embedding_file(path)
        again = tmp_path / "again.hse"
        write_embedding_file(again, data.embeddings, data.logit_scale)
        assert again.read_bytes() == original

        allowed = (
            BadMagic,
            UnsupportedVersion,
            TruncatedPayload,
            NonPositiveScale,
            CorruptPayload,
        )
        target = tmp_path / "mutated.hse"
        cases = 0
        # Every single-byte change to the magic, version, or shape
        # fields is detectable: the expected payload length is linear in
        # both count and dimension.
        for pos in range(16):
            for value in range(256):
                if value == original[pos]:
                    continue
                mutated = bytearray(original)
                mutated[pos] = value
                target.write_bytes(bytes(mutated))
                with pytest.raises(allowed) as err:
                    read_embedding_file(target)
                assert isinstance(err.value, HazardScreenError)
                cases += 1
        # Scale bytes carry no checksum, so only mutations that leave a
        # non-positive or non-finite float are detectable; those must
        # all raise. A mutation that lands on another valid positive
        # scale is just different (wrong) data and stays out of the set.
        for pos in range(16, 20):
            for value in range(256):
                if value == original[pos]:
                    continue
                mutated = bytearray(original)
                mutated[pos] = value
                (candidate,) = struct.unpack_from("<f", bytes(mutated), 16)
                if math.isfinite(candidate) and candidate > 0.0:
                    continue
                target.write_bytes(bytes(mutated))
                with pytest.raises(NonPositiveScale):
                    read_embedding_file(target)
                cases += 1
        assert cases >= 1000


def test_pipeline_determinism_and_accuracy(capsys, tmp_path):
    with criterion("pipeline determinism and accuracy", capsys):
        outputs = []
        for run in ("a", "b"):
            root = tmp_path / run
            corpus = root / "corpus"
            assert main(["fixtures", "--seed", "7", "--out", str(corpus)]) == 0
            manifest = str(corpus / "manifest.json")
            prompts = str(corpus / "prompts.json")
            profile = root / "profile.json"
            assert (
                main(
                    [
                        "calibrate",
                        "--manifest",
                        manifest,
                        "--prompts",
                        prompts,
                        "--out",
                        str(profile),
                    ]
                )
                == 0
            )
            produced = {"profile": profile.read_bytes()}
            for policy in ("categories", "with-general", "dual"):
                segments = root / f"segments-{policy}.json"
                report = root / f"report-{policy}.json"
                assert (
                    main(
                        [
                            "screen",
                            "--manifest",
                            manifest,
                            "--profile",
                            str(profile),
                            "--policy",
                            policy,
                            "--out",
                            str(segments),
                        ]
                    )
                    == 0
                )
                assert (
                    main(
                        [
                            "evaluate",
                            "--manifest",
                            manifest,
                            "--segments",
                            str(segments),
                            "--report",
                            str(report),
                        ]
                    )
                    == 0
                )
                produced[f"segments-{policy}"] = segments.read_bytes()
                produced[f"report-{policy}"] = report.read_bytes()
                scored = json.loads(report.read_bytes())
                assert scored["global_tiou"] >= 0.95
            outputs.append(produced)
        assert outputs[0] == outputs[1]
