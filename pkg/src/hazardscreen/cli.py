"""Command line front end.

Subcommands cover the full screening pipeline: ``fixtures`` writes a
synthetic corpus, ``calibrate`` tunes per-category thresholds,
``screen`` fuses thresholded channels into alert segments, ``evaluate``
scores segments against annotations, and ``traj-eval`` aggregates
trajectory displacement errors. Every command is deterministic for
identical inputs and writes files atomically.

Exit codes: 0 success, 2 invalid input, 3 corpus cannot support the
request, 4 I/O failure. Each failure prints one ``error[Type]: detail``
line to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .calibration import SweepConfig, tune_categories, validate_profile_covers
from .corpus import detector_banks, load_corpus
from .errors import (
    CorpusError,
    FrameCountMismatch,
    HazardScreenError,
    NoHazardVideos,
    NoNonHazardVideos,
)
from .fixtures import FixtureSpec, generate_fixture
from .formats import (
    load_annotation,
    load_manifest,
    load_profile,
    load_prompt_set,
    load_segments,
    load_trajectory_table,
    prompt_set_hash,
    save_cohort_report,
    save_profile,
    save_screen_report,
    save_segments,
)
from .fusion import FusionPolicy, extract_segments, fuse, segments_to_mask
from .temporal import evaluate_masks, video_tnr, video_tpr
from .trajectory import SceneEvaluation, ade, instruction_stats

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hazardscreen",
        description="Calibrated prompt-margin hazard screening for driving video.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="tune per-category thresholds")
    p.add_argument("--manifest", required=True)
    p.add_argument("--prompts", required=True)
    p.add_argument("--out", required=True, help="profile path to write")
    p.add_argument("--step", type=float, default=0.001)
    p.add_argument(
        "--category",
        action="append",
        default=None,
        help="tune only this category (repeatable; default: all)",
    )
    p.add_argument(
        "--split",
        choices=["calibration", "evaluation", "all"],
        default="calibration",
    )
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument(
        "--timestamp",
        default=None,
        help="stamp the profile; omitted by default so reruns are byte-identical",
    )
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("screen", help="fuse channels into alert segments")
    p.add_argument("--manifest", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument(
        "--policy",
        required=True,
        choices=[policy.value for policy in FusionPolicy],
    )
    p.add_argument("--out", required=True, help="segments path to write")
    p.add_argument(
        "--prompts",
        default=None,
        help="prompt set; required for embedding-backed corpora",
    )
    p.add_argument(
        "--split",
        choices=["calibration", "evaluation", "all"],
        default="all",
    )
    p.add_argument("--min-duration", type=int, default=1)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("evaluate", help="score alert segments against annotations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--segments", required=True)
    p.add_argument("--report", required=True, help="report path to write")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("traj-eval", help="aggregate trajectory displacement errors")
    p.add_argument("--trajectories", required=True)
    p.add_argument("--q", type=float, default=97.5)
    p.add_argument("--report", required=True, help="report path to write")
    p.set_defaults(func=cmd_traj_eval)

    p = sub.add_parser("fixtures", help="write a synthetic corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--videos", type=int, default=6)
    p.add_argument("--frames", type=int, default=80)
    p.add_argument(
        "--categories",
        default="animal,pedestrian,road debris",
        help="comma-separated category list",
    )
    p.add_argument("--separability", type=float, default=5.0)
    p.add_argument("--no-general", action="store_true")
    p.add_argument("--format", choices=["scores", "embeddings"], default="scores")
    p.set_defaults(func=cmd_fixtures)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except CorpusError as err:
        _diag(err)
        return 3
    except HazardScreenError as err:
        _diag(err)
        return 2
    except OSError as err:
        _diag(err)
        return 4


def _diag(err: BaseException) -> None:
    print(f"error[{type(err).__name__}]: {err}", file=sys.stderr)


def _warn(message: str) -> None:
    print(f"warning[ProfileMismatch]: {message}", file=sys.stderr)


def cmd_calibrate(args: argparse.Namespace) -> int:
    prompts = load_prompt_set(args.prompts)
    categories = sorted(args.category) if args.category else None
    if categories:
        for cat in categories:
            prompts.pair(cat)  # unknown category fails fast
    corpus = load_corpus(
        args.manifest,
        prompts,
        split=None if args.split == "all" else args.split,
        jobs=args.jobs,
    )
    profile = tune_categories(
        corpus.signals,
        corpus.annotations,
        general_category=prompts.general_category,
        categories=categories,
        config=SweepConfig(step=args.step),
    )
    profile = dataclasses.replace(
        profile,
        prompt_set_hash=prompt_set_hash(prompts),
        corpus_hash=corpus.content_hash,
        created_at=args.timestamp,
    )
    save_profile(args.out, profile)

    print(f"{'category':<22} {'threshold':>10} {'global':>8} {'positive':>9} {'negative':>9}")
    for cat in sorted(profile.entries):
        entry = profile.entries[cat]
        label = f"{cat} (general)" if cat == profile.general_category else cat
        print(
            f"{label:<22} {entry.threshold:>10.3f} {entry.report.global_tiou:>8.3f} "
            f"{entry.report.positive_tiou:>9.3f} {entry.report.negative_tiou:>9.3f}"
        )
    print(f"profile written: {args.out}")
    return 0


def cmd_screen(args: argparse.Namespace) -> int:
    profile = load_profile(args.profile)
    prompts = load_prompt_set(args.prompts) if args.prompts else None
    if prompts is not None:
        validate_profile_covers(profile, prompts.categories())
        if (
            profile.prompt_set_hash is not None
            and profile.prompt_set_hash != prompt_set_hash(prompts)
        ):
            _warn("profile was tuned against a different prompt set")
    corpus = load_corpus(
        args.manifest,
        prompts,
        split=None if args.split == "all" else args.split,
        jobs=args.jobs,
        categories=None if prompts is not None else sorted(profile.entries),
    )
    if (
        profile.corpus_hash is not None
        and profile.corpus_hash != corpus.content_hash
    ):
        _warn("profile was tuned on a different corpus")

    policy = FusionPolicy(args.policy)
    banks = detector_banks(corpus, profile)
    per_video = {}
    total = 0
    for video_id in corpus.video_ids:
        mask = fuse(banks[video_id], policy)
        segments = extract_segments(mask, policy, min_duration=args.min_duration)
        per_video[video_id] = (corpus.annotations[video_id].frame_count, segments)
        total += len(segments)
    save_segments(args.out, policy, args.min_duration, per_video)
    print(
        f"screened {len(per_video)} videos under policy {policy.value!r}: "
        f"{total} alert segments"
    )
    print(f"segments written: {args.out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    segments_file = load_segments(args.segments)
    manifest = load_manifest(args.manifest)

    masks = {}
    annotations = {}
    for video in segments_file.videos:
        entry = manifest.video(video.video_id)
        if entry.frame_count != video.frame_count:
            raise FrameCountMismatch(
                f"video {video.video_id!r}: segments say {video.frame_count} "
                f"frames, manifest says {entry.frame_count}"
            )
        ann = load_annotation(entry.annotation_path)
        if ann.frame_count != entry.frame_count:
            raise FrameCountMismatch(
                f"video {video.video_id!r}: annotation disagrees with manifest"
            )
        annotations[video.video_id] = ann
        masks[video.video_id] = segments_to_mask(
            video.segments, video.video_id, video.frame_count
        )

    report = evaluate_masks(masks, annotations)
    try:
        tpr = video_tpr(masks, annotations)
    except NoHazardVideos:
        tpr = None
    try:
        tnr = video_tnr(masks, annotations)
    except NoNonHazardVideos:
        tnr = None
    save_screen_report(args.report, segments_file.policy, report, tpr, tnr)

    def cell(value: float | None) -> str:
        return f"{value:>9.3f}" if value is not None else f"{'n/a':>9}"

    print(f"{'policy':<14} {'global':>8} {'positive':>9} {'negative':>9} {'v-tpr':>9} {'v-tnr':>9}")
    print(
        f"{segments_file.policy.value:<14} {report.global_tiou:>8.3f} "
        f"{report.positive_tiou:>9.3f} {report.negative_tiou:>9.3f} "
        f"{cell(tpr)} {cell(tnr)}"
    )
    print(f"report written: {args.report}")
    return 0


def cmd_traj_eval(args: argparse.Namespace) -> int:
    scenes_by_id = load_trajectory_table(args.trajectories)
    evaluations = []
    for scene_id in sorted(scenes_by_id):
        runs = scenes_by_id[scene_id]
        baseline = ade(runs.baseline, runs.ground_truth)
        instruction_evals = tuple(
            (instruction, ade(runs.instructions[instruction], runs.ground_truth))
            for instruction in sorted(runs.instructions)
        )
        evaluations.append(
            SceneEvaluation(
                scene_id=scene_id,
                baseline_ade=baseline,
                instruction_evals=instruction_evals,
            )
        )
    report = instruction_stats(evaluations, q=args.q)
    save_cohort_report(args.report, report)

    q_label = f"Mean (Q{args.q:g})"
    print(f"{'':<16} {'baseline':>10} {'best':>10} {'avg':>10} {'worst':>10}")
    for label, means in (("Mean (All)", report.mean_all), (q_label, report.mean_filtered)):
        print(
            f"{label:<16} {means['baseline']:>10.3f} {means['best']:>10.3f} "
            f"{means['avg']:>10.3f} {means['worst']:>10.3f}"
        )
    removed = len(report.removed_scene_ids)
    total = removed + len(report.retained_scene_ids)
    print(f"win rate (retained scenes): {report.win_rate:.3f}")
    print(f"removed {removed} of {total} scenes above baseline cutoff {report.cutoff:.3f}")
    print(f"report written: {args.report}")
    return 0


def cmd_fixtures(args: argparse.Namespace) -> int:
    categories = tuple(
        c.strip() for c in args.categories.split(",") if c.strip()
    )
    spec = FixtureSpec(
        videos=args.videos,
        frames=args.frames,
        categories=categories,
        separability=args.separability,
        include_general=not args.no_general,
        data_format=args.format,
    )
    manifest_path = generate_fixture(args.seed, spec, args.out)
    print(
        f"fixture written: {manifest_path} "
        f"({spec.videos} videos x {spec.frames} frames, {args.format})"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
