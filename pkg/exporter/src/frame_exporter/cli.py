"""Command line front end.

One subcommand, ``export``: embed a directory of frame images and a
prompt file with a named model, writing .hse embedding files, a prompt
index, a manifest fragment, and optionally per-category score tables.

Exit codes: 0 success, 2 rejected job, 4 I/O failure. Each failure
prints one ``error[Type]: detail`` line to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ExporterError
from .export import ExportJob, export

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frame-exporter",
        description="Embed frame images for the hazard screening toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="embed frames and prompts into .hse files")
    p.add_argument("--frames", required=True, type=Path, help="frame image directory")
    p.add_argument("--prompts", required=True, type=Path, help="prompt set JSON")
    p.add_argument("--model", required=True, help="model name, e.g. dev-hash-64")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument(
        "--scores", action="store_true", help="also write per-category score tables"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run_export(args)
    except ExporterError as err:
        _fail(err)
        return 2
    except OSError as err:
        _fail(err)
        return 4


def _fail(err: BaseException) -> None:
    print(f"error[{type(err).__name__}]: {err}", file=sys.stderr)


def _run_export(args: argparse.Namespace) -> int:
    job = ExportJob(
        frames_dir=args.frames,
        prompts_path=args.prompts,
        model=args.model,
        out_dir=args.out,
        scores=args.scores,
    )
    summary = export(job)
    for video in summary.videos:
        line = (
            f"exported {video.video_id}: {video.frame_count} frames "
            f"x {summary.dim} dims -> {args.out / video.embeddings_name}"
        )
        if video.scores_name is not None:
            line += f" (+ {video.scores_name})"
        print(line)
    print(
        f"prompts embedded with {summary.model} "
        f"(logit scale {summary.logit_scale:g}) -> {args.out}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
