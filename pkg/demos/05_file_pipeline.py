"""The full screening pipeline over files, end to end.

Everything the library does in memory is also reachable through files
and the `hazardscreen` command: a manifest names the videos, score
tables or embedding files carry the per-frame data, and calibrate /
screen / evaluate pass profiles, segment lists, and reports between
each other as JSON. Every writer is deterministic, so rerunning a
stage reproduces its output byte for byte.

Run:  python3 demos/05_file_pipeline.py
"""

import hashlib
import json
import tempfile
from pathlib import Path

from hazardscreen.cli import main


def digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def run(args: list[str]) -> None:
    print(f"$ hazardscreen {' '.join(args)}")
    code = main(args)
    assert code == 0, f"exit code {code}"
    print()


def main_demo() -> None:
    root = Path(tempfile.mkdtemp(prefix="hazardscreen-demo-"))
    corpus = root / "corpus"
    profile = root / "profile.json"
    segments = root / "segments.json"
    report = root / "report.json"

    run(["fixtures", "--seed", "3", "--out", str(corpus),
         "--videos", "6", "--frames", "48", "--categories", "animal,pedestrian"])
    run(["calibrate", "--manifest", str(corpus / "manifest.json"),
         "--prompts", str(corpus / "prompts.json"), "--out", str(profile)])
    run(["screen", "--manifest", str(corpus / "manifest.json"),
         "--profile", str(profile), "--policy", "dual", "--out", str(segments)])
    run(["evaluate", "--manifest", str(corpus / "manifest.json"),
         "--segments", str(segments), "--report", str(report)])

    print("== determinism ==")
    first = {p.name: digest(p) for p in (profile, segments, report)}
    for stage in (
        ["calibrate", "--manifest", str(corpus / "manifest.json"),
         "--prompts", str(corpus / "prompts.json"), "--out", str(profile)],
        ["screen", "--manifest", str(corpus / "manifest.json"),
         "--profile", str(profile), "--policy", "dual", "--out", str(segments)],
        ["evaluate", "--manifest", str(corpus / "manifest.json"),
         "--segments", str(segments), "--report", str(report)],
    ):
        assert main(stage) == 0
    for name, before in first.items():
        after = digest(root / name)
        same = "identical" if before == after else "DIFFERENT"
        print(f"  {name:<14} sha256 {before}  rerun: {same}")
    print()

    scored = json.loads(report.read_text())
    print(f"dual-policy screen on its own calibration corpus: "
          f"global tIoU {scored['global_tiou']:.3f}, "
          f"video TPR {scored['video_tpr']:.2f}, video TNR {scored['video_tnr']:.2f}")


if __name__ == "__main__":
    main_demo()
