"""Trajectory quality metrics.

Planner outputs are logged as timestamped 2-D waypoint sequences, one
baseline run and one or more instruction-conditioned runs per scene,
each scored against the scene's ground truth by average displacement
error. Cohort statistics are reported twice: over every scene and over
the scenes that survive an upper-percentile filter on the baseline
error, which removes scenes whose baseline already failed catastrophically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BadPercentile,
    EmptyInput,
    LengthMismatch,
    NoInstructions,
    OrderViolation,
    TimestampMismatch,
    ValidationError,
)

__all__ = [
    "TIMESTAMP_TOLERANCE",
    "Trajectory",
    "SceneEvaluation",
    "SceneStats",
    "CohortReport",
    "ade",
    "percentile_filter",
    "instruction_stats",
]

# Paired waypoints must agree in time to within this many seconds.
TIMESTAMP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Trajectory:
    """Timestamped 2-D waypoints with strictly increasing time."""

    times: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        points = np.asarray(self.points, dtype=np.float64)
        if times.ndim != 1:
            raise ValidationError("times must be 1-D")
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValidationError("points must be an (n, 2) array")
        if times.shape[0] != points.shape[0]:
            raise LengthMismatch(
                f"{times.shape[0]} timestamps vs {points.shape[0]} waypoints"
            )
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(points))):
            raise ValidationError("trajectory has non-finite values")
        if times.shape[0] > 1 and not np.all(np.diff(times) > 0):
            raise OrderViolation("timestamps must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return int(self.times.shape[0])


def ade(predicted: Trajectory, reference: Trajectory) -> float:
    """Mean Euclidean distance between paired waypoints.

    The trajectories must carry the same number of waypoints with
    pairwise-matching timestamps.
    """
    if len(predicted) != len(reference):
        raise LengthMismatch(
            f"{len(predicted)} predicted waypoints vs {len(reference)} reference"
        )
    if len(predicted) == 0:
        raise EmptyInput("cannot average over zero waypoints")
    dt = np.abs(predicted.times - reference.times)
    if float(dt.max()) > TIMESTAMP_TOLERANCE:
        worst = int(np.argmax(dt))
        raise TimestampMismatch(
            f"waypoint {worst}: timestamps differ by {float(dt[worst]):.3e} s"
        )
    return float(np.mean(np.linalg.norm(predicted.points - reference.points, axis=1)))


def percentile_filter(
    values: Sequence[float], q: float
) -> tuple[float, np.ndarray]:
    """Nearest-rank percentile cutoff and the retained mask.

    The cutoff is the value at rank ceil(q/100 * N) of the ascending
    sort (1-based); entries strictly greater than the cutoff are
    removed, so ties with the cutoff survive and q = 100 removes
    nothing.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError("values must be 1-D")
    if arr.shape[0] == 0:
        raise EmptyInput("cannot filter an empty value list")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("values must be finite")
    if not (0.0 < q <= 100.0):
        raise BadPercentile(f"q must satisfy 0 < q <= 100, got {q!r}")
    n = arr.shape[0]
    rank = max(1, int(math.ceil((q * n) / 100.0)))
    cutoff = float(np.sort(arr)[rank - 1])
    return cutoff, arr <= cutoff


@dataclass(frozen=True)
class SceneEvaluation:
    """Displacement errors of one scene: baseline plus per-instruction."""

    scene_id: str
    baseline_ade: float
    instruction_evals: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        if not self.instruction_evals:
            raise NoInstructions(f"scene {self.scene_id!r} has no instruction runs")
        values = [self.baseline_ade] + [v for _, v in self.instruction_evals]
        if not all(math.isfinite(v) and v >= 0.0 for v in values):
            raise ValidationError(
                f"scene {self.scene_id!r} has a negative or non-finite error"
            )

    @property
    def best(self) -> float:
        return min(v for _, v in self.instruction_evals)

    @property
    def avg(self) -> float:
        values = [v for _, v in self.instruction_evals]
        return sum(values) / len(values)

    @property
    def worst(self) -> float:
        return max(v for _, v in self.instruction_evals)


@dataclass(frozen=True)
class SceneStats:
    scene_id: str
    baseline: float
    best: float
    avg: float
    worst: float
    retained: bool


@dataclass(frozen=True)
class CohortReport:
    """Instruction-level aggregate over a scene cohort.

    ``mean_all`` and ``mean_filtered`` each map the four series
    (baseline, best, avg, worst) to their cohort mean; the filtered
    variant drops the scenes whose baseline error exceeded the
    percentile cutoff. ``win_rate`` is the fraction of (scene,
    instruction) pairs on retained scenes whose error is strictly below
    the scene's baseline; ``win_rate_all_scenes`` is the unfiltered
    variant.
    """

    q: float
    cutoff: float
    mean_all: dict[str, float]
    mean_filtered: dict[str, float]
    win_rate: float
    win_rate_all_scenes: float
    retained_scene_ids: tuple[str, ...]
    removed_scene_ids: tuple[str, ...]
    per_scene: tuple[SceneStats, ...]


def instruction_stats(
    scenes: Sequence[SceneEvaluation], q: float = 97.5
) -> CohortReport:
    """Aggregate per-scene errors into a cohort report.

    The percentile filter is driven by baseline errors only; when a
    scene is removed, its baseline and all of its instruction runs drop
    together.
    """
    if not scenes:
        raise EmptyInput("no scenes to aggregate")
    ids = [s.scene_id for s in scenes]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate scene ids")
    ordered = sorted(scenes, key=lambda s: s.scene_id)

    baselines = [s.baseline_ade for s in ordered]
    cutoff, retained_mask = percentile_filter(baselines, q)
    retained = [s for s, keep in zip(ordered, retained_mask) if keep]
    removed = [s for s, keep in zip(ordered, retained_mask) if not keep]

    per_scene = tuple(
        SceneStats(
            scene_id=s.scene_id,
            baseline=s.baseline_ade,
            best=s.best,
            avg=s.avg,
            worst=s.worst,
            retained=bool(keep),
        )
        for s, keep in zip(ordered, retained_mask)
    )

    return CohortReport(
        q=float(q),
        cutoff=cutoff,
        mean_all=_cohort_means(ordered),
        mean_filtered=_cohort_means(retained),
        win_rate=_win_rate(retained),
        win_rate_all_scenes=_win_rate(ordered),
        retained_scene_ids=tuple(s.scene_id for s in retained),
        removed_scene_ids=tuple(s.scene_id for s in removed),
        per_scene=per_scene,
    )


def _cohort_means(scenes: Sequence[SceneEvaluation]) -> dict[str, float]:
    if not scenes:
        return {"baseline": math.nan, "best": math.nan, "avg": math.nan, "worst": math.nan}
    n = len(scenes)
    return {
        "baseline": sum(s.baseline_ade for s in scenes) / n,
        "best": sum(s.best for s in scenes) / n,
        "avg": sum(s.avg for s in scenes) / n,
        "worst": sum(s.worst for s in scenes) / n,
    }


def _win_rate(scenes: Sequence[SceneEvaluation]) -> float:
    wins = pairs = 0
    for scene in scenes:
        for _, value in scene.instruction_evals:
            pairs += 1
            if value < scene.baseline_ade:
                wins += 1
    return wins / pairs if pairs else math.nan
