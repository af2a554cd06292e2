"""Domain types and interval algebra.

All timestamps are real-valued seconds. Intervals are half-open in
spirit but stored as plain ``[start_s, end_s]`` endpoints with
``start_s < end_s``; scores live in ``[0, 1]``. Every type is frozen,
so instances can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True, order=True)
class TimeInterval:
    """A ``[start_s, end_s]`` span in seconds within a video."""

    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start_s) and math.isfinite(self.end_s)):
            raise ValueError(f"interval endpoints must be finite, got [{self.start_s}, {self.end_s}]")
        if self.start_s < 0:
            raise ValueError(f"interval start must be >= 0, got {self.start_s}")
        if not self.start_s < self.end_s:
            raise ValueError(f"interval must have start < end, got [{self.start_s}, {self.end_s}]")

    @property
    def length_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class ScoredMoment:
    """A time interval with a query-similarity score in ``[0, 1]``."""

    interval: TimeInterval
    score: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class QueryRecord:
    """One dataset example: a query against a video with ground-truth windows."""

    qid: int
    vid: str
    query_text: str
    duration_s: float
    gt_windows: tuple[TimeInterval, ...]

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ValueError(f"qid {self.qid}: duration must be positive, got {self.duration_s}")
        if not self.gt_windows:
            raise ValueError(f"qid {self.qid}: gt_windows must be non-empty")
        object.__setattr__(self, "gt_windows", tuple(self.gt_windows))
        for w in self.gt_windows:
            if w.end_s > self.duration_s:
                raise ValueError(
                    f"qid {self.qid}: gt window [{w.start_s}, {w.end_s}] exceeds duration {self.duration_s}"
                )


def _moment_rank_key(m: ScoredMoment) -> tuple[float, float, float]:
    # Higher score first; ties broken by earlier start, then earlier end.
    return (-m.score, m.interval.start_s, m.interval.end_s)


@dataclass(frozen=True)
class PredictionRecord:
    """A ranked prediction list for one query.

    Moments are normalised at construction to the canonical order:
    score descending, ties by earlier start then earlier end, so two
    records built from the same multiset of moments compare equal.
    """

    qid: int
    vid: str
    moments: tuple[ScoredMoment, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "moments", tuple(sorted(self.moments, key=_moment_rank_key)))

    def top(self, k: int) -> tuple[ScoredMoment, ...]:
        """The ``k`` highest-ranked moments."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        return self.moments[:k]

    def truncated(self, k: int) -> "PredictionRecord":
        """A copy keeping only the ``k`` highest-ranked moments."""
        return PredictionRecord(qid=self.qid, vid=self.vid, moments=self.top(k))


def iou(a: TimeInterval, b: TimeInterval) -> float:
    """Temporal intersection-over-union of two intervals; 0 when disjoint."""
    inter = min(a.end_s, b.end_s) - max(a.start_s, b.start_s)
    if inter <= 0:
        return 0.0
    union = max(a.end_s, b.end_s) - min(a.start_s, b.start_s)
    return inter / union


def clamp_to_video(a: TimeInterval, duration_s: float) -> TimeInterval:
    """Intersect an interval with ``[0, duration_s]``.

    Raises ``ValueError`` when the intersection is empty, which signals
    an out-of-range proposal.
    """
    if duration_s <= 0:
        raise ValueError(f"duration must be positive, got {duration_s}")
    if a.start_s >= duration_s:
        raise ValueError(
            f"interval [{a.start_s}, {a.end_s}] lies outside video of duration {duration_s}"
        )
    if a.end_s <= duration_s:
        return a
    return TimeInterval(a.start_s, duration_s)
