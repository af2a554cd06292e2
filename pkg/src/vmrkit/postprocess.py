"""Watershed-style merging of high-scoring segment runs.

Defined only on partitions: the input moments must be temporally sorted
and non-overlapping. Overlapping proposals (e.g. from the sliding-window
generator) are rejected rather than silently merged.
"""

from __future__ import annotations

from typing import Sequence

from .core import ScoredMoment, TimeInterval

#: Two segments are treated as adjacent when their shared boundary
#: differs by at most this much (absorbs float noise in partitions).
ADJACENCY_TOL = 1e-9


def simple_watershed(moments: Sequence[ScoredMoment], gamma: float) -> list[ScoredMoment]:
    """Merge every consecutive run of segments scoring at least ``gamma``.

    A maximal run of temporally adjacent moments whose scores all reach
    ``gamma`` collapses into a single moment spanning the run, scored by
    the run maximum. Moments below ``gamma`` pass through unchanged, so
    recall survives on videos where nothing reaches the threshold. Runs
    never bridge temporal gaps. The output stays sorted, non-overlapping,
    and covers exactly the input's total duration; the operation is
    idempotent.
    """
    if not gamma >= 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")

    moments = list(moments)
    for prev, cur in zip(moments[:-1], moments[1:]):
        if cur.interval.start_s < prev.interval.start_s:
            raise ValueError("moments must be sorted by start time")
        if cur.interval.start_s < prev.interval.end_s - ADJACENCY_TOL:
            raise ValueError(
                f"moments overlap: [{prev.interval.start_s}, {prev.interval.end_s}] and "
                f"[{cur.interval.start_s}, {cur.interval.end_s}]; watershed is defined on partitions"
            )

    merged: list[ScoredMoment] = []
    run: list[ScoredMoment] = []

    def flush_run() -> None:
        if not run:
            return
        if len(run) == 1:
            merged.append(run[0])
        else:
            merged.append(
                ScoredMoment(
                    TimeInterval(run[0].interval.start_s, run[-1].interval.end_s),
                    max(m.score for m in run),
                )
            )
        run.clear()

    for m in moments:
        if m.score < gamma:
            flush_run()
            merged.append(m)
            continue
        if run and abs(m.interval.start_s - run[-1].interval.end_s) > ADJACENCY_TOL:
            flush_run()  # gap: adjacent runs only
        run.append(m)
    flush_run()
    return merged
