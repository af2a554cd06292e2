"""Oracular bounds: what a perfect matcher could score on a given partition.

``oracle_scores`` rates each segment by its best IoU against the ground
truth; ``oracle_merge`` additionally merges adjacent segments when the
combined segment scores strictly better. These quantify the ceiling of
shot-based proposals; they are bounds, not upper bounds, since
similarity scores better than IoU can exist.
"""

from __future__ import annotations

from typing import Sequence

from .core import QueryRecord, ScoredMoment, TimeInterval, iou

PARTITION_TOL = 1e-9


def _best_match(seg: TimeInterval, gt: QueryRecord) -> tuple[float, int]:
    """Highest IoU over gt windows and the index of the first window attaining it."""
    best, best_j = 0.0, 0
    for j, w in enumerate(gt.gt_windows):
        v = iou(seg, w)
        if v > best:
            best, best_j = v, j
    return best, best_j


def oracle_scores(segments: Sequence[TimeInterval], gt: QueryRecord) -> list[ScoredMoment]:
    """Score each segment by its highest IoU with any ground-truth window."""
    if not segments:
        raise ValueError("segments must be non-empty")
    return [ScoredMoment(seg, _best_match(seg, gt)[0]) for seg in segments]


def _check_partition(segments: Sequence[TimeInterval]) -> None:
    for prev, cur in zip(segments[:-1], segments[1:]):
        if abs(cur.start_s - prev.end_s) > PARTITION_TOL:
            raise ValueError(
                f"segments must form a partition; gap or overlap between "
                f"[{prev.start_s}, {prev.end_s}] and [{cur.start_s}, {cur.end_s}]"
            )


def oracle_merge(segments: Sequence[TimeInterval], gt: QueryRecord) -> list[ScoredMoment]:
    """Greedy left-to-right merging wherever it strictly improves IoU.

    Maintains an accumulated segment; the next segment is absorbed when
    (a) both sides are nearest to the same ground-truth window and
    (b) their union scores strictly higher against it than either side
    alone. Under (a) and (b) every emitted segment scores at least as
    well as its best constituent and two segments matching different
    windows are never collapsed into one, so merged output never
    evaluates below plain oracle scoring on the same partition.
    """
    if not segments:
        raise ValueError("segments must be non-empty")
    _check_partition(segments)

    merged: list[ScoredMoment] = []
    current = segments[0]
    current_iou, current_win = _best_match(current, gt)
    for nxt in segments[1:]:
        nxt_iou, nxt_win = _best_match(nxt, gt)
        candidate = TimeInterval(current.start_s, nxt.end_s)
        candidate_iou, _ = _best_match(candidate, gt)
        if current_win == nxt_win and candidate_iou > max(current_iou, nxt_iou):
            current, (current_iou, current_win) = candidate, (candidate_iou, current_win)
        else:
            merged.append(ScoredMoment(current, current_iou))
            current, (current_iou, current_win) = nxt, (nxt_iou, nxt_win)
    merged.append(ScoredMoment(current, current_iou))
    return merged
