"""QVHighlights-style moment retrieval evaluation.

Headline metrics: Recall@1 at IoU 0.5 and 0.7, detection-style mAP at
IoU 0.5 and 0.75, and mAP averaged over the ten thresholds
0.50, 0.55, ..., 0.95, plus average mAP broken down by ground-truth
window length (short / medium / long).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .core import PredictionRecord, QueryRecord, ScoredMoment, TimeInterval, iou

R1_THRESHOLDS = (0.5, 0.7)

#: IoU grid behind "average mAP"; matches the benchmark's evaluator.
MAP_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))

BUCKETS = ("short", "medium", "long")

#: Moments at most this long are short; longer than the upper bound is
#: long; the closed range in between is medium.
SHORT_MAX_S = 10.0
MEDIUM_MAX_S = 30.0

#: Predictions kept per query before scoring, mirroring standard
#: submission practice for the benchmark.
DEFAULT_MAX_PREDS = 10


@dataclass(frozen=True)
class EvalReport:
    """Headline metrics (percent) plus length-bucketed average mAP.

    ``bucketed`` maps bucket name to average mAP over the queries that
    have at least one ground-truth window in the bucket, or ``None``
    when no query does. ``max_preds`` records the per-query prediction
    cap applied before scoring.
    """

    r1_at_0_5: float
    r1_at_0_7: float
    map_at_0_5: float
    map_at_0_75: float
    map_avg: float
    bucketed: dict[str, float | None] = field(default_factory=dict)
    n_queries: int = 0
    max_preds: int | None = DEFAULT_MAX_PREDS

    def headline(self) -> tuple[float, float, float, float, float]:
        return (self.r1_at_0_5, self.r1_at_0_7, self.map_at_0_5, self.map_at_0_75, self.map_avg)


def bucketize(window: TimeInterval) -> str:
    """Length bucket of a ground-truth window: short, medium, or long."""
    length = window.length_s
    if length < SHORT_MAX_S:
        return "short"
    if length <= MEDIUM_MAX_S:
        return "medium"
    return "long"


def _check_qids(preds: PredictionRecord, gt: QueryRecord) -> None:
    if preds.qid != gt.qid:
        raise ValueError(f"qid mismatch: predictions for {preds.qid}, ground truth for {gt.qid}")


def recall_at_1(preds: PredictionRecord, gt: QueryRecord, iou_thresh: float) -> int:
    """1 iff the top-ranked prediction reaches ``iou_thresh`` against some gt window."""
    _check_qids(preds, gt)
    if not preds.moments:
        return 0
    top = preds.moments[0].interval
    best = max(iou(top, w) for w in gt.gt_windows)
    return 1 if best >= iou_thresh else 0


def _match_predictions(
    moments: Sequence[ScoredMoment], gt_windows: Sequence[TimeInterval], iou_thresh: float
) -> list[bool]:
    """Greedy detection matching: rank order, each gt window consumable once.

    Each prediction tries the still-unmatched gt window with the highest
    IoU (ties favour the earlier window in the record); it is a true
    positive iff that IoU reaches the threshold.
    """
    taken = [False] * len(gt_windows)
    hits: list[bool] = []
    for m in moments:
        best_iou, best_j = 0.0, -1
        for j, w in enumerate(gt_windows):
            if taken[j]:
                continue
            v = iou(m.interval, w)
            if v > best_iou:
                best_iou, best_j = v, j
        if best_j >= 0 and best_iou >= iou_thresh:
            taken[best_j] = True
            hits.append(True)
        else:
            hits.append(False)
    return hits


def _average_precision(
    moments: Sequence[ScoredMoment], gt_windows: Sequence[TimeInterval], iou_thresh: float
) -> float:
    """AP as the area under the max-envelope-interpolated PR curve.

    Recall denominator is the number of gt windows. The area reduces to
    the mean, over gt windows found, of the best precision at or after
    the rank where each was found; a perfect prediction list yields
    exactly 1.0.
    """
    if not moments:
        return 0.0
    hits = _match_predictions(moments, gt_windows, iou_thresh)
    tp = 0
    precisions = []
    for rank, hit in enumerate(hits, start=1):
        tp += hit
        precisions.append(tp / rank)
    # Envelope: precision at each rank lifted to the best precision at
    # any later rank, per VOC-style interpolation.
    envelope = precisions[:]
    for i in range(len(envelope) - 2, -1, -1):
        envelope[i] = max(envelope[i], envelope[i + 1])
    area = sum(env for env, hit in zip(envelope, hits) if hit)
    return area / len(gt_windows)


def average_precision(preds: PredictionRecord, gt: QueryRecord, iou_thresh: float) -> float:
    """Detection-style average precision of one prediction list."""
    _check_qids(preds, gt)
    return _average_precision(preds.moments, gt.gt_windows, iou_thresh)


def _restrict_to_bucket(gt: QueryRecord, bucket: str) -> tuple[TimeInterval, ...]:
    return tuple(w for w in gt.gt_windows if bucketize(w) == bucket)


def evaluate(
    preds: Sequence[PredictionRecord],
    gts: Sequence[QueryRecord],
    max_preds: int | None = DEFAULT_MAX_PREDS,
) -> EvalReport:
    """Score a set of predictions against its query set.

    Every ground-truth query counts toward the denominators; a query
    without a prediction record scores 0 everywhere. Per-query moment
    lists are truncated to ``max_preds`` by rank before scoring. For the
    length buckets, each query is re-evaluated against only its windows
    in the bucket (full prediction list); queries with no window in a
    bucket are excluded from that bucket's mean.
    """
    by_qid: dict[int, PredictionRecord] = {}
    for p in preds:
        if p.qid in by_qid:
            raise ValueError(f"duplicate prediction record for qid {p.qid}")
        by_qid[p.qid] = p
    gt_qids = {g.qid for g in gts}
    if len(gt_qids) != len(gts):
        raise ValueError("duplicate qid in ground truth")
    unknown = sorted(set(by_qid) - gt_qids)
    if unknown:
        raise ValueError(f"predictions reference unknown qids: {unknown[:5]}")
    if not gts:
        raise ValueError("ground truth is empty")

    n = len(gts)
    r1_sums = {t: 0 for t in R1_THRESHOLDS}
    ap_sums = {t: 0.0 for t in MAP_THRESHOLDS}
    bucket_sums = {b: 0.0 for b in BUCKETS}
    bucket_counts = {b: 0 for b in BUCKETS}

    for gt in gts:
        pred = by_qid.get(gt.qid, PredictionRecord(qid=gt.qid, vid=gt.vid))
        moments = pred.moments[:max_preds] if max_preds is not None else pred.moments
        capped = PredictionRecord(qid=pred.qid, vid=pred.vid, moments=moments)

        for t in R1_THRESHOLDS:
            r1_sums[t] += recall_at_1(capped, gt, t)
        for t in MAP_THRESHOLDS:
            ap_sums[t] += _average_precision(moments, gt.gt_windows, t)

        for bucket in BUCKETS:
            windows = _restrict_to_bucket(gt, bucket)
            if not windows:
                continue
            bucket_counts[bucket] += 1
            bucket_sums[bucket] += sum(
                _average_precision(moments, windows, t) for t in MAP_THRESHOLDS
            ) / len(MAP_THRESHOLDS)

    map_at = {t: 100.0 * ap_sums[t] / n for t in MAP_THRESHOLDS}
    bucketed: dict[str, float | None] = {
        b: (100.0 * bucket_sums[b] / bucket_counts[b] if bucket_counts[b] else None)
        for b in BUCKETS
    }
    return EvalReport(
        r1_at_0_5=100.0 * r1_sums[0.5] / n,
        r1_at_0_7=100.0 * r1_sums[0.7] / n,
        map_at_0_5=map_at[0.5],
        map_at_0_75=map_at[0.75],
        map_avg=sum(map_at.values()) / len(MAP_THRESHOLDS),
        bucketed=bucketed,
        n_queries=n,
        max_preds=max_preds,
    )
