"""End-to-end orchestration: propose, score, merge, rank, and sweep.

Runs entirely on precomputed feature files under a feature root:

    <root>/frames/<vid>.vmrf        downscaled HSV frame tracks
    <root>/embeddings/<vid>.vmre    1 fps joint-embedding tracks
    <root>/captions/<vid>.jsonl     per-segment captions + sentence embeddings
    <root>/queries.joint.jsonl      query embeddings, joint encoder
    <root>/queries.sentence.jsonl   query embeddings, sentence encoder

Queries whose video features are missing are skipped with a warning and
simply absent from the output, mirroring filtered-validation practice;
evaluation then uses only the surviving queries' denominators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from .core import PredictionRecord, QueryRecord, ScoredMoment, TimeInterval, clamp_to_video
from .errors import DataError
from .formats import (
    captions_path,
    embedding_track_path,
    frame_track_path,
    load_captions,
    load_embedding_track,
    load_frame_track,
    load_query_embeddings,
    query_embeddings_path,
)
from .matching import ENCODER_JOINT, ENCODER_SENTENCE, score_proposals
from .metrics import DEFAULT_MAX_PREDS, EvalReport, evaluate
from .postprocess import simple_watershed
from .proposals import (
    DEFAULT_MIN_SHOT_LEN_S,
    DEFAULT_STRIDE_S,
    DEFAULT_WINDOW_S,
    detect_shots,
    sliding_windows,
)

logger = logging.getLogger(__name__)

PROPOSAL_METHODS = ("shotdetect", "slidingwindow")
MATCHERS = ("frames", "captions")

#: Best shot threshold without watershed merging.
DEFAULT_SHOT_THRESHOLD = 53.0
#: Best (shot threshold, merge threshold) pair with watershed merging.
DEFAULT_WATERSHED_SHOT_THRESHOLD = 32.0
DEFAULT_MERGE_THRESHOLD = 0.7


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for one pipeline run.

    ``merge_threshold=None`` skips watershed merging entirely. Score
    normalization defaults to per-video min-max so the merge threshold
    operates on a comparable scale across videos.
    """

    proposal_method: str = "shotdetect"
    matcher: str = "frames"
    shot_threshold: float = DEFAULT_SHOT_THRESHOLD
    merge_threshold: float | None = None
    min_len_s: float = DEFAULT_MIN_SHOT_LEN_S
    normalize: str = "per_video"
    max_preds: int = DEFAULT_MAX_PREDS
    window_s: float = DEFAULT_WINDOW_S
    stride_s: float = DEFAULT_STRIDE_S

    def __post_init__(self) -> None:
        if self.proposal_method not in PROPOSAL_METHODS:
            raise ValueError(f"unknown proposal method {self.proposal_method!r}")
        if self.matcher not in MATCHERS:
            raise ValueError(f"unknown matcher {self.matcher!r}")
        if self.shot_threshold <= 0:
            raise ValueError(f"shot_threshold must be positive, got {self.shot_threshold}")
        if self.merge_threshold is not None and not (0.0 <= self.merge_threshold <= 1.0):
            raise ValueError(f"merge_threshold must be in [0, 1], got {self.merge_threshold}")
        if self.max_preds < 1:
            raise ValueError(f"max_preds must be >= 1, got {self.max_preds}")

    @property
    def encoder(self) -> str:
        return ENCODER_JOINT if self.matcher == "frames" else ENCODER_SENTENCE


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter grid around a fixed base configuration."""

    parameter: str  # "shot_threshold" or "merge_threshold"
    grid: tuple[float, ...]
    base: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self) -> None:
        if self.parameter not in ("shot_threshold", "merge_threshold"):
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if not self.grid:
            raise ValueError("sweep grid must be non-empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")

    def configs(self) -> list[tuple[float, PipelineConfig]]:
        return [(v, replace(self.base, **{self.parameter: v})) for v in self.grid]


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    n_segments: int
    report: EvalReport


def _propose(config: PipelineConfig, query: QueryRecord, feature_root: Path) -> list[TimeInterval]:
    if config.proposal_method == "shotdetect":
        track = load_frame_track(frame_track_path(feature_root, query.vid), vid=query.vid)
        segments = detect_shots(track, config.shot_threshold, config.min_len_s)
    else:
        segments = sliding_windows(query.duration_s, config.window_s, config.stride_s)
    clamped = []
    for seg in segments:
        if seg.start_s >= query.duration_s:
            continue  # proposal entirely beyond the annotated duration
        clamped.append(clamp_to_video(seg, query.duration_s))
    return clamped


def run_query(
    config: PipelineConfig,
    query: QueryRecord,
    feature_root: Path,
    query_embedding,
) -> tuple[list[ScoredMoment], PredictionRecord]:
    """Propose, score, and optionally merge for a single query.

    Returns the scored (post-watershed, pre-truncation) moments and the
    ranked, truncated prediction record.
    """
    segments = _propose(config, query, feature_root)
    if config.matcher == "frames":
        features = load_embedding_track(
            embedding_track_path(feature_root, query.vid), vid=query.vid
        )
    else:
        features = load_captions(captions_path(feature_root, query.vid))
    moments = score_proposals(segments, features, query_embedding, config.normalize)
    if config.merge_threshold is not None:
        moments = simple_watershed(moments, config.merge_threshold)
    record = PredictionRecord(qid=query.qid, vid=query.vid, moments=tuple(moments))
    return moments, record.truncated(config.max_preds)


def run_pipeline(
    config: PipelineConfig, dataset: list[QueryRecord], feature_root: Path | str
) -> list[PredictionRecord]:
    """Run the full pipeline over a dataset; deterministic given its inputs.

    Queries whose feature files or query embedding are missing are
    skipped with a warning rather than failing the run.
    """
    preds, _ = run_pipeline_counted(config, dataset, feature_root)
    return preds


def run_pipeline_counted(
    config: PipelineConfig, dataset: list[QueryRecord], feature_root: Path | str
) -> tuple[list[PredictionRecord], int]:
    """Like :func:`run_pipeline`, also returning the total pre-truncation
    segment count (the quantity the merge threshold acts on)."""
    feature_root = Path(feature_root)
    embeddings = load_query_embeddings(query_embeddings_path(feature_root, config.encoder))
    preds: list[PredictionRecord] = []
    n_segments = 0
    for query in dataset:
        if query.qid not in embeddings:
            logger.warning("qid %d: no %s query embedding; skipping", query.qid, config.encoder)
            continue
        try:
            moments, record = run_query(config, query, feature_root, embeddings[query.qid])
        except DataError as e:
            logger.warning("qid %d (vid %s): %s; skipping", query.qid, query.vid, e)
            continue
        preds.append(record)
        n_segments += len(moments)
    return preds, n_segments


def evaluate_predictions(
    preds: list[PredictionRecord], dataset: list[QueryRecord], max_preds: int | None = DEFAULT_MAX_PREDS
) -> EvalReport:
    """Evaluate predictions against the subset of the dataset they cover.

    Queries without predictions (e.g. skipped for missing features) are
    excluded from the denominators, mirroring filtered-validation
    evaluation; queries with predictions but absent from the dataset are
    an error.
    """
    covered = {p.qid for p in preds}
    gts = [g for g in dataset if g.qid in covered]
    return evaluate(preds, gts, max_preds=max_preds)


def sweep(spec: SweepSpec, dataset: list[QueryRecord], feature_root: Path | str) -> list[SweepRow]:
    """One full pipeline run and evaluation per grid value."""
    rows = []
    for value, config in spec.configs():
        preds, n_segments = run_pipeline_counted(config, dataset, feature_root)
        report = evaluate_predictions(preds, dataset, max_preds=config.max_preds)
        rows.append(SweepRow(parameter=spec.parameter, value=value, n_segments=n_segments, report=report))
    return rows
