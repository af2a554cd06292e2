"""Moment-query scoring over precomputed embeddings.

Two scoring paths: the frame path compares per-frame joint image-text
embeddings against the query embedding and aggregates with ``max``; the
caption path compares one sentence embedding per segment caption against
the query's sentence embedding. No neural inference happens here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import ScoredMoment, TimeInterval

#: Encoder families a query embedding can come from. Vectors from
#: different families live in unrelated spaces and must not be compared.
ENCODER_JOINT = "joint"
ENCODER_SENTENCE = "sentence"

UNIT_NORM_TOL = 1e-4

AGGREGATIONS = ("max",)

NORMALIZE_MODES = ("per_video", "none")


def _check_unit_norm(vectors: np.ndarray, what: str) -> None:
    norms = np.linalg.norm(vectors, axis=-1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"{what} {i} is not unit-norm (|v| = {norms.reshape(-1)[i]:.6f})")


@dataclass(frozen=True)
class EmbeddingTrack:
    """Timestamped unit-norm joint-embedding vectors sampled from a video."""

    vid: str
    timestamps: np.ndarray  # (n,) float64, strictly increasing seconds
    vectors: np.ndarray  # (n, dim) float32, unit-norm within 1e-4

    def __post_init__(self) -> None:
        if self.timestamps.ndim != 1 or self.vectors.ndim != 2:
            raise ValueError("timestamps must be (n,), vectors (n, dim)")
        if self.timestamps.shape[0] != self.vectors.shape[0]:
            raise ValueError(
                f"{self.timestamps.shape[0]} timestamps but {self.vectors.shape[0]} vectors"
            )
        if self.timestamps.shape[0] == 0:
            raise ValueError("embedding track must not be empty")
        if np.any(np.diff(self.timestamps) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        _check_unit_norm(self.vectors, "track vector")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


@dataclass(frozen=True)
class QueryEmbedding:
    """A query's embedding, tagged with the encoder family that made it."""

    qid: int
    vector: np.ndarray
    encoder_tag: str

    def __post_init__(self) -> None:
        if self.vector.ndim != 1:
            raise ValueError(f"query vector must be 1-d, got shape {self.vector.shape}")
        _check_unit_norm(self.vector[None, :], "query vector")

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])


@dataclass(frozen=True)
class SegmentCaption:
    """A generated caption for one segment plus its sentence embedding."""

    vid: str
    interval: TimeInterval
    caption_text: str
    caption_embedding: np.ndarray

    def __post_init__(self) -> None:
        if self.caption_embedding.ndim != 1:
            raise ValueError(f"caption embedding must be 1-d, got shape {self.caption_embedding.shape}")
        _check_unit_norm(self.caption_embedding[None, :], "caption embedding")


def frames_in_segment(track: EmbeddingTrack, seg: TimeInterval) -> np.ndarray:
    """Vectors of the track entries falling inside a segment.

    Membership is half-open, ``start <= t < end``, so a boundary frame is
    never counted twice by adjacent segments. A segment shorter than the
    sampling period may contain no entry at all; it gets the single entry
    nearest its midpoint instead.
    """
    if track.timestamps.shape[0] == 0:
        raise ValueError("embedding track is empty")
    mask = (track.timestamps >= seg.start_s) & (track.timestamps < seg.end_s)
    if mask.any():
        return track.vectors[mask]
    mid = 0.5 * (seg.start_s + seg.end_s)
    nearest = int(np.argmin(np.abs(track.timestamps - mid)))
    return track.vectors[nearest : nearest + 1]


def _cosine(vectors: np.ndarray, query: np.ndarray) -> np.ndarray:
    num = vectors.astype(np.float64) @ query.astype(np.float64)
    den = np.linalg.norm(vectors, axis=1).astype(np.float64) * np.linalg.norm(query)
    return num / den


def score_segment_by_frames(
    frames: np.ndarray, query: QueryEmbedding, agg: str = "max"
) -> float:
    """Aggregate frame-query cosine similarities into one segment score.

    With ``max`` aggregation the score is the best cosine over the
    segment's frames, clamped into ``[0, 1]``.
    """
    if agg not in AGGREGATIONS:
        raise ValueError(f"unknown aggregation {agg!r}; supported: {AGGREGATIONS}")
    if frames.ndim != 2 or frames.shape[0] == 0:
        raise ValueError(f"need a non-empty (k, dim) frame array, got shape {frames.shape}")
    if frames.shape[1] != query.dim:
        raise ValueError(f"dimension mismatch: frames are {frames.shape[1]}-d, query is {query.dim}-d")
    cosines = _cosine(frames, query.vector)
    return float(np.clip(cosines.max(), 0.0, 1.0))


def score_segment_by_caption(cap: SegmentCaption, query: QueryEmbedding) -> float:
    """Cosine similarity between a segment caption and the query, clamped to [0, 1]."""
    if query.encoder_tag != ENCODER_SENTENCE:
        raise ValueError(
            f"caption scoring needs a {ENCODER_SENTENCE!r} query embedding, got {query.encoder_tag!r}"
        )
    if cap.caption_embedding.shape[0] != query.dim:
        raise ValueError(
            f"dimension mismatch: caption is {cap.caption_embedding.shape[0]}-d, query is {query.dim}-d"
        )
    cosine = _cosine(cap.caption_embedding[None, :], query.vector)[0]
    return float(np.clip(cosine, 0.0, 1.0))


def _caption_for(captions: Sequence[SegmentCaption], seg: TimeInterval) -> SegmentCaption:
    for cap in captions:
        if (
            abs(cap.interval.start_s - seg.start_s) <= 1e-6
            and abs(cap.interval.end_s - seg.end_s) <= 1e-6
        ):
            return cap
    raise ValueError(f"no caption covers segment [{seg.start_s}, {seg.end_s}]")


def score_proposals(
    segments: Sequence[TimeInterval],
    features: Union[EmbeddingTrack, Sequence[SegmentCaption]],
    query: QueryEmbedding,
    normalize: str = "per_video",
) -> list[ScoredMoment]:
    """Score every proposal against the query, one moment per segment.

    With ``normalize="per_video"`` the raw scores are min-max rescaled to
    span ``[0, 1]`` across the video's segments (identity when all raw
    scores are equal); with ``"none"`` they are returned as-is. Rescaling
    never changes the ranking of a video's segments.
    """
    if normalize not in NORMALIZE_MODES:
        raise ValueError(f"unknown normalize mode {normalize!r}; supported: {NORMALIZE_MODES}")
    if not segments:
        raise ValueError("segments must be non-empty")

    if isinstance(features, EmbeddingTrack):
        if query.encoder_tag != ENCODER_JOINT:
            raise ValueError(
                f"frame scoring needs a {ENCODER_JOINT!r} query embedding, got {query.encoder_tag!r}"
            )
        raw = [score_segment_by_frames(frames_in_segment(features, seg), query) for seg in segments]
    else:
        captions = list(features)
        raw = [score_segment_by_caption(_caption_for(captions, seg), query) for seg in segments]

    scores = np.asarray(raw, dtype=np.float64)
    if normalize == "per_video":
        lo, hi = scores.min(), scores.max()
        if hi > lo:
            scores = (scores - lo) / (hi - lo)
    return [ScoredMoment(seg, float(s)) for seg, s in zip(segments, scores)]
