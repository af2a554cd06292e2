"""Zero-shot video moment retrieval over precomputed features."""

from .core import (
    PredictionRecord,
    QueryRecord,
    ScoredMoment,
    TimeInterval,
    clamp_to_video,
    iou,
)
from .errors import DataError, FormatError
from .matching import (
    ENCODER_JOINT,
    ENCODER_SENTENCE,
    EmbeddingTrack,
    QueryEmbedding,
    SegmentCaption,
    frames_in_segment,
    score_proposals,
    score_segment_by_caption,
    score_segment_by_frames,
)
from .metrics import EvalReport, average_precision, bucketize, evaluate, recall_at_1
from .oracle import oracle_merge, oracle_scores
from .postprocess import simple_watershed
from .proposals import (
    ContentSignal,
    FrameTrack,
    content_values,
    detect_shots,
    sliding_windows,
)

__version__ = "0.1.0"

__all__ = [
    "TimeInterval",
    "ScoredMoment",
    "QueryRecord",
    "PredictionRecord",
    "iou",
    "clamp_to_video",
    "FrameTrack",
    "ContentSignal",
    "content_values",
    "detect_shots",
    "sliding_windows",
    "EmbeddingTrack",
    "QueryEmbedding",
    "SegmentCaption",
    "ENCODER_JOINT",
    "ENCODER_SENTENCE",
    "frames_in_segment",
    "score_segment_by_frames",
    "score_segment_by_caption",
    "score_proposals",
    "simple_watershed",
    "EvalReport",
    "recall_at_1",
    "average_precision",
    "evaluate",
    "bucketize",
    "oracle_scores",
    "oracle_merge",
    "DataError",
    "FormatError",
]
