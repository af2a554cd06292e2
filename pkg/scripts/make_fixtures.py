#!/usr/bin/env python3
"""Regenerate the committed synthetic fixture set under fixtures/.

Three block-color videos with topic-tagged embeddings, six queries, and
every feature file the pipeline consumes (frame tracks, embedding
tracks, captions for the shot partition at the default watershed shot
threshold, and query embeddings for both encoder families), plus the
frozen golden predictions of the default watershed configuration.

Deterministic: a fixed seed drives all noise, so reruns reproduce the
same files byte for byte.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from vmrkit.core import TimeInterval  # noqa: E402
from vmrkit.formats import (  # noqa: E402
    captions_path,
    embedding_track_path,
    frame_track_path,
    query_embeddings_path,
    save_embedding_track,
    save_frame_track,
    write_captions,
    write_predictions,
    write_query_embeddings,
)
from vmrkit.matching import (  # noqa: E402
    ENCODER_JOINT,
    ENCODER_SENTENCE,
    EmbeddingTrack,
    QueryEmbedding,
    SegmentCaption,
)
from vmrkit.pipeline import (  # noqa: E402
    DEFAULT_MERGE_THRESHOLD,
    DEFAULT_WATERSHED_SHOT_THRESHOLD,
    PipelineConfig,
    run_pipeline,
)
from vmrkit.proposals import FrameTrack, detect_shots  # noqa: E402

FIXTURES = REPO / "fixtures"
SEED = 20260809
FPS = 2.0
WIDTH, HEIGHT = 64, 36
JOINT_DIM = 16
SENTENCE_DIM = 12
NOISE = 3  # per-channel pixel noise amplitude, well under the cut threshold

TOPICS = ("kitchen", "beach", "dog", "news", "plane", "hotel")

# vid -> (duration_s, [(block_len_s, topic), ...])
VIDEOS = {
    "vid_a": [(12, "kitchen"), (18, "dog"), (14, "kitchen"), (16, "beach")],
    "vid_b": [(20, "news"), (10, "plane"), (25, "news"), (15, "hotel"), (20, "plane")],
    "vid_c": [(9, "beach"), (31, "hotel"), (12, "dog"), (8, "beach"), (15, "news")],
}

# qid -> (vid, topic, query text, gt windows); windows sit near but not
# exactly on block boundaries so metrics stay away from 0 and 100
QUERIES = {
    101: ("vid_a", "dog", "A dog plays on the floor", [[14.0, 28.0]]),
    102: ("vid_a", "kitchen", "Someone cooks in a kitchen", [[0.0, 10.0], [31.0, 44.0]]),
    103: ("vid_b", "plane", "A plane taxis on the runway", [[20.0, 30.0], [68.0, 90.0]]),
    104: ("vid_b", "news", "A reporter reads the news", [[2.0, 20.0], [30.0, 50.0]]),
    105: ("vid_c", "hotel", "A tour of a hotel room", [[9.0, 41.0]]),
    106: ("vid_c", "beach", "Waves roll onto the beach", [[0.0, 9.0], [53.0, 60.0]]),
}

BLOCK_COLORS = {
    "kitchen": (40, 80, 200),
    "beach": (150, 180, 220),
    "dog": (90, 40, 120),
    "news": (10, 220, 60),
    "plane": (200, 120, 160),
    "hotel": (60, 160, 30),
}


def topic_basis(rng: np.random.Generator, dim: int) -> dict[str, np.ndarray]:
    basis = {}
    for topic in TOPICS:
        v = rng.normal(size=dim)
        basis[topic] = v / np.linalg.norm(v)
    return basis


def noisy_unit(rng: np.random.Generator, base: np.ndarray, scale: float) -> np.ndarray:
    v = base + rng.normal(scale=scale, size=base.shape)
    return v / np.linalg.norm(v)


def build_frame_track(rng: np.random.Generator, vid: str) -> FrameTrack:
    pieces = []
    for block_len_s, topic in VIDEOS[vid]:
        n = int(block_len_s * FPS)
        block = np.tile(np.array(BLOCK_COLORS[topic], dtype=np.int16), (n, HEIGHT, WIDTH, 1))
        block = block + rng.integers(-NOISE, NOISE + 1, size=block.shape, dtype=np.int16)
        pieces.append(block)
    frames = np.concatenate(pieces, axis=0).clip(0, 255).astype(np.uint8)
    return FrameTrack(vid=vid, fps=FPS, frames=frames)


def topic_at(vid: str, t: float) -> str:
    pos = 0.0
    for block_len_s, topic in VIDEOS[vid]:
        pos += block_len_s
        if t < pos:
            return topic
    return VIDEOS[vid][-1][1]


def build_embedding_track(rng, vid: str, joint_basis) -> EmbeddingTrack:
    duration = sum(length for length, _ in VIDEOS[vid])
    timestamps = np.arange(int(duration)) + 0.5
    vectors = np.stack(
        [noisy_unit(rng, joint_basis[topic_at(vid, t)], 0.35) for t in timestamps]
    )
    return EmbeddingTrack(vid=vid, timestamps=timestamps.astype(np.float64),
                          vectors=vectors.astype(np.float32))


def main() -> None:
    rng = np.random.default_rng(SEED)
    joint_basis = topic_basis(rng, JOINT_DIM)
    sentence_basis = topic_basis(rng, SENTENCE_DIM)

    (FIXTURES / "features").mkdir(parents=True, exist_ok=True)
    root = FIXTURES / "features"
    for sub in ("frames", "embeddings", "captions"):
        (root / sub).mkdir(exist_ok=True)

    dataset_lines = []
    for qid, (vid, topic, text, windows) in QUERIES.items():
        duration = float(sum(length for length, _ in VIDEOS[vid]))
        dataset_lines.append(
            {"qid": qid, "query": text, "vid": vid, "duration": duration,
             "relevant_windows": windows}
        )
    dataset_path = FIXTURES / "dataset.jsonl"
    dataset_path.write_text(
        "".join(json.dumps(line) + "\n" for line in dataset_lines), encoding="utf-8"
    )

    for vid in VIDEOS:
        track = build_frame_track(rng, vid)
        save_frame_track(track, frame_track_path(root, vid))
        save_embedding_track(build_embedding_track(rng, vid, joint_basis),
                             embedding_track_path(root, vid))
        # captions for the shot partition at the default watershed threshold
        segments = detect_shots(track, DEFAULT_WATERSHED_SHOT_THRESHOLD)
        captions = []
        for seg in segments:
            topic = topic_at(vid, (seg.start_s + seg.end_s) / 2)
            captions.append(
                SegmentCaption(
                    vid=vid,
                    interval=seg,
                    caption_text=f"a clip about {topic}",
                    caption_embedding=noisy_unit(rng, sentence_basis[topic], 0.3),
                )
            )
        write_captions(captions, captions_path(root, vid))

    for encoder, basis, dim in (
        (ENCODER_JOINT, joint_basis, JOINT_DIM),
        (ENCODER_SENTENCE, sentence_basis, SENTENCE_DIM),
    ):
        embeddings = [
            QueryEmbedding(qid=qid, vector=noisy_unit(rng, basis[topic], 0.3), encoder_tag=encoder)
            for qid, (vid, topic, text, windows) in QUERIES.items()
        ]
        write_query_embeddings(embeddings, query_embeddings_path(root, encoder))

    config = PipelineConfig(
        proposal_method="shotdetect",
        matcher="frames",
        shot_threshold=DEFAULT_WATERSHED_SHOT_THRESHOLD,
        merge_threshold=DEFAULT_MERGE_THRESHOLD,
        normalize="per_video",
    )
    from vmrkit.formats import load_dataset

    preds = run_pipeline(config, load_dataset(dataset_path), root)
    write_predictions(preds, FIXTURES / "golden_predictions.jsonl")
    print(f"wrote fixtures for {len(VIDEOS)} videos, {len(QUERIES)} queries under {FIXTURES}")


if __name__ == "__main__":
    main()
