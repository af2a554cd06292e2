"""Shared test fixtures and random-case generators."""

from __future__ import annotations

import random

import numpy as np
import pytest

from vmrkit.core import PredictionRecord, QueryRecord, ScoredMoment, TimeInterval
from vmrkit.proposals import FrameTrack


def random_eval_case(
    rng: random.Random,
    max_queries: int = 20,
    max_gt: int = 8,
    max_preds: int = 10,
) -> tuple[list[dict], list[dict]]:
    """A (submission, ground truth) pair in the JSONL dict shapes.

    Half the predicted windows are jittered copies of ground-truth
    windows so IoUs cluster around the decision thresholds; continuous
    endpoints and scores keep ties at probability zero.
    """
    submission, ground_truth = [], []
    for i in range(rng.randint(1, max_queries)):
        qid = 1000 + i
        duration = rng.uniform(30.0, 150.0)

        windows = []
        for _ in range(rng.randint(1, max_gt)):
            start = rng.uniform(0.0, duration - 1.0)
            end = rng.uniform(start + 0.5, duration)
            windows.append([start, end])

        preds = []
        for _ in range(rng.randint(1, max_preds)):
            if rng.random() < 0.5:
                base = rng.choice(windows)
                start = min(max(0.0, base[0] + rng.uniform(-4.0, 4.0)), duration - 0.5)
                end = min(base[1] + rng.uniform(-4.0, 4.0), duration)
                if end <= start:
                    start, end = sorted((start, min(end + 5.0, duration)))
                if end <= start:
                    start, end = 0.0, duration
            else:
                start = rng.uniform(0.0, duration - 1.0)
                end = rng.uniform(start + 0.5, duration)
            preds.append([start, end, rng.random()])
        preds.sort(key=lambda w: (-w[2], w[0], w[1]))

        ground_truth.append(
            {
                "qid": qid,
                "query": f"synthetic query {qid}",
                "vid": f"vid{qid:04d}",
                "duration": duration,
                "relevant_windows": windows,
            }
        )
        submission.append({"qid": qid, "vid": f"vid{qid:04d}", "pred_relevant_windows": preds})
    return submission, ground_truth


def records_from_dicts(
    submission: list[dict], ground_truth: list[dict]
) -> tuple[list[PredictionRecord], list[QueryRecord]]:
    gts = [
        QueryRecord(
            qid=d["qid"],
            vid=d["vid"],
            query_text=d["query"],
            duration_s=d["duration"],
            gt_windows=tuple(TimeInterval(s, e) for s, e in d["relevant_windows"]),
        )
        for d in ground_truth
    ]
    preds = [
        PredictionRecord(
            qid=d["qid"],
            vid=d.get("vid", ""),
            moments=tuple(
                ScoredMoment(TimeInterval(s, e), score) for s, e, score in d["pred_relevant_windows"]
            ),
        )
        for d in submission
    ]
    return preds, gts


def random_adjacent_moments(rng: random.Random, max_segments: int = 12, allow_gaps: bool = True):
    """Temporally sorted, non-overlapping moments with dyadic boundaries.

    Dyadic (multiple-of-1/8) endpoints keep every length and sum exact in
    binary floating point, so duration-preservation checks can demand
    exact equality.
    """
    n = rng.randint(1, max_segments)
    out = []
    pos = rng.randrange(0, 40) * 0.125
    for _ in range(n):
        if allow_gaps and out and rng.random() < 0.2:
            pos += rng.randrange(1, 16) * 0.125
        length = rng.randrange(1, 64) * 0.125
        out.append(ScoredMoment(TimeInterval(pos, pos + length), rng.randrange(0, 101) / 100))
        pos += length
    return out


def block_color_track(
    vid: str,
    fps: float,
    block_len_frames: list[int],
    block_colors: list[tuple[int, int, int]],
    noise_amplitude: int = 0,
    seed: int = 0,
    width: int = 64,
    height: int = 36,
) -> FrameTrack:
    """A track of solid-color blocks with optional uniform pixel noise."""
    assert len(block_len_frames) == len(block_colors)
    rng = np.random.default_rng(seed)
    pieces = []
    for n, color in zip(block_len_frames, block_colors):
        block = np.tile(np.array(color, dtype=np.int16), (n, height, width, 1))
        if noise_amplitude:
            block = block + rng.integers(
                -noise_amplitude, noise_amplitude + 1, size=block.shape, dtype=np.int16
            )
        pieces.append(block)
    frames = np.concatenate(pieces, axis=0).clip(0, 255).astype(np.uint8)
    return FrameTrack(vid=vid, fps=fps, frames=frames)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260809)
