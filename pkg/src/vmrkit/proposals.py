"""Candidate moment generation.

Two generators: ``detect_shots`` finds hard cuts by thresholding the
frame-to-frame HSV change of a :class:`FrameTrack`, and
``sliding_windows`` produces the fixed 15 s / 10 s baseline grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TimeInterval

#: Segments shorter than this are not closed by a cut; prevents noisy
#: high-fps video from producing near-zero-length segments that break
#: one-frame-per-second sampling downstream.
DEFAULT_MIN_SHOT_LEN_S = 0.4

#: Frame tracks are stored at this resolution by default; recorded in
#: the file header so results reproduce bit-for-bit.
DEFAULT_TRACK_SIZE = (64, 36)  # (width, height)

DEFAULT_WINDOW_S = 15.0
DEFAULT_STRIDE_S = 10.0

#: Tail sliding windows shorter than this are dropped.
MIN_TAIL_WINDOW_S = 1.0


@dataclass(frozen=True)
class FrameTrack:
    """Per-frame downscaled HSV images at a known frame rate.

    ``frames`` has shape ``(n, height, width, 3)`` with dtype uint8;
    channels are H, S, V with H rescaled to 0-255 and treated as linear
    (no circular wraparound).
    """

    vid: str
    fps: float
    frames: np.ndarray

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        f = self.frames
        if f.ndim != 4 or f.shape[3] != 3:
            raise ValueError(f"frames must have shape (n, h, w, 3), got {f.shape}")
        if f.dtype != np.uint8:
            raise ValueError(f"frames must be uint8, got {f.dtype}")
        if f.shape[0] < 2:
            raise ValueError(f"track needs at least 2 frames, got {f.shape[0]}")

    @property
    def frame_count(self) -> int:
        return int(self.frames.shape[0])

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.fps


@dataclass(frozen=True)
class ContentSignal:
    """Per-adjacent-frame-pair color-change magnitudes, in 8-bit units."""

    values: np.ndarray  # shape (frame_count - 1,), float64 in [0, 255]

    def __len__(self) -> int:
        return int(self.values.shape[0])


def content_values(track: FrameTrack) -> ContentSignal:
    """Color-change magnitude between every pair of adjacent frames.

    ``values[i]`` is the mean over the H, S, V channels of the mean
    absolute per-pixel difference between frame ``i+1`` and frame ``i``.
    A pair of identical frames scores 0; all-0 against all-255 scores 255.
    """
    frames = track.frames.astype(np.int16)
    diffs = np.abs(frames[1:] - frames[:-1])  # (n-1, h, w, 3)
    values = diffs.mean(axis=(1, 2, 3), dtype=np.float64)
    return ContentSignal(values=values)


def detect_shots(
    track: FrameTrack,
    threshold: float,
    min_len_s: float = DEFAULT_MIN_SHOT_LEN_S,
) -> list[TimeInterval]:
    """Partition a track into shots at significant color changes.

    A cut is declared before frame ``i+1`` whenever the content value of
    the pair ``(i, i+1)`` reaches ``threshold`` and the segment that the
    cut would close is at least ``min_len_s`` long (shorter cuts are
    suppressed and the segment keeps growing). The returned segments are
    consecutive and cover exactly ``[0, duration_s]``; boundaries sit on
    frame timestamps (``frame_index / fps``).
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    if min_len_s < 0:
        raise ValueError(f"min_len_s must be >= 0, got {min_len_s}")

    signal = content_values(track).values
    cut_times = [0.0]
    for i in np.flatnonzero(signal >= threshold):
        t = (int(i) + 1) / track.fps
        if t - cut_times[-1] >= min_len_s:
            cut_times.append(t)
    cut_times.append(track.duration_s)
    return [TimeInterval(a, b) for a, b in zip(cut_times[:-1], cut_times[1:])]


def sliding_windows(
    duration_s: float,
    window_s: float = DEFAULT_WINDOW_S,
    stride_s: float = DEFAULT_STRIDE_S,
) -> list[TimeInterval]:
    """Fixed-length proposal windows marching at a fixed stride.

    Full windows start at 0, ``stride_s``, ``2 * stride_s``, ...; the
    first window that would overrun the video is clipped to its end and
    closes the list (it is dropped entirely when shorter than 1 s).
    """
    if duration_s <= 0:
        raise ValueError(f"duration must be positive, got {duration_s}")
    if window_s <= 0 or stride_s <= 0:
        raise ValueError(f"window and stride must be positive, got {window_s}, {stride_s}")

    windows: list[TimeInterval] = []
    start = 0.0
    k = 0
    while start < duration_s:
        if start + window_s <= duration_s:
            windows.append(TimeInterval(start, start + window_s))
        else:
            if duration_s - start >= MIN_TAIL_WINDOW_S:
                windows.append(TimeInterval(start, duration_s))
            break
        k += 1
        start = k * stride_s
    return windows
