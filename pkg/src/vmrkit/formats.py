"""File formats: binary feature tracks and the JSONL dataset/feature files.

Binary layouts (little-endian throughout):

``.vmrf`` frame track
    magic ``VMRF`` | version u16 | width u16 | height u16 | fps f32 |
    frame_count u32, then per frame the H, S and V planes as
    ``width * height`` bytes each, row-major.

``.vmre`` embedding track
    magic ``VMRE`` | version u16 | dim u16 | count u32, then ``count``
    records of timestamp f32 (seconds) followed by ``dim`` f32 values
    (unit-norm).

Fixed headers make truncation detectable and the payloads memory-mappable.

JSONL files, one object per line:

* dataset: ``{"qid", "query", "vid", "duration", "relevant_windows"}``
* query embeddings: ``{"qid", "encoder", "vector"}``
* captions: ``{"vid", "start", "end", "caption", "vector"}``
* predictions: ``{"qid", "vid", "pred_relevant_windows": [[start, end, score], ...]}``
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import PredictionRecord, QueryRecord, ScoredMoment, TimeInterval
from .errors import DataError, FormatError
from .matching import EmbeddingTrack, QueryEmbedding, SegmentCaption
from .proposals import FrameTrack

FRAME_TRACK_MAGIC = b"VMRF"
EMBEDDING_TRACK_MAGIC = b"VMRE"
FORMAT_VERSION = 1

_FRAME_HEADER = struct.Struct("<4sHHHfI")
_EMBED_HEADER = struct.Struct("<4sHHI")

#: Ground-truth windows may overrun the stated duration by up to this
#: much (annotation slack); they are clamped. Anything worse is rejected.
GT_END_SLACK_S = 0.5

# Feature-root layout used by the pipeline.
FRAMES_DIR = "frames"
EMBEDDINGS_DIR = "embeddings"
CAPTIONS_DIR = "captions"
QUERY_EMBEDDINGS_FILE = "queries.{encoder}.jsonl"


def frame_track_path(root: Path, vid: str) -> Path:
    return Path(root) / FRAMES_DIR / f"{vid}.vmrf"


def embedding_track_path(root: Path, vid: str) -> Path:
    return Path(root) / EMBEDDINGS_DIR / f"{vid}.vmre"


def captions_path(root: Path, vid: str) -> Path:
    return Path(root) / CAPTIONS_DIR / f"{vid}.jsonl"


def query_embeddings_path(root: Path, encoder: str) -> Path:
    return Path(root) / QUERY_EMBEDDINGS_FILE.format(encoder=encoder)


# ---------------------------------------------------------------------------
# binary tracks
# ---------------------------------------------------------------------------


def _read_exact(path: Path, expected: int, payload: bytes, what: str) -> None:
    if len(payload) != expected:
        raise FormatError(
            f"{path}: truncated {what}: expected {expected} payload bytes, found {len(payload)}"
        )


def save_frame_track(track: FrameTrack, path: Path | str) -> None:
    """Write a frame track in the VMRF layout."""
    path = Path(path)
    header = _FRAME_HEADER.pack(
        FRAME_TRACK_MAGIC, FORMAT_VERSION, track.width, track.height, track.fps, track.frame_count
    )
    # (n, h, w, 3) -> per-frame H, S, V planes.
    planes = np.ascontiguousarray(track.frames.transpose(0, 3, 1, 2))
    with open(path, "wb") as f:
        f.write(header)
        f.write(planes.tobytes())


def load_frame_track(path: Path | str, vid: str | None = None) -> FrameTrack:
    """Read a VMRF file; ``vid`` defaults to the file stem."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"frame track not found: {path}")
    blob = path.read_bytes()
    if len(blob) < _FRAME_HEADER.size or blob[:4] != FRAME_TRACK_MAGIC:
        raise FormatError(f"{path}: bad magic, not a frame-track file")
    magic, version, width, height, fps, frame_count = _FRAME_HEADER.unpack_from(blob)
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported frame-track version {version}")
    payload = blob[_FRAME_HEADER.size :]
    _read_exact(path, frame_count * 3 * width * height, payload, "frame payload")
    planes = np.frombuffer(payload, dtype=np.uint8).reshape(frame_count, 3, height, width)
    frames = np.ascontiguousarray(planes.transpose(0, 2, 3, 1))
    try:
        return FrameTrack(vid=vid if vid is not None else path.stem, fps=fps, frames=frames)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


def save_embedding_track(track: EmbeddingTrack, path: Path | str) -> None:
    """Write an embedding track in the VMRE layout."""
    path = Path(path)
    count, dim = track.vectors.shape
    records = np.empty((count, 1 + dim), dtype="<f4")
    records[:, 0] = track.timestamps
    records[:, 1:] = track.vectors
    with open(path, "wb") as f:
        f.write(_EMBED_HEADER.pack(EMBEDDING_TRACK_MAGIC, FORMAT_VERSION, dim, count))
        f.write(records.tobytes())


def load_embedding_track(path: Path | str, vid: str | None = None) -> EmbeddingTrack:
    """Read a VMRE file; ``vid`` defaults to the file stem."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"embedding track not found: {path}")
    blob = path.read_bytes()
    if len(blob) < _EMBED_HEADER.size or blob[:4] != EMBEDDING_TRACK_MAGIC:
        raise FormatError(f"{path}: bad magic, not an embedding-track file")
    magic, version, dim, count = _EMBED_HEADER.unpack_from(blob)
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported embedding-track version {version}")
    payload = blob[_EMBED_HEADER.size :]
    _read_exact(path, count * (1 + dim) * 4, payload, "embedding payload")
    records = np.frombuffer(payload, dtype="<f4").reshape(count, 1 + dim)
    try:
        return EmbeddingTrack(
            vid=vid if vid is not None else path.stem,
            timestamps=records[:, 0].astype(np.float64),
            vectors=np.ascontiguousarray(records[:, 1:]),
        )
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


# ---------------------------------------------------------------------------
# JSONL files
# ---------------------------------------------------------------------------


def _jsonl_lines(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: invalid JSON: {e}") from e
            if not isinstance(obj, dict):
                raise DataError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _field(path: Path, lineno: int, obj: dict, name: str, types: type | tuple) -> object:
    if name not in obj:
        raise DataError(f"{path}:{lineno}: missing field {name!r}")
    value = obj[name]
    if not isinstance(value, types) or isinstance(value, bool):
        raise DataError(f"{path}:{lineno}: field {name!r} has wrong type {type(value).__name__}")
    return value


def load_dataset(path: Path | str) -> list[QueryRecord]:
    """Parse a dataset JSONL file into query records.

    Windows that overrun the stated duration by at most half a second
    are clamped to it; inverted or further out-of-range windows are
    rejected with their line number.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset not found: {path}")
    records = []
    seen: set[int] = set()
    for lineno, obj in _jsonl_lines(path):
        qid = _field(path, lineno, obj, "qid", int)
        query = _field(path, lineno, obj, "query", str)
        vid = _field(path, lineno, obj, "vid", str)
        duration = float(_field(path, lineno, obj, "duration", (int, float)))
        raw_windows = _field(path, lineno, obj, "relevant_windows", list)
        if qid in seen:
            raise DataError(f"{path}:{lineno}: duplicate qid {qid}")
        seen.add(qid)
        if not raw_windows:
            raise DataError(f"{path}:{lineno}: relevant_windows must be non-empty")
        windows = []
        for w in raw_windows:
            if not (isinstance(w, list) and len(w) == 2):
                raise DataError(f"{path}:{lineno}: each relevant_window must be a [start, end] pair")
            start, end = float(w[0]), float(w[1])
            if start >= end:
                raise DataError(f"{path}:{lineno}: inverted window [{start}, {end}]")
            if end > duration + GT_END_SLACK_S:
                raise DataError(
                    f"{path}:{lineno}: window [{start}, {end}] overruns duration {duration}"
                )
            windows.append(TimeInterval(start, min(end, duration)))
        try:
            records.append(
                QueryRecord(
                    qid=qid, vid=vid, query_text=query, duration_s=duration,
                    gt_windows=tuple(windows),
                )
            )
        except ValueError as e:
            raise DataError(f"{path}:{lineno}: {e}") from e
    if not records:
        raise DataError(f"{path}: dataset is empty")
    return records


def write_predictions(preds: Iterable[PredictionRecord], path: Path | str) -> None:
    """Serialize ranked predictions, one line per qid."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for p in preds:
            windows = [[m.interval.start_s, m.interval.end_s, m.score] for m in p.moments]
            f.write(json.dumps({"qid": p.qid, "vid": p.vid, "pred_relevant_windows": windows}))
            f.write("\n")


def load_predictions(path: Path | str) -> list[PredictionRecord]:
    """Read a prediction JSONL file back into records."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"predictions not found: {path}")
    records = []
    for lineno, obj in _jsonl_lines(path):
        qid = _field(path, lineno, obj, "qid", int)
        vid = str(obj.get("vid", ""))
        raw = _field(path, lineno, obj, "pred_relevant_windows", list)
        moments = []
        for w in raw:
            if not (isinstance(w, list) and len(w) == 3):
                raise DataError(
                    f"{path}:{lineno}: each pred_relevant_window must be [start, end, score]"
                )
            try:
                moments.append(ScoredMoment(TimeInterval(float(w[0]), float(w[1])), float(w[2])))
            except ValueError as e:
                raise DataError(f"{path}:{lineno}: {e}") from e
        records.append(PredictionRecord(qid=qid, vid=vid, moments=tuple(moments)))
    return records


def write_query_embeddings(embeddings: Iterable[QueryEmbedding], path: Path | str) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for q in embeddings:
            f.write(
                json.dumps(
                    {"qid": q.qid, "encoder": q.encoder_tag, "vector": [float(x) for x in q.vector]}
                )
            )
            f.write("\n")


def load_query_embeddings(path: Path | str) -> dict[int, QueryEmbedding]:
    """Read query embeddings keyed by qid; all lines must share one encoder tag."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"query embeddings not found: {path}")
    out: dict[int, QueryEmbedding] = {}
    tag: str | None = None
    for lineno, obj in _jsonl_lines(path):
        qid = _field(path, lineno, obj, "qid", int)
        encoder = _field(path, lineno, obj, "encoder", str)
        vector = np.asarray(_field(path, lineno, obj, "vector", list), dtype=np.float64)
        if tag is None:
            tag = encoder
        elif encoder != tag:
            raise DataError(f"{path}:{lineno}: mixed encoder tags {tag!r} and {encoder!r}")
        if qid in out:
            raise DataError(f"{path}:{lineno}: duplicate qid {qid}")
        try:
            out[qid] = QueryEmbedding(qid=qid, vector=vector, encoder_tag=encoder)
        except ValueError as e:
            raise DataError(f"{path}:{lineno}: {e}") from e
    if not out:
        raise DataError(f"{path}: no query embeddings")
    return out


def write_captions(captions: Iterable[SegmentCaption], path: Path | str) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for c in captions:
            f.write(
                json.dumps(
                    {
                        "vid": c.vid,
                        "start": c.interval.start_s,
                        "end": c.interval.end_s,
                        "caption": c.caption_text,
                        "vector": [float(x) for x in c.caption_embedding],
                    }
                )
            )
            f.write("\n")


def load_captions(path: Path | str) -> list[SegmentCaption]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"captions not found: {path}")
    out = []
    for lineno, obj in _jsonl_lines(path):
        vid = _field(path, lineno, obj, "vid", str)
        start = float(_field(path, lineno, obj, "start", (int, float)))
        end = float(_field(path, lineno, obj, "end", (int, float)))
        caption = _field(path, lineno, obj, "caption", str)
        vector = np.asarray(_field(path, lineno, obj, "vector", list), dtype=np.float64)
        try:
            out.append(
                SegmentCaption(
                    vid=vid,
                    interval=TimeInterval(start, end),
                    caption_text=caption,
                    caption_embedding=vector,
                )
            )
        except ValueError as e:
            raise DataError(f"{path}:{lineno}: {e}") from e
    if not out:
        raise DataError(f"{path}: no captions")
    return out
