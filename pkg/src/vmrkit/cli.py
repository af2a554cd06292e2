"""Command-line interface.

Verbs mirror the pipeline stages (shots, propose, score, watershed,
predict), the evaluation suite (eval, report), the oracular bounds
(oracle) and the hyperparameter sweep (sweep); ``extract`` delegates to
the feature extractor if it is installed.

Exit codes: 0 success, 1 usage error, 2 data error. The feature root can
also be supplied through the ``VMRKIT_FEATURE_ROOT`` environment
variable; a JSON config file may preset any pipeline flag, with explicit
flags winning.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

import click

from .core import PredictionRecord, ScoredMoment, TimeInterval
from .errors import DataError
from .formats import (
    load_captions,
    load_dataset,
    load_embedding_track,
    load_frame_track,
    load_predictions,
    load_query_embeddings,
    write_predictions,
)
from .matching import NORMALIZE_MODES, score_proposals
from .metrics import DEFAULT_MAX_PREDS, evaluate
from .oracle import oracle_merge, oracle_scores
from .pipeline import (
    DEFAULT_MERGE_THRESHOLD,
    DEFAULT_SHOT_THRESHOLD,
    DEFAULT_WATERSHED_SHOT_THRESHOLD,
    MATCHERS,
    PROPOSAL_METHODS,
    PipelineConfig,
    SweepRow,
    SweepSpec,
    evaluate_predictions,
    run_pipeline,
    sweep as run_sweep,
)
from .postprocess import simple_watershed
from .proposals import (
    DEFAULT_MIN_SHOT_LEN_S,
    DEFAULT_STRIDE_S,
    DEFAULT_WINDOW_S,
    detect_shots,
    sliding_windows,
)
from .report import (
    load_report_json,
    render_report_figure,
    render_sweep_figure,
    render_table,
    write_report_csv,
    write_report_json,
    write_sweep_csv,
)

FEATURE_ROOT_ENV = "VMRKIT_FEATURE_ROOT"

logger = logging.getLogger("vmrkit")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", is_flag=True, help="Log skipped queries and progress.")
def cli(verbose: bool) -> None:
    """Zero-shot video moment retrieval over precomputed features."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


# ---------------------------------------------------------------------------
# shared option plumbing
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {f.name for f in dataclass_fields(PipelineConfig)}


def _pipeline_options(fn):
    opts = [
        click.option("--method", "proposal_method", type=click.Choice(PROPOSAL_METHODS),
                     default="shotdetect", show_default=True, help="Proposal generator."),
        click.option("--matcher", type=click.Choice(MATCHERS), default="frames",
                     show_default=True, help="Scoring path."),
        click.option("--shot-threshold", type=float, default=None,
                     help=f"Cut threshold on the frame-change signal "
                          f"[default: {DEFAULT_WATERSHED_SHOT_THRESHOLD:g} with --merge-threshold, "
                          f"else {DEFAULT_SHOT_THRESHOLD:g}]."),
        click.option("--merge-threshold", type=float, default=None,
                     help="Watershed merge threshold in [0,1]; omit to skip merging."),
        click.option("--min-len", "min_len_s", type=float, default=DEFAULT_MIN_SHOT_LEN_S,
                     show_default=True, help="Minimum shot length in seconds."),
        click.option("--normalize", type=click.Choice(NORMALIZE_MODES), default="per_video",
                     show_default=True, help="Per-video score normalization."),
        click.option("--max-preds", type=int, default=DEFAULT_MAX_PREDS, show_default=True,
                     help="Predictions kept per query."),
        click.option("--window", "window_s", type=float, default=DEFAULT_WINDOW_S,
                     show_default=True, help="Sliding-window length in seconds."),
        click.option("--stride", "stride_s", type=float, default=DEFAULT_STRIDE_S,
                     show_default=True, help="Sliding-window stride in seconds."),
        click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
                     help="JSON file presetting any of these flags (flags win)."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _build_config(ctx: click.Context, params: dict, assume_watershed: bool = False) -> PipelineConfig:
    """Merge defaults, config file, and explicit flags into a PipelineConfig.

    Precedence: explicit flags > config file > built-in defaults. An
    unset shot threshold resolves to the tuned value for whichever mode
    (with or without watershed merging) the run is in.
    """
    values: dict = {}
    config_path = params.pop("config_path", None)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(f"config file {config_path}: {e}") from e
        unknown = set(loaded) - _CONFIG_KEYS
        if unknown:
            raise click.UsageError(f"config file {config_path}: unknown keys {sorted(unknown)}")
        values.update(loaded)

    for key, value in params.items():
        if key not in _CONFIG_KEYS:
            continue
        source = ctx.get_parameter_source(key)
        explicit = source is not None and source.name != "DEFAULT"
        if explicit:
            values[key] = value
        elif key not in values:
            values[key] = value

    if values.get("shot_threshold") is None:
        watershed = values.get("merge_threshold") is not None or assume_watershed
        values["shot_threshold"] = (
            DEFAULT_WATERSHED_SHOT_THRESHOLD if watershed else DEFAULT_SHOT_THRESHOLD
        )
    try:
        return PipelineConfig(**values)
    except ValueError as e:
        raise click.UsageError(str(e)) from e


def _feature_root_option(fn):
    return click.option(
        "--feature-root", envvar=FEATURE_ROOT_ENV, required=True,
        type=click.Path(path_type=Path),
        help=f"Directory of feature files (or ${FEATURE_ROOT_ENV}).",
    )(fn)


def _write_segments_csv(segments, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["start", "end"])
        for seg in segments:
            writer.writerow([repr(seg.start_s), repr(seg.end_s)])


def _read_segments_csv(path: Path) -> list[TimeInterval]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        return [TimeInterval(float(r["start"]), float(r["end"])) for r in rows]
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise DataError(f"segments file {path}: {e}") from e


def _write_scored_csv(moments, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["start", "end", "score"])
        for m in moments:
            writer.writerow([repr(m.interval.start_s), repr(m.interval.end_s), repr(m.score)])


def _read_scored_csv(path: Path) -> list[ScoredMoment]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        return [
            ScoredMoment(TimeInterval(float(r["start"]), float(r["end"])), float(r["score"]))
            for r in rows
        ]
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise DataError(f"scored-moments file {path}: {e}") from e


def _echo_segments(segments) -> None:
    for seg in segments:
        click.echo(f"{seg.start_s:.3f}\t{seg.end_s:.3f}")


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


@cli.command()
@click.option("--track", "track_path", required=True, type=click.Path(path_type=Path),
              help="Frame-track (.vmrf) file.")
@click.option("--shot-threshold", type=float, default=DEFAULT_SHOT_THRESHOLD, show_default=True)
@click.option("--min-len", "min_len_s", type=float, default=DEFAULT_MIN_SHOT_LEN_S, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write segments CSV.")
def shots(track_path: Path, shot_threshold: float, min_len_s: float, out: Path | None) -> None:
    """Detect shot boundaries in one frame track."""
    track = load_frame_track(track_path)
    segments = detect_shots(track, shot_threshold, min_len_s)
    if out:
        _write_segments_csv(segments, out)
    else:
        _echo_segments(segments)


@cli.command()
@click.option("--method", type=click.Choice(PROPOSAL_METHODS), default="shotdetect", show_default=True)
@click.option("--track", "track_path", type=click.Path(path_type=Path), default=None,
              help="Frame track, required for shotdetect.")
@click.option("--duration", type=float, default=None, help="Video length, required for slidingwindow.")
@click.option("--shot-threshold", type=float, default=DEFAULT_SHOT_THRESHOLD, show_default=True)
@click.option("--min-len", "min_len_s", type=float, default=DEFAULT_MIN_SHOT_LEN_S, show_default=True)
@click.option("--window", "window_s", type=float, default=DEFAULT_WINDOW_S, show_default=True)
@click.option("--stride", "stride_s", type=float, default=DEFAULT_STRIDE_S, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write segments CSV.")
def propose(method, track_path, duration, shot_threshold, min_len_s, window_s, stride_s, out):
    """Generate candidate moments for one video."""
    if method == "shotdetect":
        if track_path is None:
            raise click.UsageError("--track is required for shotdetect proposals")
        track = load_frame_track(track_path)
        segments = detect_shots(track, shot_threshold, min_len_s)
    else:
        if duration is None:
            raise click.UsageError("--duration is required for slidingwindow proposals")
        segments = sliding_windows(duration, window_s, stride_s)
    if out:
        _write_segments_csv(segments, out)
    else:
        _echo_segments(segments)


@cli.command()
@click.option("--segments", "segments_path", required=True, type=click.Path(path_type=Path),
              help="Segments CSV from 'propose'.")
@click.option("--embeddings", "embeddings_path", type=click.Path(path_type=Path), default=None,
              help="Embedding track (.vmre) for the frames matcher.")
@click.option("--captions", "captions_path_", type=click.Path(path_type=Path), default=None,
              help="Caption JSONL for the captions matcher.")
@click.option("--query-embeddings", "query_path", required=True, type=click.Path(path_type=Path))
@click.option("--qid", required=True, type=int, help="Query id to score against.")
@click.option("--normalize", type=click.Choice(NORMALIZE_MODES), default="per_video", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write scored CSV.")
def score(segments_path, embeddings_path, captions_path_, query_path, qid, normalize, out):
    """Score proposal segments against one query."""
    if (embeddings_path is None) == (captions_path_ is None):
        raise click.UsageError("exactly one of --embeddings / --captions is required")
    segments = _read_segments_csv(segments_path)
    queries = load_query_embeddings(query_path)
    if qid not in queries:
        raise DataError(f"qid {qid} not present in {query_path}")
    if embeddings_path is not None:
        features = load_embedding_track(embeddings_path)
    else:
        features = load_captions(captions_path_)
    moments = score_proposals(segments, features, queries[qid], normalize)
    if out:
        _write_scored_csv(moments, out)
    else:
        for m in moments:
            click.echo(f"{m.interval.start_s:.3f}\t{m.interval.end_s:.3f}\t{m.score:.6f}")


@cli.command()
@click.option("--scored", "scored_path", required=True, type=click.Path(path_type=Path),
              help="Scored CSV from 'score'.")
@click.option("--merge-threshold", type=float, required=True, help="Merge threshold in [0,1].")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write merged CSV.")
def watershed(scored_path: Path, merge_threshold: float, out: Path | None) -> None:
    """Merge consecutive high-scoring segments."""
    moments = _read_scored_csv(scored_path)
    merged = simple_watershed(moments, merge_threshold)
    if out:
        _write_scored_csv(merged, out)
    else:
        for m in merged:
            click.echo(f"{m.interval.start_s:.3f}\t{m.interval.end_s:.3f}\t{m.score:.6f}")


@cli.command()
@click.option("--dataset", "dataset_path", required=True, type=click.Path(path_type=Path))
@_feature_root_option
@_pipeline_options
@click.option("--out", required=True, type=click.Path(path_type=Path),
              help="Prediction JSONL to write.")
@click.pass_context
def predict(ctx, dataset_path: Path, feature_root: Path, out: Path, **params) -> None:
    """Run the full pipeline and write ranked predictions."""
    config = _build_config(ctx, params)
    dataset = load_dataset(dataset_path)
    preds = run_pipeline(config, dataset, feature_root)
    write_predictions(preds, out)
    click.echo(f"wrote {len(preds)} prediction records to {out}")


@cli.command("eval")
@click.option("--predictions", "predictions_path", required=True, type=click.Path(path_type=Path))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(path_type=Path))
@click.option("--filtered", is_flag=True,
              help="Use only queries that have predictions as denominators "
                   "(filtered-validation style); default counts every dataset query.")
@click.option("--max-preds", type=int, default=DEFAULT_MAX_PREDS, show_default=True)
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None)
@click.option("--json", "json_path", type=click.Path(path_type=Path), default=None)
@click.option("--figure", "figure_path", type=click.Path(path_type=Path), default=None)
def eval_cmd(predictions_path, dataset_path, filtered, max_preds, csv_path, json_path, figure_path):
    """Evaluate a prediction file against ground truth."""
    preds = load_predictions(predictions_path)
    dataset = load_dataset(dataset_path)
    if filtered:
        report = evaluate_predictions(preds, dataset, max_preds=max_preds)
    else:
        report = evaluate(preds, dataset, max_preds=max_preds)
    click.echo(render_table(report))
    if csv_path:
        write_report_csv(report, csv_path)
    if json_path:
        write_report_json(report, json_path)
    if figure_path:
        render_report_figure(report, figure_path, title="evaluation")


@cli.command()
@click.option("--dataset", "dataset_path", required=True, type=click.Path(path_type=Path))
@_feature_root_option
@click.option("--shot-threshold", type=float, default=DEFAULT_SHOT_THRESHOLD, show_default=True)
@click.option("--min-len", "min_len_s", type=float, default=DEFAULT_MIN_SHOT_LEN_S, show_default=True)
@click.option("--merge", is_flag=True, help="Apply oracle-guided merging (post-processing bound).")
@click.option("--max-preds", type=int, default=DEFAULT_MAX_PREDS, show_default=True)
@click.option("--predictions-out", type=click.Path(path_type=Path), default=None)
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None)
@click.option("--json", "json_path", type=click.Path(path_type=Path), default=None)
@click.option("--figure", "figure_path", type=click.Path(path_type=Path), default=None)
def oracle(dataset_path, feature_root, shot_threshold, min_len_s, merge, max_preds,
           predictions_out, csv_path, json_path, figure_path):
    """Score shot proposals with ground-truth IoU to bound the pipeline."""
    from .core import clamp_to_video
    from .formats import frame_track_path

    dataset = load_dataset(dataset_path)
    preds = []
    for query in dataset:
        try:
            track = load_frame_track(frame_track_path(feature_root, query.vid), vid=query.vid)
        except DataError as e:
            logger.warning("qid %d (vid %s): %s; skipping", query.qid, query.vid, e)
            continue
        segments = [
            clamp_to_video(seg, query.duration_s)
            for seg in detect_shots(track, shot_threshold, min_len_s)
            if seg.start_s < query.duration_s
        ]
        moments = oracle_merge(segments, query) if merge else oracle_scores(segments, query)
        record = PredictionRecord(qid=query.qid, vid=query.vid, moments=tuple(moments))
        preds.append(record.truncated(max_preds))
    if predictions_out:
        write_predictions(preds, predictions_out)
    report = evaluate_predictions(preds, dataset, max_preds=max_preds)
    click.echo(render_table(report))
    if csv_path:
        write_report_csv(report, csv_path)
    if json_path:
        write_report_json(report, json_path)
    if figure_path:
        bound = "merge bound" if merge else "score bound"
        render_report_figure(report, figure_path, title=f"oracular {bound}")


def _parse_grid(spec: str) -> tuple[float, ...]:
    spec = spec.strip()
    try:
        if ":" in spec:
            start_s, stop_s, step_s = spec.split(":")
            start, stop, step = float(start_s), float(stop_s), float(step_s)
            if step <= 0 or stop < start:
                raise ValueError
            values = []
            k = 0
            while (v := start + k * step) <= stop + 1e-9:
                values.append(round(v, 10))
                k += 1
            return tuple(values)
        return tuple(float(x) for x in spec.split(","))
    except ValueError:
        raise click.UsageError(
            f"bad grid {spec!r}: use comma-separated values or start:stop:step"
        ) from None


@cli.command()
@click.option("--param", "parameter", required=True,
              type=click.Choice(["shot_threshold", "merge_threshold"]),
              help="Which knob to sweep.")
@click.option("--grid", required=True, help="Values: '20,23,26' or '20:70:3' (inclusive).")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(path_type=Path))
@_feature_root_option
@_pipeline_options
@click.option("--out-csv", required=True, type=click.Path(path_type=Path))
@click.option("--figure", "figure_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
def sweep(ctx, parameter, grid, dataset_path, feature_root, out_csv, figure_path, **params):
    """Evaluate the pipeline across a one-parameter grid."""
    base = _build_config(ctx, params, assume_watershed=parameter == "merge_threshold")
    values = _parse_grid(grid)
    try:
        spec = SweepSpec(parameter=parameter, grid=values, base=base)
    except ValueError as e:
        raise click.UsageError(str(e)) from e
    dataset = load_dataset(dataset_path)
    rows = run_sweep(spec, dataset, feature_root)
    write_sweep_csv(rows, out_csv)
    if figure_path:
        render_sweep_figure(rows, figure_path)
    for row in rows:
        headline = "  ".join(f"{v:6.2f}" for v in row.report.headline())
        click.echo(f"{row.parameter}={row.value:g}  {headline}  segments={row.n_segments}")


@cli.command("report")
@click.option("--json", "json_path", required=True, type=click.Path(path_type=Path),
              help="Report JSON written by 'eval --json'.")
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None)
@click.option("--figure", "figure_path", type=click.Path(path_type=Path), default=None)
def report_cmd(json_path: Path, csv_path: Path | None, figure_path: Path | None) -> None:
    """Render a saved evaluation report as table, CSV, and figure."""
    report = load_report_json(json_path)
    click.echo(render_table(report))
    if csv_path:
        write_report_csv(report, csv_path)
    if figure_path:
        render_report_figure(report, figure_path, title="evaluation")


@cli.command(context_settings={"ignore_unknown_options": True})
@click.argument("args", nargs=-1, type=click.UNPROCESSED)
def extract(args: tuple[str, ...]) -> None:
    """Forward to the feature extractor CLI (separate package)."""
    import shutil
    import subprocess

    exe = shutil.which("vmr-extract")
    if exe is None:
        raise click.UsageError(
            "feature extractor not installed; install the 'vmr-extractor' package "
            "to decode videos and produce feature files"
        )
    raise SystemExit(subprocess.call([exe, *args]))


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as e:
        e.show(file=sys.stderr)
        return 1
    except click.ClickException as e:
        e.show(file=sys.stderr)
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except DataError as e:
        click.echo(f"data error: {e}", err=True)
        return 2
    except ValueError as e:
        click.echo(f"data error: {e}", err=True)
        return 2
    except SystemExit as e:
        return int(e.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
