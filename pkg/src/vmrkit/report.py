"""Report rendering: fixed-column tables, CSV, JSON, and figures.

Figures are rendered with the non-interactive Agg backend so report
generation works headless; every figure lands next to its delimited
output rather than on screen.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import DataError
from .metrics import BUCKETS, EvalReport

HEADLINE_COLUMNS = ("r1@0.5", "r1@0.7", "map@0.5", "map@0.75", "map_avg")
BUCKET_COLUMNS = tuple(f"map_avg[{b}]" for b in BUCKETS)


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.2f}"


def _report_values(report: EvalReport) -> list[float | None]:
    return list(report.headline()) + [report.bucketed.get(b) for b in BUCKETS]


def render_table(report: EvalReport) -> str:
    """Fixed-column text table of the headline and bucketed metrics."""
    columns = HEADLINE_COLUMNS + BUCKET_COLUMNS
    values = [_fmt(v) for v in _report_values(report)]
    widths = [max(len(c), len(v)) for c, v in zip(columns, values)]
    header = "  ".join(c.rjust(w) for c, w in zip(columns, widths))
    row = "  ".join(v.rjust(w) for v, w in zip(values, widths))
    meta = f"queries: {report.n_queries}  max_preds: {report.max_preds}"
    return "\n".join([header, row, meta])


def write_report_csv(report: EvalReport, path: Path | str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(list(HEADLINE_COLUMNS + BUCKET_COLUMNS) + ["n_queries", "max_preds"])
        writer.writerow(
            [("" if v is None else repr(v)) for v in _report_values(report)]
            + [report.n_queries, report.max_preds]
        )


def write_report_json(report: EvalReport, path: Path | str) -> None:
    payload = {
        "r1_at_0_5": report.r1_at_0_5,
        "r1_at_0_7": report.r1_at_0_7,
        "map_at_0_5": report.map_at_0_5,
        "map_at_0_75": report.map_at_0_75,
        "map_avg": report.map_avg,
        "bucketed": report.bucketed,
        "n_queries": report.n_queries,
        "max_preds": report.max_preds,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_report_json(path: Path | str) -> EvalReport:
    path = Path(path)
    if not path.exists():
        raise DataError(f"report not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        return EvalReport(
            r1_at_0_5=payload["r1_at_0_5"],
            r1_at_0_7=payload["r1_at_0_7"],
            map_at_0_5=payload["map_at_0_5"],
            map_at_0_75=payload["map_at_0_75"],
            map_avg=payload["map_avg"],
            bucketed=dict(payload.get("bucketed", {})),
            n_queries=payload.get("n_queries", 0),
            max_preds=payload.get("max_preds"),
        )
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise DataError(f"{path}: not a valid report file: {e}") from e


def render_report_figure(report: EvalReport, path: Path | str, title: str = "") -> None:
    """Bar chart of the headline metrics plus length-bucketed average mAP."""
    labels = list(HEADLINE_COLUMNS) + [f"{b}" for b in BUCKETS]
    values = [v if v is not None else 0.0 for v in _report_values(report)]
    colors = ["#4878a8"] * len(HEADLINE_COLUMNS) + ["#a86048"] * len(BUCKETS)

    fig, ax = plt.subplots(figsize=(8, 4))
    bars = ax.bar(range(len(values)), values, color=colors)
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("percent")
    ax.set_ylim(0, 100)
    for bar, value in zip(bars, values):
        ax.annotate(
            f"{value:.1f}",
            (bar.get_x() + bar.get_width() / 2, value),
            ha="center", va="bottom", fontsize=8,
        )
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# sweep output
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = ("param", "value") + HEADLINE_COLUMNS + ("n_segments",)


def write_sweep_csv(rows: Sequence, path: Path | str) -> None:
    """CSV with one evaluated configuration per row."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(
                [row.parameter, repr(row.value)]
                + [repr(v) for v in row.report.headline()]
                + [row.n_segments]
            )


def render_sweep_figure(rows: Sequence, path: Path | str) -> None:
    """Metric curves against the swept parameter value."""
    if not rows:
        raise ValueError("nothing to plot: sweep produced no rows")
    xs = [row.value for row in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, label in enumerate(HEADLINE_COLUMNS):
        ax.plot(xs, [row.report.headline()[i] for row in rows], marker="o", label=label)
    ax.set_xlabel(rows[0].parameter)
    ax.set_ylabel("percent")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
