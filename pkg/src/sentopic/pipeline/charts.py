"""SVG renderings of the monthly trend and the average topic weights.

Every chart is written next to a CSV holding exactly the plotted values.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..errors import DataError  # noqa: E402
from .aggregates import TrendReport  # noqa: E402

_SVG_META = {"Date": None, "Creator": None}


def _save(fig, path):
    with plt.rc_context({"svg.hashsalt": "sentopic", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def trend_chart(report: TrendReport, svg_path, csv_path) -> None:
    if not report.months:
        raise DataError("trend report has no months to plot")
    months = [r.month for r in report.months]
    neg = [r.rounded()[0] for r in report.months]
    non = [r.rounded()[1] for r in report.months]
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["month", "negative_pct", "nonnegative_pct"])
        for row in zip(months, neg, non):
            w.writerow([row[0], f"{row[1]:.2f}", f"{row[2]:.2f}"])

    fig, ax = plt.subplots(figsize=(6, 3.5))
    x = range(len(months))
    ax.plot(x, neg, marker="o", label="Negative", gid="series-negative")
    ax.plot(x, non, marker="s", label="Non-negative", gid="series-nonnegative")
    ax.set_xticks(list(x), months)
    ax.set_ylim(0, 100)
    ax.set_ylabel("% of documents")
    ax.legend()
    fig.tight_layout()
    _save(fig, svg_path)


def topic_weight_chart(means: Mapping[int, float], names: Mapping[int, str], svg_path, csv_path) -> None:
    if not means:
        raise DataError("no topic weights to plot")
    topics = list(means)
    labels = [names.get(k, f"T{k + 1}") for k in topics]
    values = [means[k] for k in topics]
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic_id", "label", "mean_weight"])
        for k, lab, v in zip(topics, labels, values):
            w.writerow([k, lab, repr(v)])

    fig, ax = plt.subplots(figsize=(6, 0.35 * len(topics) + 1.2))
    bars = ax.barh(range(len(topics)), values)
    for k, bar in zip(topics, bars):
        bar.set_gid(f"bar-topic-{k}")
    ax.set_yticks(range(len(topics)), labels)
    ax.invert_yaxis()
    ax.set_xlabel("average weight per document")
    fig.tight_layout()
    _save(fig, svg_path)


def emit_charts(report: TrendReport, means: Mapping[int, float], names: Mapping[int, str],
                out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trend_chart(report, out / "trend.svg", out / "trend_chart.csv")
    topic_weight_chart(means, names, out / "topic_weights.svg", out / "topic_weights_chart.csv")
    return [out / n for n in ("trend.svg", "trend_chart.csv", "topic_weights.svg", "topic_weights_chart.csv")]
