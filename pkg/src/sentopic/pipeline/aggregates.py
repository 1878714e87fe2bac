"""Monthly sentiment rates and topic-weight summaries."""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ..errors import DataError
from ..sentiment import SentimentLabel


def largest_remainder(counts: Sequence[int], total_units: int = 10000) -> list[int]:
    """Split ``total_units`` proportionally to ``counts`` with integer parts.

    Units are hundredths of a percent, so the parts always sum to 100.00.
    Leftover units go to the largest fractional remainders, earlier entries
    first on ties.
    """
    n = sum(counts)
    if n == 0:
        return [0] * len(counts)
    exact = [Fraction(c * total_units, n) for c in counts]
    floors = [int(e) for e in exact]
    left = total_units - sum(floors)
    order = sorted(range(len(counts)), key=lambda i: (-(exact[i] - floors[i]), i))
    for i in order[:left]:
        floors[i] += 1
    return floors


@dataclass(frozen=True)
class TrendRow:
    month: str
    n: int
    n_negative: int

    @property
    def n_nonnegative(self) -> int:
        return self.n - self.n_negative

    @property
    def negative_rate(self) -> float:
        return 100.0 * self.n_negative / self.n

    @property
    def nonnegative_rate(self) -> float:
        return 100.0 * self.n_nonnegative / self.n

    def rounded(self) -> tuple[float, float]:
        neg, non = largest_remainder([self.n_negative, self.n_nonnegative])
        return neg / 100.0, non / 100.0


@dataclass(frozen=True)
class TrendReport:
    months: list[TrendRow]
    overall: TrendRow

    def rows(self) -> list[TrendRow]:
        return [*self.months, self.overall]


def month_key(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m")


def monthly_sentiment_rates(docs, labels: Mapping[str, SentimentLabel]) -> TrendReport:
    """Bucket labeled documents by UTC calendar month."""
    total = defaultdict(int)
    neg = defaultdict(int)
    for doc in docs:
        label = labels.get(doc.id)
        if label is None:
            raise DataError(f"document {doc.id!r} has no sentiment label", doc.id)
        key = month_key(doc.timestamp)
        total[key] += 1
        neg[key] += label is SentimentLabel.NEGATIVE
    if not total:
        raise DataError("no documents to summarize")
    months = [TrendRow(m, total[m], neg[m]) for m in sorted(total)]
    overall = TrendRow("overall", sum(total.values()), sum(neg.values()))
    return TrendReport(months, overall)


def write_trend(report: TrendReport, csv_path, json_path=None) -> None:
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["month", "n", "n_negative", "n_nonnegative", "negative_pct", "nonnegative_pct"])
        for r in report.rows():
            neg, non = r.rounded()
            w.writerow([r.month, r.n, r.n_negative, r.n_nonnegative, f"{neg:.2f}", f"{non:.2f}"])
    if json_path is not None:
        payload = [{"month": r.month, "n": r.n, "n_negative": r.n_negative,
                    "negative_rate": r.negative_rate, "nonnegative_rate": r.nonnegative_rate}
                   for r in report.rows()]
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")


def average_topic_weight(theta: np.ndarray, retained: Sequence[int]) -> dict[int, float]:
    theta = np.asarray(theta, dtype=float)
    means = theta.mean(axis=0)
    return {int(k): float(means[k]) for k in retained}


@dataclass(frozen=True)
class RankedTopic:
    topic: int
    weight: float
    label: str


def _rank(theta, mask, retained, names, k):
    means = theta[mask].mean(axis=0)
    order = sorted(retained, key=lambda t: (-means[t], t))
    return [RankedTopic(t, float(means[t]), names.get(t, f"T{t + 1}")) for t in order[:k]]


def top_k_topics_by_group(theta: np.ndarray, labels: Sequence[SentimentLabel], retained: Sequence[int],
                          k: int = 5, names: Mapping[int, str] | None = None):
    """Topics ranked by mean weight within each sentiment group."""
    theta = np.asarray(theta, dtype=float)
    is_neg = np.array([lab is SentimentLabel.NEGATIVE for lab in labels], dtype=bool)
    if not is_neg.any() or is_neg.all():
        raise DataError("top topics need both sentiment groups to be nonempty")
    names = names or {}
    return _rank(theta, is_neg, retained, names, k), _rank(theta, ~is_neg, retained, names, k)


def write_topic_weights(means: Mapping[int, float], path, names: Mapping[int, str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic_id", "label", "mean_weight"])
        for k, v in means.items():
            w.writerow([k, names.get(k, f"T{k + 1}"), repr(v)])


def write_top_topics(neg: Sequence[RankedTopic], non: Sequence[RankedTopic], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "negative_topic", "negative_label", "negative_weight",
                    "nonnegative_topic", "nonnegative_label", "nonnegative_weight"])
        for i in range(max(len(neg), len(non))):
            a = neg[i] if i < len(neg) else None
            b = non[i] if i < len(non) else None
            w.writerow([i + 1,
                        a.topic if a else "", a.label if a else "", f"{a.weight:.6g}" if a else "",
                        b.topic if b else "", b.label if b else "", f"{b.weight:.6g}" if b else ""])
