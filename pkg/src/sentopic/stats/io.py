"""CSV and JSON outputs for per-topic comparisons."""

from __future__ import annotations

import csv
import json
import math
from typing import Mapping, Sequence

from .compare import DEFAULT_SIZES, ComparisonRow


def sig6(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def result_text(row: ComparisonRow) -> str:
    if not row.test.significant:
        return "NS"
    return f"* {row.test.direction.value}"


def write_comparison_table(rows: Sequence[ComparisonRow], path, topic_names: Mapping[int, str]) -> None:
    """Compact table: topic, label, test result, mean d and its class."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic_id", "label", "result", "d_mean", "effect_class"])
        for r in rows:
            k = r.test.topic
            if r.effect is None or r.effect.d_mean is None:
                d_mean = cls = "NS" if not r.test.significant else ""
            else:
                d_mean, cls = sig6(r.effect.d_mean), r.effect.effect_class.value
            w.writerow([k, topic_names.get(k, f"T{k + 1}"), result_text(r), d_mean, cls])


def write_comparison_long(rows: Sequence[ComparisonRow], path, sizes: Sequence[int] = DEFAULT_SIZES) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic_id", "n_neg", "n_nonneg", "mean_neg", "mean_nonneg", "t", "df", "p", "p_adj",
                    "alpha_used", "direction", "d_full", "d_mean", *[f"d_{s}" for s in sizes], "note"])
        for r in rows:
            t, e = r.test, r.effect
            by_size = e.d_by_size if e else {}
            w.writerow([t.topic, t.n_neg, t.n_nonneg, sig6(t.mean_neg), sig6(t.mean_nonneg), sig6(t.t),
                        sig6(t.df), sig6(t.p), sig6(t.p_adj), sig6(t.alpha_used), t.direction.value,
                        sig6(e.d_full) if e else "", sig6(e.d_mean) if e else "",
                        *[sig6(by_size.get(s)) for s in sizes], t.note])


def _finite(x):
    if x is None or isinstance(x, str):
        return x
    x = float(x)
    return x if math.isfinite(x) else str(x)


def comparison_records(rows: Sequence[ComparisonRow]) -> list[dict]:
    out = []
    for r in rows:
        t, e = r.test, r.effect
        out.append({
            "topic": t.topic, "t": _finite(t.t), "df": _finite(t.df), "p": t.p, "p_adj": t.p_adj,
            "alpha_used": t.alpha_used, "direction": t.direction.value,
            "mean_neg": _finite(t.mean_neg), "mean_nonneg": _finite(t.mean_nonneg),
            "n_neg": t.n_neg, "n_nonneg": t.n_nonneg, "note": t.note,
            "effect": None if e is None else {
                "d_by_size": {str(s): d for s, d in e.d_by_size.items()},
                "d_mean": e.d_mean, "d_full": e.d_full,
                "effect_class": e.effect_class.value if e.effect_class else None,
                "skipped": {str(s): why for s, why in e.skipped.items()},
            },
        })
    return out


def write_comparison_json(rows: Sequence[ComparisonRow], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(comparison_records(rows), fh, indent=1)
        fh.write("\n")
