import csv
import json
import random
import xml.etree.ElementTree as ET
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sentopic.cli import main
from sentopic.corpus import CleanDoc
from sentopic.errors import ConfigError, DataError
from sentopic.pipeline import PipelineConfig, load_config
from sentopic.pipeline.aggregates import (average_topic_weight, largest_remainder, monthly_sentiment_rates,
                                          top_k_topics_by_group, write_trend)
from sentopic.pipeline.charts import emit_charts
from sentopic.sentiment import SentimentLabel

NEG, NON = SentimentLabel.NEGATIVE, SentimentLabel.NON_NEGATIVE
SVG = "{http://www.w3.org/2000/svg}"


def _random_docs(seed, n=300, days=150):
    rng = random.Random(seed)
    start = datetime(2020, 11, 1, tzinfo=timezone.utc)
    docs, labels = [], {}
    for i in range(n):
        ts = start + timedelta(minutes=rng.randrange(60 * 24 * days))
        docs.append(CleanDoc(f"d{i}", ("x",) * 5, ts, "a"))
        labels[f"d{i}"] = NEG if rng.random() < 0.3 else NON
    return docs, labels


@pytest.mark.parametrize("seed", range(5))
def test_monthly_rates_brute_force(seed):
    docs, labels = _random_docs(seed)
    report = monthly_sentiment_rates(docs, labels)
    for row in report.months:
        members = [d for d in docs if d.timestamp.strftime("%Y-%m") == row.month]
        neg = sum(labels[d.id] is NEG for d in members)
        assert row.n == len(members)
        assert abs(row.negative_rate - 100 * neg / len(members)) <= 1e-12
        assert abs(row.nonnegative_rate - 100 * (len(members) - neg) / len(members)) <= 1e-12
        a, b = row.rounded()
        assert round(a + b, 2) == 100.00
        assert abs(a - row.negative_rate) <= 0.01 and abs(b - row.nonnegative_rate) <= 0.01
    assert sum(r.n for r in report.months) == report.overall.n == len(docs)


def test_month_buckets_are_utc():
    late = datetime(2021, 1, 31, 23, 30, tzinfo=timezone(timedelta(hours=-5)))  # Feb 1 in UTC
    doc = CleanDoc("x", ("a",), late, "u")
    assert monthly_sentiment_rates([doc], {"x": NEG}).months[0].month == "2021-02"


def test_unlabeled_document():
    docs, labels = _random_docs(0, 5)
    labels.pop("d3")
    with pytest.raises(DataError):
        monthly_sentiment_rates(docs, labels)


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=8).filter(lambda c: sum(c) > 0))
def test_largest_remainder(counts):
    parts = largest_remainder(counts)
    assert sum(parts) == 10000
    n = sum(counts)
    for c, p in zip(counts, parts):
        assert abs(p - 10000 * c / n) < 1


def test_trend_writer(tmp_path):
    docs, labels = _random_docs(1, 50)
    report = monthly_sentiment_rates(docs, labels)
    write_trend(report, tmp_path / "t.csv", tmp_path / "t.json")
    rows = list(csv.DictReader(open(tmp_path / "t.csv")))
    assert rows[-1]["month"] == "overall"
    for r in rows:
        assert f"{float(r['negative_pct']) + float(r['nonnegative_pct']):.2f}" == "100.00"
    full = json.loads((tmp_path / "t.json").read_text())
    assert full[0]["negative_rate"] == report.months[0].negative_rate


@pytest.mark.parametrize("seed", range(5))
def test_average_topic_weight_brute_force(seed):
    rng = np.random.default_rng(seed)
    theta = rng.dirichlet(np.ones(6), size=137)
    retained = [0, 2, 5]
    got = average_topic_weight(theta, retained)
    assert list(got) == retained
    for k in retained:
        assert abs(got[k] - sum(float(row[k]) for row in theta) / len(theta)) <= 1e-12


def test_top_k_planted():
    rng = np.random.default_rng(0)
    labels = [NEG if i % 2 else NON for i in range(200)]
    theta = rng.dirichlet(np.ones(5), size=200)
    theta[1::2, 4] += 2
    theta[0::2, 1] += 2
    theta /= theta.sum(axis=1, keepdims=True)
    neg, non = top_k_topics_by_group(theta, labels, range(5), k=3)
    assert neg[0].topic == 4 and non[0].topic == 1
    assert len(neg) == 3 and neg[0].weight >= neg[1].weight >= neg[2].weight
    with pytest.raises(DataError):
        top_k_topics_by_group(theta, [NEG] * 200, range(5))


def test_charts(tmp_path):
    docs, labels = _random_docs(2, days=120)  # Nov through Feb
    report = monthly_sentiment_rates(docs, labels)
    assert len(report.months) == 4
    means = {0: 0.5, 2: 0.3, 3: 0.2}
    paths = emit_charts(report, means, {0: "mandate"}, tmp_path)
    assert all(p.exists() for p in paths)
    root = ET.parse(tmp_path / "trend.svg").getroot()
    ids = {el.get("id") for el in root.iter() if el.get("id")}
    assert {"series-negative", "series-nonnegative"} <= ids
    assert len([i for i in ids if i.startswith("xtick_")]) == len(report.months)
    rows = list(csv.DictReader(open(tmp_path / "trend_chart.csv")))
    assert [r["month"] for r in rows] == [m.month for m in report.months]
    bars = ET.parse(tmp_path / "topic_weights.svg").getroot()
    bar_ids = {el.get("id") for el in bars.iter() if (el.get("id") or "").startswith("bar-topic-")}
    assert bar_ids == {"bar-topic-0", "bar-topic-2", "bar-topic-3"}


def test_chart_needs_months(tmp_path):
    from sentopic.pipeline.aggregates import TrendReport, TrendRow
    with pytest.raises(DataError):
        emit_charts(TrendReport([], TrendRow("overall", 1, 0)), {0: 1.0}, {}, tmp_path)


# --- config -----------------------------------------------------------------

def test_config_file(tmp_path):
    (tmp_path / "in.jsonl").write_text("")
    cfg_path = tmp_path / "run.ini"
    cfg_path.write_text("input = in.jsonl\ntopics = 7  # inline comment\nsizes = 8, 40\nequal_var = yes\n")
    cfg = load_config(cfg_path)
    assert cfg.input == str(tmp_path / "in.jsonl")
    assert (cfg.topics, cfg.sizes, cfg.equal_var) == (7, (8, 40), True)
    cfg.validate()
    cfg_path.write_text("[pipeline]\ntopicz = 3\n")
    with pytest.raises(ConfigError):
        load_config(cfg_path)
    cfg_path.write_text("topics = many\n")
    with pytest.raises(ConfigError):
        load_config(cfg_path)


@pytest.mark.parametrize("change", [dict(engine="vader"), dict(engine="auto"), dict(topics=0),
                                    dict(robustness_runs=1), dict(sizes=(1,)), dict(valence_lexicon="nope.csv")])
def test_config_validation(tmp_path, change):
    (tmp_path / "in.jsonl").write_text("")
    cfg = PipelineConfig(input=str(tmp_path / "in.jsonl"), **change)
    with pytest.raises(ConfigError):
        cfg.validate()


# --- CLI and stages ---------------------------------------------------------

def _golden_args(golden_dir, out, *extra):
    return ["--config", str(golden_dir / "golden.ini"), "--out-dir", str(out), "--iterations", "150", *extra]


def test_missing_lexicon_exits_before_work(golden_dir, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text(f"input = {golden_dir / 'posts.jsonl'}\nvalence_lexicon = {tmp_path / 'missing.csv'}\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out-dir", str(out)]) == 2
    assert not out.exists()


def test_malformed_input_exits_3(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "q1", "text": "hello", "created_at": "not a date", "author_id": "u"}\n')
    out = tmp_path / "out"
    assert main(["ingest", "--input", str(bad), "--out-dir", str(out)]) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "partial"
    assert manifest["error"]["record_id"] == "q1"


def test_stage_without_upstream_exits_3(tmp_path):
    assert main(["compare", "--out-dir", str(tmp_path)]) == 3


def test_numerical_failure_exits_4(golden_dir, tmp_path, monkeypatch):
    from sentopic.pipeline.runner import Pipeline

    def boom(self):
        raise ZeroDivisionError("float division by zero")

    monkeypatch.setattr(Pipeline, "ingest", boom)
    assert main(["run", *_golden_args(golden_dir, tmp_path)]) == 4


def test_unknown_engine_rejected_by_parser(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["sentiment", "--engine", "vader", "--out-dir", str(tmp_path)])
    assert exc.value.code == 2


def test_stage_by_stage_matches_run(golden_dir, tmp_path):
    full, staged = tmp_path / "full", tmp_path / "staged"
    assert main(["run", *_golden_args(golden_dir, full)]) == 0
    for stage in ("ingest", "sentiment", "fit", "label-template", "compare", "report"):
        assert main([stage, *_golden_args(golden_dir, staged)]) == 0, stage
    for name in ("corpus.jsonl", "sentiment.csv", "model/theta.csv", "comparison.csv", "trend.csv",
                 "topic_weights.csv", "top_topics.csv"):
        assert (full / name).read_bytes() == (staged / name).read_bytes(), name

    manifest = json.loads((full / "manifest.json").read_text())
    assert manifest["status"] == "complete"
    counts = manifest["counts"]
    assert counts["raw"] == 503 and counts["after_filter"] == counts["labeled"] == counts["in_statistics"]
    assert manifest["engine"] in ("compound", "difference")
    for rel, digest in manifest["outputs"].items():
        import hashlib
        assert hashlib.sha256((full / rel).read_bytes()).hexdigest() == digest, rel


def test_sweep_stage(golden_dir, tmp_path):
    args = _golden_args(golden_dir, tmp_path, "--sweep-range", "3", "6")
    assert main(["ingest", *args]) == 0
    assert main(["sweep", *args]) == 0
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert [int(r["topics"]) for r in rows] == [3, 4, 5, 6]
    assert sum(r["selected"] == "True" for r in rows) == 1


def test_topic_label_exclusion(golden_dir, tmp_path):
    labels = tmp_path / "labels.csv"
    labels.write_text("topic,label,q1,q2\n" + "".join(f"{k},L{k},true,{'false' if k == 1 else 'true'}\n"
                                                     for k in range(5)))
    out = tmp_path / "out"
    assert main(["run", *_golden_args(golden_dir, out), "--topic-labels", str(labels)]) == 0
    topics = [r["topic_id"] for r in csv.DictReader(open(out / "comparison.csv"))]
    assert topics == ["0", "2", "3", "4"]
    assert json.loads((out / "manifest.json").read_text())["retained_topics"] == [0, 2, 3, 4]


def test_all_topics_excluded_refuses_downstream(golden_dir, tmp_path):
    labels = tmp_path / "labels.csv"
    labels.write_text("topic,label,q1,q2\n" + "".join(f"{k},L{k},false,true\n" for k in range(5)))
    with pytest.warns(RuntimeWarning):
        code = main(["run", *_golden_args(golden_dir, tmp_path / "out"), "--topic-labels", str(labels)])
    assert code == 3
