"""Stage-by-stage orchestration with every intermediate persisted to disk.

Each stage reads only the artifacts earlier stages wrote into the output
directory, so any stage can be rerun on its own (for example after coders
fill in the topic label sheet).
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .. import __version__
from ..corpus import (build_vocabulary, clean_post, filter_corpus, load_stopwords, read_corpus, read_posts,
                      remove_stopwords, write_corpus, write_vocabulary)
from ..errors import ConfigError, DataError, NumericalError, SentopicError, StageError
from ..sentiment import (CompoundEngine, DifferenceEngine, classify, evaluate_agreement, load_polarity_lexicon,
                         load_valence_lexicon, read_gold, read_predictions, select_engine, write_agreement,
                         write_predictions)
from ..stats import compare_all_topics
from ..stats.io import write_comparison_json, write_comparison_long, write_comparison_table
from ..topics import (LdaConfig, apply_topic_labels, default_labels, fit_lda, load_model, read_theta,
                      read_topic_labels, robustness_check, save_model, select_topic_count, write_label_template,
                      write_top_words)
from .aggregates import (average_topic_weight, monthly_sentiment_rates, top_k_topics_by_group, write_top_topics,
                         write_topic_weights, write_trend)
from .charts import emit_charts
from .config import PipelineConfig

logger = logging.getLogger(__name__)

STAGES = ("ingest", "sentiment", "sweep", "fit", "label", "compare", "report")


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class Manifest:
    """JSON record of configuration, counts, decisions and output digests."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / "manifest.json"
        self.out_dir = out_dir
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
        else:
            self.data = {"status": "partial", "stages": {}, "outputs": {}}

    def start(self, cfg: PipelineConfig):
        self.data.update({
            "status": "partial",
            "config": cfg.snapshot(),
            "seed": cfg.seed,
            "started_at": _now(),
            "versions": {"sentopic": __version__, "numpy": np.__version__,
                         "python": platform.python_version()},
        })
        self.data.pop("error", None)
        self.save()

    def record_outputs(self, stage: str, paths):
        digests = {}
        for p in paths:
            p = Path(p)
            rel = str(p.relative_to(self.out_dir))
            digests[rel] = sha256_file(p)
        self.data["outputs"].update(digests)
        self.data["stages"][stage] = {"finished_at": _now(), "outputs": sorted(digests)}
        self.save()

    def fail(self, stage: str, exc: Exception):
        self.data["status"] = "partial"
        self.data["error"] = {"stage": stage, "message": str(exc),
                              "record_id": getattr(exc, "record_id", None)}
        self.save()

    def save(self):
        self.path.write_text(json.dumps(self.data, indent=1, sort_keys=True) + "\n", encoding="utf-8")


class Pipeline:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = Path(cfg.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = Manifest(self.out)

    # --- helpers ---------------------------------------------------------

    def _need(self, name: str) -> Path:
        p = self.out / name
        if not p.exists():
            raise DataError(f"missing upstream artifact {p}; run the earlier stage first")
        return p

    def _lda_config(self, topic_count: int) -> LdaConfig:
        c = self.cfg
        return LdaConfig(topic_count, c.alpha, c.beta, c.iterations, c.seed)

    def _lda_docs(self):
        docs = read_corpus(self._need("corpus.jsonl"))
        lda_docs = remove_stopwords(docs, load_stopwords(self.cfg.stopwords))
        return docs, lda_docs

    def _topic_names(self, topic_count: int):
        labels = read_topic_labels(self.cfg.topic_labels) if self.cfg.topic_labels else default_labels(topic_count)
        return labels

    def _selected_topics(self) -> int:
        if not self.cfg.sweep:
            return self.cfg.topics
        with open(self._need("sweep.csv"), newline="") as fh:
            for row in csv.DictReader(fh):
                if row["selected"] == "True":
                    return int(row["topics"])
        raise DataError("sweep.csv marks no selected topic count")

    # --- stages ----------------------------------------------------------

    def ingest(self):
        cfg = self.cfg
        raw_bytes = Path(cfg.input).read_bytes()
        posts = read_posts(cfg.input)
        cleaned = [clean_post(p, keep_apostrophes=cfg.keep_apostrophes) for p in posts]
        kept = filter_corpus(cleaned, min_tokens=cfg.min_tokens)
        if not kept:
            raise DataError("no documents survive cleaning and filtering")
        vocab = build_vocabulary(remove_stopwords(kept, load_stopwords(cfg.stopwords)))
        write_corpus(kept, self.out / "corpus.jsonl")
        write_vocabulary(vocab, self.out / "vocabulary.csv")
        self.manifest.data["input"] = {"path": str(cfg.input), "sha256": hashlib.sha256(raw_bytes).hexdigest()}
        self.manifest.data["counts"] = {"raw": len(posts), "after_filter": len(kept),
                                        "vocabulary": len(vocab), "tokens_after_stopwords": vocab.total_tokens}
        return [self.out / "corpus.jsonl", self.out / "vocabulary.csv"]

    def _engines(self):
        return {
            "compound": CompoundEngine(load_valence_lexicon(self.cfg.valence_lexicon)),
            "difference": DifferenceEngine(load_polarity_lexicon(self.cfg.positive_words, self.cfg.negative_words)),
        }

    def agree(self):
        """Score every built-in engine against the unanimous gold records."""
        if self.cfg.gold is None:
            raise ConfigError("agreement scoring needs a gold label file")
        docs = read_corpus(self._need("corpus.jsonl"))
        gold = read_gold(self.cfg.gold)
        known = {d.id for d in docs}
        dropped = [g.id for g in gold if g.id not in known]
        if dropped:
            logger.warning("%d gold records refer to filtered-out documents and are ignored", len(dropped))
        gold = [g for g in gold if g.id in known]
        if not gold:
            raise DataError("no gold records refer to documents in the filtered corpus")
        reports = []
        for name, engine in sorted(self._engines().items()):
            scored = classify(engine, docs)
            reports.append(evaluate_agreement(name, {k: v[1] for k, v in scored.items()}, gold))
        best = select_engine(reports)
        write_agreement(self.out / "agreement.csv", reports, best)
        self.manifest.data["agreement"] = {r.engine: r.agreement for r in reports}
        self.manifest.data["agreement_n_gold_used"] = reports[0].n_gold_used
        return best, [self.out / "agreement.csv"]

    def sentiment(self):
        cfg = self.cfg
        outputs = []
        engine_name = cfg.engine
        if cfg.gold is not None:
            best, outputs = self.agree()
            if engine_name == "auto":
                engine_name = best
        docs = read_corpus(self._need("corpus.jsonl"))
        engine = self._engines()[engine_name]
        scored = classify(engine, docs)
        write_predictions(self.out / "sentiment.csv", engine_name, scored)
        self.manifest.data["engine"] = engine_name
        self.manifest.data["sentiment_input"] = "cleaned tokens"
        return [*outputs, self.out / "sentiment.csv"]

    def sweep(self):
        cfg = self.cfg
        if not cfg.sweep:
            return []
        _, lda_docs = self._lda_docs()
        vocab = build_vocabulary(lda_docs)
        result = select_topic_count(lda_docs, vocab, self._lda_config(2), (cfg.sweep_min, cfg.sweep_max),
                                    cfg.top_n, cfg.sweep_iterations, window=cfg.coherence_window,
                                    threads=cfg.threads)
        with open(self.out / "sweep.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["topics", "mean_cv", "selected"])
            for t, s in result.scores.items():
                w.writerow([t, repr(s), t == result.selected])
        with open(self.out / "sweep_topics.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["topics", "topic", "cv", "top_words"])
            for t, scores in result.per_topic.items():
                for k, s in enumerate(scores):
                    w.writerow([t, k, repr(s), " ".join(result.top_words[t][k])])
        self.manifest.data["selected_topics"] = result.selected
        return [self.out / "sweep.csv", self.out / "sweep_topics.csv"]

    def fit(self):
        cfg = self.cfg
        _, lda_docs = self._lda_docs()
        vocab = build_vocabulary(lda_docs)
        T = self._selected_topics()
        lda_cfg = self._lda_config(T)
        model = fit_lda(lda_docs, vocab, lda_cfg)
        save_model(model, self.out / "model")
        write_top_words(model, self.out / "top_words.csv", min(cfg.top_n, len(vocab)))
        outputs = [self.out / "model" / n for n in ("phi.csv", "theta.csv", "assignments.csv", "loglik.csv")]
        outputs.append(self.out / "top_words.csv")
        self.manifest.data["topic_count"] = T
        self.manifest.data["final_log_likelihood"] = model.log_likelihood_trace[-1]
        if cfg.robustness_runs >= 2:
            rep = robustness_check(lda_docs, vocab, lda_cfg, cfg.robustness_runs, cfg.robustness_threshold,
                                   threads=cfg.threads)
            payload = {"seeds": rep.seeds, "log_likelihoods": rep.log_likelihoods, "mean": rep.mean,
                       "std": rep.std, "cv": rep.cv, "threshold": rep.threshold, "passed": rep.passed}
            (self.out / "robustness.json").write_text(json.dumps(payload, indent=1) + "\n")
            self.manifest.data["robustness"] = payload
        return outputs

    def label_template(self):
        model = load_model(self._need("model"))
        path = self.out / "topic_labels_template.csv"
        write_label_template(model, path, self.cfg.top_n)
        return [path]

    def _retained(self, T):
        labels = self._topic_names(T)
        retained = apply_topic_labels(T, labels)
        names = {k: (lab.label or f"T{k + 1}") for k, lab in labels.items()}
        return retained, names

    def _theta_and_labels(self):
        doc_ids, theta = read_theta(self._need("model/theta.csv"))
        preds = read_predictions(self._need("sentiment.csv"))
        missing = [i for i in doc_ids if i not in preds]
        if missing:
            raise DataError(f"document {missing[0]!r} has no sentiment label", missing[0])
        if len(preds) != len(doc_ids):
            raise DataError("sentiment and topic stages cover different document sets")
        return doc_ids, theta, [preds[i][1] for i in doc_ids]

    def compare(self):
        cfg = self.cfg
        doc_ids, theta, labels = self._theta_and_labels()
        retained, names = self._retained(theta.shape[1])
        self.manifest.data["retained_topics"] = retained
        if not retained:
            raise DataError("every topic was excluded by the label file; nothing to compare")
        rows = compare_all_topics(theta, labels, retained, n=len(doc_ids), seed=cfg.seed, sizes=cfg.sizes,
                                  repeats=cfg.repeats, equal_var=cfg.equal_var,
                                  round_alpha=3 if cfg.round_alpha else None)
        write_comparison_table(rows, self.out / "comparison.csv", names)
        write_comparison_long(rows, self.out / "comparison_long.csv", cfg.sizes)
        write_comparison_json(rows, self.out / "comparison.json")
        self.manifest.data["alpha_used"] = rows[0].test.alpha_used
        self.manifest.data["documents_compared"] = len(doc_ids)
        return [self.out / n for n in ("comparison.csv", "comparison_long.csv", "comparison.json")]

    def report(self):
        cfg = self.cfg
        docs = read_corpus(self._need("corpus.jsonl"))
        preds = read_predictions(self._need("sentiment.csv"))
        trend = monthly_sentiment_rates(docs, {k: v[1] for k, v in preds.items()})
        write_trend(trend, self.out / "trend.csv", self.out / "trend.json")
        doc_ids, theta, labels = self._theta_and_labels()
        retained, names = self._retained(theta.shape[1])
        if not retained:
            raise DataError("every topic was excluded by the label file; nothing to report")
        means = average_topic_weight(theta, retained)
        write_topic_weights(means, self.out / "topic_weights.csv", names)
        neg, non = top_k_topics_by_group(theta, labels, retained, cfg.top_k, names)
        write_top_topics(neg, non, self.out / "top_topics.csv")
        charts = emit_charts(trend, means, names, self.out / "charts")
        self.manifest.data["counts"] = {**self.manifest.data.get("counts", {}),
                                        "labeled": len(preds), "in_statistics": len(doc_ids)}
        return [self.out / n for n in ("trend.csv", "trend.json", "topic_weights.csv", "top_topics.csv")] + charts

    # --- driver ----------------------------------------------------------

    def run_stage(self, stage: str):
        fn = {"ingest": self.ingest, "sentiment": self.sentiment, "sweep": self.sweep, "fit": self.fit,
              "label": self.label_template, "compare": self.compare, "report": self.report,
              "agree": lambda: self.agree()[1]}[stage]
        logger.info("stage %s", stage)
        try:
            outputs = fn()
        except SentopicError as exc:
            self.manifest.fail(stage, exc)
            raise StageError(stage, exc) from exc
        except (ArithmeticError, FloatingPointError) as exc:
            err = NumericalError(str(exc))
            self.manifest.fail(stage, err)
            raise StageError(stage, err) from exc
        self.manifest.record_outputs(stage, outputs)
        return outputs

    def run(self):
        self.cfg.validate()
        self.manifest.start(self.cfg)
        for stage in STAGES:
            self.run_stage(stage)
        counts = self.manifest.data.get("counts", {})
        if not counts.get("after_filter") == counts.get("labeled") == counts.get("in_statistics"):
            raise StageError("report", DataError(f"document counts disagree across stages: {counts}"))
        self.manifest.data["status"] = "complete"
        self.manifest.data["finished_at"] = _now()
        self.manifest.save()
        return self.manifest.data


def run_pipeline(cfg: PipelineConfig) -> dict:
    return Pipeline(cfg).run()


def configure_logging(verbose: bool = False):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
