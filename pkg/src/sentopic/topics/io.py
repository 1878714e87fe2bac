"""Persistence of fitted models, top-word tables and human topic labels."""

from __future__ import annotations

import csv
import json
import logging
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from ..errors import ConfigError, DataError
from .lda import LdaConfig, TopicModel, recount, top_word_indices

logger = logging.getLogger(__name__)

_TRUE = {"1", "true", "t", "yes", "y"}
_FALSE = {"0", "false", "f", "no", "n"}


def _fmt(x: float) -> str:
    return repr(float(x))


def save_model(model: TopicModel, directory: str | Path) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "phi.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic", *model.terms])
        for k, row in enumerate(model.phi):
            w.writerow([k, *map(_fmt, row)])
    with open(out / "theta.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["doc_id", *range(model.topic_count)])
        for doc_id, row in zip(model.doc_ids, model.theta):
            w.writerow([doc_id, *map(_fmt, row)])
    with open(out / "assignments.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["doc", "word", "topic"])
        w.writerows(zip(model.doc_index.tolist(), model.words.tolist(), model.assignments.tolist()))
    with open(out / "loglik.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "log_likelihood"])
        w.writerows((i + 1, _fmt(v)) for i, v in enumerate(model.log_likelihood_trace))
    meta = {
        "config": asdict(model.config),
        "topic_count": model.topic_count,
        "vocabulary_size": len(model.terms),
        "documents": len(model.doc_ids),
        "tokens": int(model.words.shape[0]),
        "final_log_likelihood": model.log_likelihood_trace[-1] if model.log_likelihood_trace else None,
        "terms": model.terms,
        "doc_ids": model.doc_ids,
    }
    (out / "metadata.json").write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")


def load_model(directory: str | Path) -> TopicModel:
    src = Path(directory)
    try:
        meta = json.loads((src / "metadata.json").read_text(encoding="utf-8"))
        raw = np.loadtxt(src / "assignments.csv", delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    except FileNotFoundError as exc:
        raise DataError(f"model directory {src} is incomplete: {exc.filename}") from exc
    cfg = LdaConfig(**meta["config"])
    rows, words, z = raw[:, 0].copy(), raw[:, 1].copy(), raw[:, 2].copy()
    n_dk, n_kw, n_k = recount(words, rows, z, len(meta["doc_ids"]), cfg.topic_count, len(meta["terms"]))
    trace = []
    if (src / "loglik.csv").exists():
        with open(src / "loglik.csv", newline="") as fh:
            trace = [float(r["log_likelihood"]) for r in csv.DictReader(fh)]
    return TopicModel(cfg, meta["terms"], meta["doc_ids"], words, rows, z, n_dk, n_kw, n_k, trace)


def read_theta(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        ids, rows = [], []
        for r in reader:
            ids.append(r[0])
            rows.append([float(x) for x in r[1:]])
    return ids, np.asarray(rows, dtype=float)


def write_top_words(model: TopicModel, path, n: int = 10) -> None:
    phi = model.phi
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic", "rank", "term", "probability"])
        for k, idx in enumerate(top_word_indices(phi, n)):
            for rank, i in enumerate(idx, 1):
                w.writerow([k, rank, model.terms[i], _fmt(phi[k, i])])


# --- human topic labels -----------------------------------------------------

@dataclass(frozen=True)
class TopicLabel:
    topic: int
    label: str
    q1_meaningful: bool = True
    q2_relevant: bool = True

    @property
    def retained(self) -> bool:
        return self.q1_meaningful and self.q2_relevant


def _parse_bool(value: str, where: str) -> bool:
    v = str(value).strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ConfigError(f"{where}: cannot read {value!r} as yes/no")


def read_topic_labels(path) -> dict[int, TopicLabel]:
    labels = {}
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"topic label file not found: {path}") from exc
    with fh:
        for lineno, r in enumerate(csv.DictReader(fh), 2):
            where = f"{path}:{lineno}"
            try:
                k = int(r["topic"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"{where}: bad topic index") from exc
            labels[k] = TopicLabel(k, (r.get("label") or "").strip(),
                                   _parse_bool(r.get("q1", "true"), where),
                                   _parse_bool(r.get("q2", "true"), where))
    return labels


def write_label_template(model: TopicModel, path, n_words: int = 10) -> None:
    """Editable label sheet: coders fill in the label and the two yes/no answers."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic", "label", "q1", "q2", "top_words"])
        for k, idx in enumerate(top_word_indices(model.phi, min(n_words, len(model.terms)))):
            words = " ".join(model.terms[i] for i in idx)
            w.writerow([k, f"T{k + 1}", "true", "true", words])


def apply_topic_labels(topic_count: int, labels: Mapping[int, TopicLabel]) -> list[int]:
    """Indices of topics the coders judged meaningful and relevant."""
    missing = [k for k in range(topic_count) if k not in labels]
    if missing:
        raise ConfigError(f"no label for topics {missing}")
    retained = [k for k in range(topic_count) if labels[k].retained]
    if not retained:
        warnings.warn("every topic was excluded by the label file", RuntimeWarning, stacklevel=2)
        logger.warning("every topic was excluded by the label file")
    return retained


def default_labels(topic_count: int) -> dict[int, TopicLabel]:
    return {k: TopicLabel(k, f"T{k + 1}") for k in range(topic_count)}
