"""C_V topic coherence and coherence-driven choice of the topic count."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from ..corpus import CleanDoc, Vocabulary
from ..errors import ConfigError, DataError
from .lda import LdaConfig, fit_many, top_words

logger = logging.getLogger(__name__)

EPSILON = 1e-12


class WindowIndex:
    """Boolean sliding-window occurrence matrix over a reference corpus.

    A document no longer than ``window`` tokens is a single window; longer
    documents contribute ``len - window + 1`` windows stepped by one token.
    """

    def __init__(self, docs: Sequence[CleanDoc] | Sequence[Sequence[str]], window: int = 110):
        if window < 1:
            raise ConfigError("coherence window must be >= 1")
        if not docs:
            raise DataError("coherence reference corpus is empty")
        self.window = window
        self.term_index: dict[str, int] = {}
        rows, cols = [], []
        n_windows = 0
        for doc in docs:
            tokens = doc.tokens if isinstance(doc, CleanDoc) else doc
            ids = np.fromiter((self.term_index.setdefault(t, len(self.term_index)) for t in tokens),
                              dtype=np.int64, count=len(tokens))
            if len(ids) <= window:
                uniq = np.unique(ids)
                rows.append(np.full(uniq.shape, n_windows))
                cols.append(uniq)
                n_windows += 1
                continue
            # window s covers tokens [s, s + window)
            starts = np.arange(len(ids) - window + 1)
            for w in np.unique(ids):
                pos = np.flatnonzero(ids == w)
                lo = np.searchsorted(pos, starts)
                present = (lo < len(pos)) & (pos[np.minimum(lo, len(pos) - 1)] < starts + window)
                hit = starts[present]
                rows.append(hit + n_windows)
                cols.append(np.full(hit.shape, w))
            n_windows += len(starts)
        self.n_windows = n_windows
        data_rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
        data_cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
        self.matrix = sparse.csc_matrix(
            (np.ones(len(data_rows), dtype=np.float64), (data_rows, data_cols)),
            shape=(n_windows, len(self.term_index)))

    def probabilities(self, words: Sequence[str]):
        """Marginal and joint window probabilities for ``words``."""
        missing = [w for w in words if w not in self.term_index]
        if missing:
            raise DataError(f"top words absent from the reference corpus: {missing}")
        sub = self.matrix[:, [self.term_index[w] for w in words]]
        joint = (sub.T @ sub).toarray() / self.n_windows
        return np.diag(joint).copy(), joint

    def topic_coherence(self, words: Sequence[str], epsilon: float = EPSILON) -> float:
        if len(words) < 2:
            raise ConfigError("coherence needs at least two top words per topic")
        p, joint = self.probabilities(words)
        npmi = np.log((joint + epsilon) / np.outer(p, p)) / -np.log(joint + epsilon)
        total = npmi.sum(axis=0)
        norms = np.linalg.norm(npmi, axis=1) * np.linalg.norm(total)
        with np.errstate(invalid="ignore", divide="ignore"):
            cos = np.where(norms > 0, npmi @ total / norms, 0.0)
        return float(np.clip(cos, -1.0, 1.0).mean())

    def coherence(self, topics: Sequence[Sequence[str]], epsilon: float = EPSILON) -> "CoherenceResult":
        scores = [self.topic_coherence(t, epsilon) for t in topics]
        return CoherenceResult(scores, float(np.mean(scores)))


@dataclass(frozen=True)
class CoherenceResult:
    per_topic: list[float]
    mean: float


def coherence_cv(top_words: Sequence[Sequence[str]], reference_corpus, window: int = 110,
                 epsilon: float = EPSILON) -> CoherenceResult:
    return WindowIndex(reference_corpus, window).coherence(top_words, epsilon)


@dataclass
class CoherenceSweep:
    scores: dict[int, float]
    per_topic: dict[int, list[float]] = field(default_factory=dict)
    top_words: dict[int, list[list[str]]] = field(default_factory=dict)

    @property
    def selected(self) -> int:
        # ties go to the smaller topic count
        return min(self.scores, key=lambda t: (-self.scores[t], t))


def select_topic_count(docs: Sequence[CleanDoc], vocab: Vocabulary, cfg_template: LdaConfig,
                       t_range: tuple[int, int] = (2, 100), top_n: int = 10,
                       sweep_iterations: int | None = 500, reference_corpus=None,
                       window: int = 110, threads: int = 1) -> CoherenceSweep:
    """Fit one model per topic count and score each by mean C_V coherence."""
    lo, hi = t_range
    if not 1 <= lo <= hi <= len(vocab):
        raise ConfigError(f"topic range {t_range} outside [1, {len(vocab)}]")
    if top_n > len(vocab):
        raise ConfigError(f"top_n={top_n} exceeds vocabulary size {len(vocab)}")
    index = WindowIndex(reference_corpus if reference_corpus is not None else docs, window)
    iterations = sweep_iterations or cfg_template.iterations
    configs = [cfg_template.with_(topic_count=t, alpha=None, iterations=iterations)
               for t in range(lo, hi + 1)]
    models = fit_many(docs, vocab, configs, threads)
    sweep = CoherenceSweep({})
    for cfg, model in zip(configs, models):
        words = top_words(model, top_n)
        result = index.coherence(words)
        t = cfg.topic_count
        sweep.scores[t] = result.mean
        sweep.per_topic[t] = result.per_topic
        sweep.top_words[t] = words
        logger.info("T=%d mean C_V=%.4f", t, result.mean)
    return sweep
