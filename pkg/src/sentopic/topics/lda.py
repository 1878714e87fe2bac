"""Latent Dirichlet allocation fitted by collapsed Gibbs sampling."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from ..corpus import CleanDoc, Vocabulary
from ..errors import ConfigError, DataError, NumericalError
from . import _gibbs

logger = logging.getLogger(__name__)

# upper bound on buffered uniforms per chunk of sweeps
_UNIFORM_BUFFER = 1 << 22


@dataclass(frozen=True)
class LdaConfig:
    topic_count: int
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 4000
    seed: int = 0

    def __post_init__(self):
        if int(self.topic_count) < 1:
            raise ConfigError("topic_count must be >= 1")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 5.0 / self.topic_count)
        if not (self.alpha > 0 and self.beta > 0):
            raise ConfigError("alpha and beta must be positive")
        if int(self.iterations) < 1:
            raise ConfigError("iterations must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    def with_(self, **changes) -> "LdaConfig":
        values = asdict(self)
        if "topic_count" in changes and "alpha" not in changes:
            values["alpha"] = None
        values.update(changes)
        return LdaConfig(**values)


@dataclass
class TopicModel:
    config: LdaConfig
    terms: list[str]
    doc_ids: list[str]
    words: np.ndarray        # flat token -> word index
    doc_index: np.ndarray    # flat token -> document row
    assignments: np.ndarray  # flat token -> topic
    n_dk: np.ndarray
    n_kw: np.ndarray
    n_k: np.ndarray
    log_likelihood_trace: list[float] = field(default_factory=list)

    @property
    def topic_count(self) -> int:
        return self.n_k.shape[0]

    @property
    def n_d(self) -> np.ndarray:
        return self.n_dk.sum(axis=1)

    @property
    def phi(self) -> np.ndarray:
        """Topic-word probabilities, T x V."""
        V = self.n_kw.shape[1]
        b = self.config.beta
        return (self.n_kw + b) / (self.n_k[:, None] + V * b)

    @property
    def theta(self) -> np.ndarray:
        """Document-topic probabilities, D x T."""
        a = self.config.alpha
        return (self.n_dk + a) / (self.n_d[:, None] + self.topic_count * a)

    def doc_assignments(self, d: int) -> np.ndarray:
        return self.assignments[self.doc_index == d]


def _flatten(docs: Sequence[CleanDoc], vocab: Vocabulary):
    if not docs:
        raise DataError("cannot fit a topic model on an empty corpus")
    words, rows = [], []
    for d, doc in enumerate(docs):
        if not doc.tokens:
            raise DataError(f"document {doc.id!r} has no tokens after stop-word removal", doc.id)
        try:
            ids = vocab.encode(doc.tokens)
        except KeyError as exc:
            raise DataError(f"token {exc.args[0]!r} of document {doc.id!r} is not in the vocabulary",
                            doc.id) from exc
        words.extend(ids)
        rows.extend([d] * len(ids))
    return np.asarray(words, dtype=np.int64), np.asarray(rows, dtype=np.int64)


def recount(words, doc_index, assignments, D, T, V):
    """Rebuild the count tables from the token assignments."""
    n_dk = np.zeros((D, T), dtype=np.int64)
    n_kw = np.zeros((T, V), dtype=np.int64)
    np.add.at(n_dk, (doc_index, assignments), 1)
    np.add.at(n_kw, (assignments, words), 1)
    return n_dk, n_kw, n_kw.sum(axis=1)


def fit_lda(docs: Sequence[CleanDoc], vocab: Vocabulary, cfg: LdaConfig) -> TopicModel:
    words, rows = _flatten(docs, vocab)
    T, V, D, N = cfg.topic_count, len(vocab), len(docs), words.shape[0]
    rng = np.random.default_rng(cfg.seed)
    z = np.minimum((rng.random(N) * T).astype(np.int64), T - 1)
    n_dk, n_kw, n_k = recount(words, rows, z, D, T, V)
    n_d = n_dk.sum(axis=1)

    trace = np.empty(cfg.iterations)
    chunk = max(1, min(cfg.iterations, _UNIFORM_BUFFER // max(N, 1)))
    done = 0
    while done < cfg.iterations:
        step = min(chunk, cfg.iterations - done)
        uniforms = rng.random((step, N))
        _gibbs.run_chain(words, rows, z, n_dk, n_kw, n_k, n_d,
                         float(cfg.alpha), float(cfg.beta), uniforms, trace[done:done + step])
        done += step
    if not np.all(np.isfinite(trace)):
        raise NumericalError("log-likelihood became non-finite during sampling")

    return TopicModel(cfg, list(vocab.terms), [d.id for d in docs], words, rows, z,
                      n_dk, n_kw, n_k, trace.tolist())


def topic_conditional(model: TopicModel, i: int) -> np.ndarray:
    """Normalized full conditional of token ``i`` with its own count removed."""
    w, d, k = model.words[i], model.doc_index[i], model.assignments[i]
    n_dk = model.n_dk[d].astype(float)
    n_kw = model.n_kw[:, w].astype(float)
    n_k = model.n_k.astype(float)
    n_dk[k] -= 1
    n_kw[k] -= 1
    n_k[k] -= 1
    a, b, V = model.config.alpha, model.config.beta, model.n_kw.shape[1]
    p = (n_dk + a) * (n_kw + b) / (n_k + V * b)
    return p / p.sum()


def log_likelihood(model: TopicModel) -> float:
    """Joint log p(w, z) of the collapsed model, from the count tables."""
    a, b = model.config.alpha, model.config.beta
    T, V = model.n_kw.shape
    n_kw, n_k, n_dk, n_d = model.n_kw, model.n_k, model.n_dk, model.n_d
    word_part = (T * (gammaln(V * b) - V * gammaln(b))
                 + gammaln(n_kw + b).sum() - gammaln(n_k + V * b).sum())
    doc_part = (n_dk.shape[0] * (gammaln(T * a) - T * gammaln(a))
                + gammaln(n_dk + a).sum() - gammaln(n_d + T * a).sum())
    return float(word_part + doc_part)


def top_words(model: TopicModel, n: int = 10) -> list[list[str]]:
    """Highest-probability terms per topic; ties go to the lower vocabulary index."""
    return [[model.terms[i] for i in idx] for idx in top_word_indices(model.phi, n)]


def top_word_indices(phi: np.ndarray, n: int) -> list[np.ndarray]:
    V = phi.shape[1]
    if not 1 <= n <= V:
        raise ConfigError(f"top-word count {n} outside [1, {V}]")
    order = np.arange(V)
    return [np.lexsort((order, -row))[:n] for row in phi]


@dataclass(frozen=True)
class RobustnessReport:
    seeds: list[int]
    log_likelihoods: list[float]
    mean: float
    std: float
    cv: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.cv <= self.threshold


def fit_many(docs, vocab, configs: Sequence[LdaConfig], threads: int = 1) -> list[TopicModel]:
    """Fit independent chains, optionally on a thread pool (the kernel releases the GIL)."""
    if threads <= 1 or len(configs) <= 1:
        return [fit_lda(docs, vocab, c) for c in configs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: fit_lda(docs, vocab, c), configs))


def robustness_check(docs, vocab, cfg: LdaConfig, n_runs: int = 5, threshold: float = 0.01,
                     seeds: Sequence[int] | None = None, threads: int = 1) -> RobustnessReport:
    """Spread of the final log-likelihood over independently seeded chains."""
    if seeds is None:
        if n_runs < 2:
            raise ConfigError("robustness check needs at least two runs")
        seeds = [(cfg.seed + i) % 2**64 for i in range(n_runs)]
    elif len(seeds) < 2:
        raise ConfigError("robustness check needs at least two runs")
    models = fit_many(docs, vocab, [cfg.with_(seed=s) for s in seeds], threads)
    finals = np.array([m.log_likelihood_trace[-1] for m in models])
    mean = float(finals.mean())
    std = float(finals.std(ddof=1))
    cv = std / abs(mean) if mean != 0 else (0.0 if std == 0 else math.inf)
    return RobustnessReport(list(seeds), finals.tolist(), mean, std, cv, threshold)
