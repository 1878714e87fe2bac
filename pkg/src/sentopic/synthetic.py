"""Synthetic corpora with planted structure, for tests and the golden run.

Running ``python -m sentopic.synthetic`` regenerates the bundled fixtures
under ``sentopic/data``.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .corpus import CleanDoc

_EPOCH = datetime(2020, 11, 1, tzinfo=timezone.utc)


def planted_vocabulary(n_topics: int, words_per_topic: int) -> list[list[str]]:
    return [[f"t{k}w{j}" for j in range(words_per_topic)] for k in range(n_topics)]


def planted_corpus(n_docs: int = 200, n_topics: int = 2, words_per_topic: int = 10, doc_len: int = 20,
                   purity: float = 0.9, seed: int = 0) -> tuple[list[CleanDoc], list[int]]:
    """Documents each dominated by one topic with a disjoint vocabulary.

    A fraction ``purity`` of each document's tokens comes from its generating
    topic; the rest is drawn uniformly from the other topics' words. Returns
    the documents and their generating topic indices.
    """
    rng = np.random.default_rng(seed)
    vocab = planted_vocabulary(n_topics, words_per_topic)
    docs, truth = [], []
    for i in range(n_docs):
        g = i % n_topics
        tokens = []
        for _ in range(doc_len):
            if n_topics == 1 or rng.random() < purity:
                k = g
            else:
                k = int(rng.choice([t for t in range(n_topics) if t != g]))
            tokens.append(vocab[k][int(rng.integers(words_per_topic))])
        docs.append(CleanDoc(f"d{i:04d}", tuple(tokens), _EPOCH + timedelta(hours=i), f"u{i}"))
        truth.append(g)
    return docs, truth


# --- golden end-to-end corpus ------------------------------------------------

GOLDEN_TOPICS = {
    # topic 0 carries extra weight in negative posts, topic 4 in non-negative ones
    "mandate": "mandate law requirement government bill chip control freedom rights lawsuit exemption ban".split(),
    "rollout": "rollout distribution state plan governor federal supply shipment allocation doses million logistics".split(),
    "science": "mrna immune antibodies trial data pfizer moderna study efficacy results phase variant".split(),
    "schools": "teachers school students classroom priority district kids campus learning reopen union staff".split(),
    "sites": "appointment clinic pharmacy site county registration schedule walgreens drive appointments portal slot".split(),
}
_NEG_WORDS = "bad terrible scared hoax fraud dangerous worried disaster awful chaos".split()
_POS_WORDS = "good great grateful hopeful excited happy relieved thankful amazing excellent".split()
_FILLER = "the a is are this that and for to of it in on with about".split()


def _golden_text(rng, topic_words, weights, n_words, sentiment_words):
    names = list(topic_words)
    words = []
    for _ in range(n_words):
        k = rng.choice(len(names), p=weights)
        words.append(topic_words[names[k]][int(rng.integers(len(topic_words[names[k]])))])
        if rng.random() < 0.35:
            words.append(_FILLER[int(rng.integers(len(_FILLER)))])
    for w in sentiment_words:
        words.insert(int(rng.integers(len(words) + 1)), w)
    return words


def golden_posts(n_docs: int = 500, seed: int = 2021, shift: float = 0.6):
    """Raw posts plus the generating sentiment of each.

    Every post mixes five topics from a sparse Dirichlet draw. Negative posts
    move a share ``shift`` of the last topic's weight onto the first one;
    non-negative posts do the reverse. The three middle topics are identically
    distributed in both groups.
    """
    rng = np.random.default_rng(seed)
    posts, truth = [], {}
    n_months = 4
    for i in range(n_docs):
        month = i % n_months
        # negative share falls month by month
        p_neg = 0.45 - 0.08 * month
        negative = rng.random() < p_neg
        w = rng.dirichlet(np.full(5, 0.4))
        if negative:
            moved = shift * w[4]
            w[4] -= moved
            w[0] += moved
        else:
            moved = shift * w[0]
            w[0] -= moved
            w[4] += moved
        if negative:
            picks = list(rng.choice(_NEG_WORDS, size=int(rng.integers(1, 3))))
            if rng.random() < 0.2:
                picks = ["not", str(rng.choice(_POS_WORDS)), *picks]
        else:
            picks = list(rng.choice(_POS_WORDS, size=int(rng.integers(0, 3))))
        words = _golden_text(rng, GOLDEN_TOPICS, w, int(rng.integers(14, 26)), picks)
        text = " ".join(words)
        r = rng.random()
        if r < 0.15:
            text = f"#{text}"
        elif r < 0.3:
            text = f"@user{int(rng.integers(1000))} {text.capitalize()}!!"
        if rng.random() < 0.2:
            text += f" https://example.org/p/{i}"
        day = int(rng.integers(28))
        ts = datetime(2020 + (10 + month) // 12, (10 + month) % 12 + 1, 1 + day,
                      int(rng.integers(24)), int(rng.integers(60)), tzinfo=timezone.utc)
        pid = f"p{i:04d}"
        posts.append({"id": pid, "text": text, "created_at": ts.strftime("%Y-%m-%dT%H:%M:%SZ"),
                      "author_id": f"a{int(rng.integers(400)):03d}", "author_class": "individual"})
        truth[pid] = "NEG" if negative else "NONNEG"
    # exercise the filters: a same-author repost, a cross-author copy and a short post
    dup = dict(posts[3], id="p9000", created_at="2021-02-27T10:00:00Z")
    cross = dict(posts[5], id="p9001", author_id="a999")
    short = {"id": "p9002", "text": "vaccine now please @cdc", "created_at": "2020-12-05T12:00:00Z",
             "author_id": "a001", "author_class": "individual"}
    posts.extend([dup, cross, short])
    truth[cross["id"]] = truth[posts[5]["id"]]
    return posts, truth


def golden_gold_labels(truth: dict, n: int = 150, seed: int = 7):
    """Two simulated coders who agree on most records."""
    rng = np.random.default_rng(seed)
    ids = sorted(truth)
    picked = sorted(rng.choice(len(ids), size=min(n, len(ids)), replace=False))
    rows = []
    flip = {"NEG": "NONNEG", "NONNEG": "NEG"}
    for i in picked:
        pid = ids[i]
        a = truth[pid] if rng.random() > 0.08 else flip[truth[pid]]
        b = a if rng.random() > 0.2 else flip[a]
        rows.append((pid, a, b))
    return rows


def write_golden(directory: str | Path) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    posts, truth = golden_posts()
    with open(out / "posts.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for p in posts:
            fh.write(json.dumps(p) + "\n")
    with open(out / "gold.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "coder_a", "coder_b"])
        w.writerows(golden_gold_labels(truth))


def write_planted(path: str | Path, n_docs=200, n_topics=2, seed=0) -> None:
    docs, truth = planted_corpus(n_docs=n_docs, n_topics=n_topics, seed=seed)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d, g in zip(docs, truth):
            fh.write(json.dumps({"id": d.id, "created_at": d.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
                                 "author_id": d.author_id, "tokens": list(d.tokens), "topic": g}) + "\n")


def read_planted(path) -> tuple[list[CleanDoc], list[int]]:
    from .corpus import parse_timestamp
    docs, truth = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            o = json.loads(line)
            docs.append(CleanDoc(o["id"], tuple(o["tokens"]), parse_timestamp(o["created_at"]), o["author_id"]))
            truth.append(o["topic"])
    return docs, truth


if __name__ == "__main__":
    data = Path(__file__).parent / "data"
    write_planted(data / "planted_2topic.jsonl")
    write_golden(data / "golden")
