"""Ingest, clean, filter and index short posts."""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError

logger = logging.getLogger(__name__)

MIN_TOKENS = 5
URL_PREFIXES = ("http://", "https://", "www.")
AUTHOR_CLASSES = ("individual", "organization", "unknown")
_APOSTROPHES = {"’": "'", "‘": "'", "ʼ": "'", "`": "'"}


@dataclass(frozen=True)
class RawPost:
    id: str
    text: str
    timestamp: datetime
    author_id: str
    author_class: str = "unknown"

    def __post_init__(self):
        if not self.id:
            raise DataError("post id must be nonempty")
        if self.author_class not in AUTHOR_CLASSES:
            raise DataError(f"unknown author_class {self.author_class!r}", self.id)


@dataclass(frozen=True)
class CleanDoc:
    id: str
    tokens: tuple[str, ...]
    timestamp: datetime
    author_id: str

    def with_tokens(self, tokens: Iterable[str]) -> "CleanDoc":
        return replace(self, tokens=tuple(tokens))


@dataclass
class Vocabulary:
    """Dense term <-> index mapping with corpus and document frequencies."""

    terms: list[str]
    freq: list[int]
    doc_freq: list[int]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise DataError("vocabulary terms must be unique")

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index

    def term(self, i: int) -> str:
        return self.terms[i]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.index[t] for t in tokens]

    @property
    def total_tokens(self) -> int:
        return sum(self.freq)


def parse_timestamp(value: str, record_id=None) -> datetime:
    """Parse an ISO-8601 instant; naive values are taken as UTC."""
    if not isinstance(value, str) or not value:
        raise DataError("missing created_at", record_id)
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise DataError(f"unparseable timestamp {value!r}", record_id) from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def clean_text(raw: str, keep_apostrophes: bool = True) -> str:
    """Strip URLs, @-mentions and punctuation, then lowercase.

    Other non-alphanumeric characters are deleted rather than replaced by a
    space, so ``#vaccine`` becomes ``vaccine`` and ``low-risk`` becomes
    ``lowrisk``. Apostrophes survive only inside words.
    """
    kept = []
    for piece in raw.split():
        low = piece.lower()
        if piece.startswith("@") or low.startswith(URL_PREFIXES):
            continue
        kept.append(low)

    out = []
    for piece in kept:
        chars = []
        for ch in piece:
            ch = _APOSTROPHES.get(ch, ch)
            if ch.isalnum() or (ch == "'" and keep_apostrophes):
                chars.append(ch)
        word = "".join(chars).strip("'")
        # str.lower can emit combining marks (e.g. dotted capital I)
        if word and word == word.lower():
            out.append(word)
        elif word:
            word = "".join(c for c in word.lower() if c.isalnum() or c == "'").strip("'")
            if word:
                out.append(word)
    return " ".join(out)


def clean_post(post: RawPost, keep_apostrophes: bool = True) -> CleanDoc:
    text = clean_text(post.text, keep_apostrophes=keep_apostrophes)
    return CleanDoc(post.id, tuple(text.split()), post.timestamp, post.author_id)


def filter_corpus(docs: Sequence[CleanDoc], min_tokens: int = MIN_TOKENS) -> list[CleanDoc]:
    """Drop same-author duplicates (earliest post wins) and short documents."""
    first = {}
    for pos, doc in enumerate(docs):
        key = (doc.author_id, doc.tokens)
        best = first.get(key)
        if best is None or doc.timestamp < docs[best].timestamp:
            first[key] = pos
    keep = set(first.values())
    return [d for i, d in enumerate(docs) if i in keep and len(d.tokens) >= min_tokens]


def tokenize(text: str, stopwords: frozenset[str] | set[str]) -> list[str]:
    return [t for t in text.split() if t not in stopwords]


def remove_stopwords(docs: Sequence[CleanDoc], stopwords) -> list[CleanDoc]:
    return [d.with_tokens(tokenize(" ".join(d.tokens), stopwords)) for d in docs]


def build_vocabulary(docs: Sequence[CleanDoc]) -> Vocabulary:
    """Index terms in order of first appearance."""
    if not docs:
        raise DataError("cannot build a vocabulary from an empty corpus")
    freq: Counter = Counter()
    doc_freq: Counter = Counter()
    order: dict[str, None] = {}
    for doc in docs:
        for tok in doc.tokens:
            order.setdefault(tok, None)
        freq.update(doc.tokens)
        doc_freq.update(set(doc.tokens))
    if not order:
        raise DataError("cannot build a vocabulary: corpus has no tokens")
    terms = list(order)
    return Vocabulary(terms, [freq[t] for t in terms], [doc_freq[t] for t in terms])


# --- file formats -----------------------------------------------------------

def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read a one-term-per-line list; ``#`` lines are comments."""
    if path is None:
        text = resources.files("sentopic.data").joinpath("stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


def read_posts(path: str | Path) -> list[RawPost]:
    posts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            rid = obj.get("id")
            if rid is None or str(rid) == "":
                raise DataError(f"{path}:{lineno}: missing id")
            rid = str(rid)
            text = obj.get("text")
            if not isinstance(text, str):
                raise DataError("missing text", rid)
            posts.append(RawPost(
                id=rid,
                text=text,
                timestamp=parse_timestamp(obj.get("created_at"), rid),
                author_id=str(obj.get("author_id", "")),
                author_class=obj.get("author_class") or "unknown",
            ))
    return posts


def write_corpus(docs: Iterable[CleanDoc], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in docs:
            fh.write(json.dumps({
                "id": d.id,
                "created_at": format_timestamp(d.timestamp),
                "author_id": d.author_id,
                "tokens": list(d.tokens),
            }, ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> list[CleanDoc]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                docs.append(CleanDoc(
                    obj["id"], tuple(obj["tokens"]),
                    parse_timestamp(obj["created_at"], obj["id"]), obj["author_id"],
                ))
    return docs


def write_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["term", "index", "freq", "doc_freq"])
        for i, term in enumerate(vocab.terms):
            w.writerow([term, i, vocab.freq[i], vocab.doc_freq[i]])


def read_vocabulary(path: str | Path) -> Vocabulary:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = sorted(csv.DictReader(fh), key=lambda r: int(r["index"]))
    if [int(r["index"]) for r in rows] != list(range(len(rows))):
        raise DataError(f"{path}: vocabulary indices are not dense")
    return Vocabulary([r["term"] for r in rows], [int(r["freq"]) for r in rows],
                      [int(r["doc_freq"]) for r in rows])
