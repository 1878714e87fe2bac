"""Rule-based sentiment engines and agreement scoring against human coders."""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

NEGATIVE_THRESHOLD = -0.05


class SentimentLabel(str, enum.Enum):
    NEGATIVE = "NEG"
    NON_NEGATIVE = "NONNEG"

    @classmethod
    def parse(cls, value: str) -> "SentimentLabel":
        key = str(value).strip().upper().replace("-", "").replace("_", "")
        if key in ("NEG", "NEGATIVE"):
            return cls.NEGATIVE
        if key in ("NONNEG", "NONNEGATIVE"):
            return cls.NON_NEGATIVE
        raise DataError(f"unknown sentiment label {value!r}")


@dataclass(frozen=True)
class PolarityLexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self):
        overlap = self.positive & self.negative
        if overlap:
            raise ConfigError(f"polarity lists overlap: {sorted(overlap)[:5]}")
        if not (self.positive | self.negative):
            raise ConfigError("polarity lexicon is empty")


@dataclass(frozen=True)
class ValenceLexicon:
    valence: Mapping[str, float]
    boosters: Mapping[str, float] = field(default_factory=dict)
    negators: frozenset[str] = frozenset()

    def __post_init__(self):
        for term, v in list(self.valence.items()) + list(self.boosters.items()):
            if not math.isfinite(v):
                raise ConfigError(f"non-finite score for {term!r}")
        clash = self.negators & set(self.valence)
        if clash:
            raise ConfigError(f"negators also carry valence: {sorted(clash)[:5]}")


@dataclass(frozen=True)
class CompoundParams:
    """Constants of the compound-score rule family."""

    negation_scalar: float = -0.74
    booster_default: float = 0.293
    normalization: float = 15.0
    negation_window: int = 3
    threshold: float = NEGATIVE_THRESHOLD
    contraction_negation: bool = True


@dataclass(frozen=True)
class GoldRecord:
    id: str
    coder_a: SentimentLabel
    coder_b: SentimentLabel

    @property
    def unanimous(self) -> bool:
        return self.coder_a == self.coder_b


@dataclass(frozen=True)
class AgreementReport:
    engine: str
    n_gold_used: int
    n_matches: int
    agreement: float


def score_difference(tokens: Sequence[str], lex: PolarityLexicon) -> tuple[float, SentimentLabel]:
    """Positive minus negative hits as a percentage of tokens."""
    if not tokens:
        raise DataError("cannot score an empty token list")
    pos = sum(1 for t in tokens if t in lex.positive)
    neg = sum(1 for t in tokens if t in lex.negative)
    diff = 100.0 * (pos - neg) / len(tokens)
    label = SentimentLabel.NEGATIVE if diff < 0 else SentimentLabel.NON_NEGATIVE
    return diff, label


def _is_negator(token, lex, params):
    if token in lex.negators:
        return True
    return params.contraction_negation and token.endswith("n't")


def sum_valence(tokens: Sequence[str], lex: ValenceLexicon, params: CompoundParams = CompoundParams()) -> float:
    s = 0.0
    for i, tok in enumerate(tokens):
        v = lex.valence.get(tok)
        if v is None:
            continue
        if i > 0 and tokens[i - 1] in lex.boosters:
            inc = lex.boosters[tokens[i - 1]]
            # boosters intensify in the direction of the word they modify
            v = v + inc if v >= 0 else v - inc
        lo = max(0, i - params.negation_window)
        if any(_is_negator(t, lex, params) for t in tokens[lo:i]):
            v *= params.negation_scalar
        s += v
    return s


def normalize(s: float, alpha: float = 15.0) -> float:
    if s == 0:
        return 0.0
    return s / math.sqrt(s * s + alpha)


def label_compound(cs: float, threshold: float = NEGATIVE_THRESHOLD) -> SentimentLabel:
    return SentimentLabel.NEGATIVE if cs <= threshold else SentimentLabel.NON_NEGATIVE


def compound_score(tokens: Sequence[str], lex: ValenceLexicon,
                   params: CompoundParams = CompoundParams()) -> tuple[float, SentimentLabel]:
    if not tokens:
        raise DataError("cannot score an empty token list")
    cs = normalize(sum_valence(tokens, lex, params), params.normalization)
    # float rounding can reach +-1.0 for huge sums; the score is open-bounded
    cs = max(min(cs, math.nextafter(1.0, 0.0)), math.nextafter(-1.0, 0.0))
    return cs, label_compound(cs, params.threshold)


def _round2(x: Decimal) -> float:
    return float(x.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def evaluate_agreement(engine: str, predictions: Mapping[str, SentimentLabel],
                       gold: Iterable[GoldRecord]) -> AgreementReport:
    """Compare predictions with the records both coders agree on."""
    used = matches = 0
    for rec in gold:
        if rec.id not in predictions:
            raise DataError(f"no prediction for gold record {rec.id!r}", rec.id)
        if not rec.unanimous:
            continue
        used += 1
        matches += predictions[rec.id] == rec.coder_a
    if used == 0:
        raise DataError("no unanimous gold records to score against")
    pct = _round2(Decimal(100 * matches) / Decimal(used))
    return AgreementReport(engine, used, matches, pct)


def select_engine(reports: Sequence[AgreementReport]) -> str:
    """Highest agreement wins; ties go to the lexicographically smaller name."""
    if not reports:
        raise ConfigError("no agreement reports to choose from")
    return min(reports, key=lambda r: (-r.agreement, r.engine)).engine


# --- engines ----------------------------------------------------------------

class DifferenceEngine:
    name = "difference"

    def __init__(self, lexicon: PolarityLexicon):
        self.lexicon = lexicon

    def score(self, tokens):
        return score_difference(tokens, self.lexicon)


class CompoundEngine:
    name = "compound"

    def __init__(self, lexicon: ValenceLexicon, params: CompoundParams = CompoundParams()):
        self.lexicon = lexicon
        self.params = params

    def score(self, tokens):
        return compound_score(tokens, self.lexicon, self.params)


def classify(engine, docs) -> dict[str, tuple[float, SentimentLabel]]:
    out = {}
    for doc in docs:
        try:
            out[doc.id] = engine.score(doc.tokens)
        except DataError as exc:
            raise DataError(str(exc), doc.id) from exc
    return out


# --- file formats -----------------------------------------------------------

def _data_text(path, default_name):
    if path is None:
        return resources.files("sentopic.data").joinpath(default_name).read_text("utf-8")
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"lexicon file not found: {path}") from exc


def _term_lines(text):
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line.lower()


def load_polarity_lexicon(positive_path=None, negative_path=None) -> PolarityLexicon:
    pos = frozenset(_term_lines(_data_text(positive_path, "positive_words.txt")))
    neg = frozenset(_term_lines(_data_text(negative_path, "negative_words.txt")))
    return PolarityLexicon(pos, neg)


def load_valence_lexicon(path=None, booster_default: float = 0.293) -> ValenceLexicon:
    """Parse a sectioned CSV.

    Rows before any section header are ``term,valence``. A ``[boosters]``
    section holds ``term,increment`` (increment optional, defaulting to
    ``booster_default``) and a ``[negators]`` section holds bare terms.
    """
    text = _data_text(path, "valence_lexicon.csv")
    section = "valence"
    valence, boosters, negators = {}, {}, set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("valence", "boosters", "negators"):
                raise ConfigError(f"{path}:{lineno}: unknown section {section!r}")
            continue
        cells = next(csv.reader([line]))
        term = cells[0].strip().lower()
        if term in ("term",):
            continue
        try:
            if section == "valence":
                v = float(cells[1])
                if not -4.0 <= v <= 4.0:
                    raise ConfigError(f"{path}:{lineno}: valence {v} outside [-4, 4]")
                valence[term] = v
            elif section == "boosters":
                boosters[term] = float(cells[1]) if len(cells) > 1 and cells[1].strip() else booster_default
            else:
                negators.add(term)
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"{path}:{lineno}: malformed lexicon row {line!r}") from exc
    return ValenceLexicon(valence, boosters, frozenset(negators))


def read_gold(path) -> list[GoldRecord]:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except FileNotFoundError as exc:
        raise ConfigError(f"gold label file not found: {path}") from exc
    with fh:
        return [GoldRecord(r["id"], SentimentLabel.parse(r["coder_a"]), SentimentLabel.parse(r["coder_b"]))
                for r in csv.DictReader(fh)]


def write_predictions(path, engine: str, scored: Mapping[str, tuple[float, SentimentLabel]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "engine", "score", "label"])
        for doc_id, (score, label) in scored.items():
            w.writerow([doc_id, engine, repr(float(score)), label.value])


def read_predictions(path) -> dict[str, tuple[float, SentimentLabel]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return {r["id"]: (float(r["score"]), SentimentLabel.parse(r["label"])) for r in csv.DictReader(fh)}


def write_agreement(path, reports: Sequence[AgreementReport], selected: str | None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["engine", "n_gold_used", "n_matches", "agreement", "selected"])
        for r in reports:
            w.writerow([r.engine, r.n_gold_used, r.n_matches, f"{r.agreement:.2f}", r.engine == selected])
