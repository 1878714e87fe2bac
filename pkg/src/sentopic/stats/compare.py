"""Per-topic comparison of negative and non-negative documents."""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DataError, NumericalError
from ..sentiment import SentimentLabel
from .tdist import t_two_sided_p

logger = logging.getLogger(__name__)

DEFAULT_SIZES = (8, 40, 60, 100, 200, 500, 1000)


class Direction(str, enum.Enum):
    NEG_GREATER = "Neg > NonNeg"
    NONNEG_GREATER = "Neg < NonNeg"
    NS = "NS"


class EffectClass(str, enum.Enum):
    VERY_SMALL = "Very Small"
    SMALL = "Small"
    MEDIUM = "Medium"
    LARGE = "Large"
    VERY_LARGE = "Very Large"
    HUGE = "Huge"


# lower bounds, checked from the top
_EFFECT_BOUNDS = (
    (2.0, EffectClass.HUGE),
    (1.2, EffectClass.VERY_LARGE),
    (0.8, EffectClass.LARGE),
    (0.5, EffectClass.MEDIUM),
    (0.2, EffectClass.SMALL),
)


@dataclass(frozen=True)
class TTest:
    t: float
    df: float
    p: float
    degenerate: bool = False


@dataclass(frozen=True)
class TestResult:
    topic: int
    t: float
    df: float
    p: float
    p_adj: float
    direction: Direction
    alpha_used: float
    mean_neg: float
    mean_nonneg: float
    n_neg: int
    n_nonneg: int
    note: str = ""

    @property
    def significant(self) -> bool:
        return self.direction is not Direction.NS


@dataclass(frozen=True)
class EffectSize:
    topic: int
    d_by_size: dict[int, float]
    d_mean: float | None
    d_full: float | None
    effect_class: EffectClass | None
    skipped: dict[int, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ComparisonRow:
    test: TestResult
    effect: EffectSize | None


def _moments(x):
    x = np.asarray(x, dtype=float)
    if x.shape[0] < 2:
        return x.shape[0], math.nan, math.nan
    return x.shape[0], float(x.mean()), float(x.var(ddof=1))


def welch_t_test(x: Sequence[float], y: Sequence[float], equal_var: bool = False) -> TTest:
    """Two-sided two-sample t-test, unequal variances unless ``equal_var``."""
    nx, mx, vx = _moments(x)
    ny, my, vy = _moments(y)
    if nx < 2 or ny < 2:
        raise DataError("t-test needs at least two observations per group")
    if vx == 0 and vy == 0:
        if mx == my:
            return TTest(0.0, float(nx + ny - 2), 1.0, degenerate=True)
        return TTest(math.copysign(math.inf, mx - my), float(nx + ny - 2), 0.0, degenerate=True)
    if equal_var:
        df = nx + ny - 2.0
        pooled = ((nx - 1) * vx + (ny - 1) * vy) / df
        se2 = pooled * (1.0 / nx + 1.0 / ny)
    else:
        gx, gy = vx / nx, vy / ny
        se2 = gx + gy
        df = se2 * se2 / (gx * gx / (nx - 1) + gy * gy / (ny - 1))
    t = (mx - my) / math.sqrt(se2)
    return TTest(t, df, t_two_sided_p(t, df))


def alpha_threshold(n: int, round_to: int | None = None) -> float:
    """Significance level scaled to the sample size, 0.05 / sqrt(n / 100)."""
    if n < 1:
        raise DataError("alpha threshold needs n >= 1")
    alpha = 0.05 / math.sqrt(n / 100.0)
    return round(alpha, round_to) if round_to is not None else alpha


def fdr_adjust(pvalues: Sequence[float]) -> np.ndarray:
    """Benjamini-Hochberg adjusted p-values, in input order."""
    p = np.asarray(pvalues, dtype=float)
    if p.ndim != 1:
        raise DataError("p-values must be a flat vector")
    if p.size == 0:
        return p.copy()
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise DataError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="mergesort")
    scaled = p[order] * m / np.arange(1, m + 1)
    adjusted = np.minimum(np.minimum.accumulate(scaled[::-1])[::-1], 1.0)
    out = np.empty(m)
    out[order] = adjusted
    return np.maximum(out, p)


def cohens_d(x: Sequence[float], y: Sequence[float]) -> float:
    """Absolute mean difference over the pooled standard deviation."""
    nx, mx, vx = _moments(x)
    ny, my, vy = _moments(y)
    if nx < 2 or ny < 2:
        raise DataError("Cohen's d needs at least two observations per group")
    pooled = ((nx - 1) * vx + (ny - 1) * vy) / (nx + ny - 2)
    if not pooled > 0:
        raise NumericalError("pooled variance is zero")
    return abs(mx - my) / math.sqrt(pooled)


def classify_effect(d: float) -> EffectClass:
    if not (math.isfinite(d) and d >= 0):
        raise DataError(f"effect size must be finite and non-negative, got {d}")
    for bound, cls in _EFFECT_BOUNDS:
        if d >= bound:
            return cls
    # anything under 0.2, including the below-scale range under 0.01
    return EffectClass.VERY_SMALL


def stratified_effect_size(x, y, sizes: Sequence[int] = DEFAULT_SIZES, seed=0,
                           repeats: int = 1, topic: int = -1) -> EffectSize:
    """Mean Cohen's d over random equal-size draws from each group.

    Each size draws without replacement from both groups; sizes larger than
    either group are skipped. Drawn indices are kept in ascending order so a
    draw of the whole group reproduces the full-sample d exactly.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rng = np.random.default_rng(seed)
    d_by_size, skipped = {}, {}
    for s in sizes:
        if s > len(x) or s > len(y):
            skipped[s] = "larger than a group"
            logger.warning("topic %s: stratum %d skipped, group sizes %d/%d", topic, s, len(x), len(y))
            continue
        ds = []
        for _ in range(repeats):
            xi = np.sort(rng.choice(len(x), size=s, replace=False))
            yi = np.sort(rng.choice(len(y), size=s, replace=False))
            try:
                ds.append(cohens_d(x[xi], y[yi]))
            except (NumericalError, DataError) as exc:
                logger.warning("topic %s: stratum %d draw skipped (%s)", topic, s, exc)
        if ds:
            d_by_size[s] = float(np.mean(ds))
        else:
            skipped[s] = "no usable draw"
    try:
        d_full = cohens_d(x, y)
    except (NumericalError, DataError):
        d_full = None
    if d_by_size:
        d_mean = float(np.mean(list(d_by_size.values())))
        cls = classify_effect(d_mean)
    else:
        d_mean, cls = None, None
    return EffectSize(topic, d_by_size, d_mean, d_full, cls, skipped)


def compare_all_topics(theta: np.ndarray, labels: Sequence[SentimentLabel], retained: Sequence[int],
                       n: int | None = None, seed: int = 0, sizes: Sequence[int] = DEFAULT_SIZES,
                       repeats: int = 1, equal_var: bool = False,
                       round_alpha: int | None = None) -> list[ComparisonRow]:
    """Test each retained topic's weight between the two sentiment groups.

    Both groups are sorted before any arithmetic, which makes the output
    independent of document order.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2 or theta.shape[0] != len(labels):
        raise DataError("theta rows and sentiment labels disagree in length")
    if not retained:
        raise DataError("no retained topics to compare")
    is_neg = np.array([lab is SentimentLabel.NEGATIVE for lab in labels], dtype=bool)
    alpha = alpha_threshold(n if n is not None else theta.shape[0], round_alpha)

    one_group = is_neg.sum() < 2 or (~is_neg).sum() < 2
    if one_group:
        warnings.warn("fewer than two documents in a sentiment group; every topic is NS",
                      RuntimeWarning, stacklevel=2)

    groups, tests = {}, {}
    for k in retained:
        neg = np.sort(theta[is_neg, k])
        nonneg = np.sort(theta[~is_neg, k])
        groups[k] = (neg, nonneg)
        tests[k] = TTest(0.0, 0.0, 1.0, degenerate=True) if one_group else welch_t_test(neg, nonneg, equal_var)
    p_adj = fdr_adjust([tests[k].p for k in retained])

    rows = []
    for k, q in zip(retained, p_adj):
        neg, nonneg = groups[k]
        tt = tests[k]
        m_neg = float(neg.mean()) if neg.size else math.nan
        m_non = float(nonneg.mean()) if nonneg.size else math.nan
        if not one_group and q <= alpha and m_neg != m_non:
            direction = Direction.NEG_GREATER if m_neg > m_non else Direction.NONNEG_GREATER
        else:
            direction = Direction.NS
        note = "one group" if one_group else ("degenerate variance" if tt.degenerate else "")
        result = TestResult(k, tt.t, tt.df, tt.p, float(q), direction, alpha, m_neg, m_non,
                            int(neg.size), int(nonneg.size), note)
        effect = None
        if direction is not Direction.NS:
            sub_seed = np.random.SeedSequence([int(seed), int(k)])
            effect = stratified_effect_size(neg, nonneg, sizes, sub_seed, repeats, topic=k)
        rows.append(ComparisonRow(result, effect))
    return rows
