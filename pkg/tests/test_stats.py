import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from sentopic.errors import DataError, NumericalError
from sentopic.sentiment import SentimentLabel
from sentopic.stats import (Direction, EffectClass, alpha_threshold, betainc, classify_effect, cohens_d,
                            compare_all_topics, fdr_adjust, stratified_effect_size, t_cdf, t_two_sided_p,
                            welch_t_test)
from sentopic.stats.io import write_comparison_json, write_comparison_long, write_comparison_table

NEG, NON = SentimentLabel.NEGATIVE, SentimentLabel.NON_NEGATIVE
PAIRS = json.loads((Path(__file__).parent / "fixtures" / "welch_pairs.json").read_text())

floats = st.floats(-1e3, 1e3, allow_nan=False)
samples = st.lists(floats, min_size=2, max_size=30)


@pytest.mark.parametrize("i", range(len(PAIRS)))
def test_welch_frozen_pairs(i):
    fx = PAIRS[i]
    r = welch_t_test(fx["x"], fx["y"])
    assert r.t == pytest.approx(fx["t"], rel=1e-9, abs=1e-12)
    assert r.df == pytest.approx(fx["df"], rel=1e-9)
    assert abs(r.p - fx["p_mp"]) <= 1e-6
    assert r.p == pytest.approx(fx["p_mp"], rel=1e-9)


def _t_density(x, df):
    logc = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(logc - (df + 1) / 2 * math.log1p(x * x / df))


@pytest.mark.parametrize("t, df", [(0.3, 1.0), (1.7, 2.5), (-2.2, 7.3), (4.0, 30.0), (0.05, 400.0),
                                   (2.5, 3000.0)])
def test_p_value_by_quadrature(t, df):
    tail, _ = integrate.quad(_t_density, abs(t), math.inf, args=(df,), epsabs=1e-14, epsrel=1e-12)
    assert t_two_sided_p(t, df) == pytest.approx(2 * tail, abs=1e-6, rel=1e-8)


@settings(max_examples=300)
@given(st.floats(0.01, 200), st.floats(0.01, 200), st.floats(0, 1).filter(lambda v: v == 0 or v > 1e-300))
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(float(special.betainc(a, b, x)), rel=1e-9, abs=1e-13)


@pytest.mark.parametrize("a, b, x", [(0.03125, 2.0, 5e-324), (0.5, 0.5, 1e-310), (300.0, 0.5, 0.999),
                                     (1e4, 0.5, 0.9999), (2.0, 3.0, 0.25)])
def test_betainc_matches_mpmath(a, b, x):
    # scipy itself drifts for subnormal x, so these points use arbitrary precision
    import mpmath
    with mpmath.workdps(40):
        ref = float(mpmath.betainc(a, b, 0, mpmath.mpf(x), regularized=True))
    assert betainc(a, b, x) == pytest.approx(ref, rel=1e-10)


@settings(max_examples=300)
@given(st.floats(-50, 50), st.floats(0.5, 1e5))
def test_t_distribution_matches_scipy(t, df):
    assert t_two_sided_p(t, df) == pytest.approx(float(2 * stats.t.sf(abs(t), df)), rel=1e-9, abs=1e-300)
    assert t_cdf(t, df) == pytest.approx(float(stats.t.cdf(t, df)), rel=1e-9, abs=1e-300)


def test_t_zero_and_extremes():
    assert t_two_sided_p(0.0, 5) == 1.0
    assert t_two_sided_p(math.inf, 5) == 0.0
    assert 0 < t_two_sided_p(40.0, 3) < 1e-4


@given(samples, samples)
def test_welch_antisymmetric(x, y):
    assume(np.var(x) > 1e-6 and np.var(y) > 1e-6)
    a, b = welch_t_test(x, y), welch_t_test(y, x)
    assert a.t == pytest.approx(-b.t, rel=1e-12)
    assert a.p == pytest.approx(b.p, rel=1e-12)
    assert 0 <= a.p <= 1


@given(samples, samples)
def test_welch_matches_scipy(x, y):
    assume(np.var(x) > 1e-6 and np.var(y) > 1e-6)
    for equal_var in (False, True):
        ours = welch_t_test(x, y, equal_var)
        ref = stats.ttest_ind(x, y, equal_var=equal_var)
        assert ours.t == pytest.approx(float(ref.statistic), rel=1e-9, abs=1e-9)
        assert ours.p == pytest.approx(float(ref.pvalue), rel=1e-6, abs=1e-12)


def test_welch_degenerate():
    assert welch_t_test([1, 1, 1], [1, 1]).p == 1.0
    r = welch_t_test([2, 2, 2], [1, 1])
    assert r.degenerate and r.t == math.inf and r.p == 0.0
    with pytest.raises(DataError):
        welch_t_test([1], [1, 2])


def test_alpha_threshold():
    a = alpha_threshold(185953)
    assert 0.001159 <= a <= 0.001160
    assert abs(a - 0.05 / math.sqrt(1859.53)) <= 1e-9
    assert alpha_threshold(185953, 3) == 0.001
    assert alpha_threshold(100) == 0.05
    assert alpha_threshold(400) == 0.025


@given(st.integers(1, 10**7), st.integers(1, 10**7))
def test_alpha_monotone(a, b):
    lo, hi = sorted((a, b))
    assert alpha_threshold(hi) <= alpha_threshold(lo)


FDR_FIXTURES = [
    ([0.01, 0.04, 0.03], [0.03, 0.04, 0.04]),
    ([0.05], [0.05]),
    ([0.01, 0.02, 0.03, 0.04], [0.04, 0.04, 0.04, 0.04]),
    # sorted 0.01 0.04 0.2 0.5 0.9 scaled by 5/rank: 0.05 0.1 1/3 0.625 0.9
    ([0.5, 0.01, 0.2, 0.04, 0.9], [0.625, 0.05, 1 / 3, 0.1, 0.9]),
    ([0.001, 0.001, 0.5, 1.0], [0.002, 0.002, 2 / 3, 1.0]),
]


@pytest.mark.parametrize("p, expected", FDR_FIXTURES)
def test_fdr_hand_values(p, expected):
    assert fdr_adjust(p).tolist() == expected


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40))
def test_fdr_matches_statsmodels(p):
    from statsmodels.stats.multitest import multipletests
    ref = multipletests(p, method="fdr_bh")[1]
    assert np.allclose(fdr_adjust(p), ref, rtol=1e-12, atol=0)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40))
def test_fdr_properties(p):
    q = fdr_adjust(p)
    assert (q >= np.asarray(p)).all() and (q <= 1).all()
    order = np.argsort(p, kind="mergesort")
    assert (np.diff(q[order]) >= 0).all()


def test_fdr_rejects_bad_input():
    with pytest.raises(DataError):
        fdr_adjust([0.5, 1.5])
    with pytest.raises(DataError):
        fdr_adjust([float("nan")])
    assert fdr_adjust([]).size == 0


def test_cohens_d():
    assert cohens_d([2, 4], [1, 3]) == pytest.approx(0.7071, abs=1e-4)
    with pytest.raises(NumericalError):
        cohens_d([1, 1], [1, 1])


@given(samples, samples, st.floats(-100, 100), st.floats(0.1, 10))
def test_cohens_d_invariances(x, y, shift, scale):
    assume(np.var(x) + np.var(y) > 1e-3)
    d = cohens_d(x, y)
    assert d >= 0
    assert cohens_d(y, x) == pytest.approx(d, rel=1e-9)
    xs = [v * scale + shift for v in x]
    ys = [v * scale + shift for v in y]
    assert cohens_d(xs, ys) == pytest.approx(d, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("d, cls", [
    (0.0, EffectClass.VERY_SMALL), (0.01, EffectClass.VERY_SMALL), (0.1999, EffectClass.VERY_SMALL),
    (0.2, EffectClass.SMALL), (0.5, EffectClass.MEDIUM), (0.7999, EffectClass.MEDIUM),
    (0.8, EffectClass.LARGE), (1.2, EffectClass.VERY_LARGE), (1.9999, EffectClass.VERY_LARGE),
    (2.0, EffectClass.HUGE), (9.0, EffectClass.HUGE),
])
def test_effect_classes(d, cls):
    assert classify_effect(d) is cls


def test_effect_class_rejects_bad():
    for bad in (-0.1, math.nan, math.inf):
        with pytest.raises(DataError):
            classify_effect(bad)


def test_stratified_full_draw_is_exact():
    rng = np.random.default_rng(1)
    x, y = rng.normal(0, 1, 40), rng.normal(0.5, 1, 40)
    e = stratified_effect_size(x, y, sizes=(40,), seed=3)
    assert e.d_by_size[40] == cohens_d(x, y) == e.d_full


def test_stratified_skips_and_reproduces():
    rng = np.random.default_rng(2)
    x, y = rng.normal(0, 1, 50), rng.normal(1, 1, 70)
    a = stratified_effect_size(x, y, seed=9)
    b = stratified_effect_size(x, y, seed=9)
    assert a == b
    assert sorted(a.d_by_size) == [8, 40]
    assert sorted(a.skipped) == [60, 100, 200, 500, 1000]
    assert a.d_mean == pytest.approx(np.mean([a.d_by_size[8], a.d_by_size[40]]))
    assert a.effect_class is classify_effect(a.d_mean)
    none = stratified_effect_size(x[:3], y[:3], sizes=(8,), seed=0)
    assert none.d_mean is None and none.effect_class is None


def _fixture(n=400, shift=0.15, seed=0):
    rng = np.random.default_rng(seed)
    labels = [NEG if i % 3 == 0 else NON for i in range(n)]
    theta = rng.dirichlet(np.ones(4), size=n)
    for i, lab in enumerate(labels):
        if lab is NEG:
            moved = theta[i, 3] * 0.8
            theta[i, 3] -= moved
            theta[i, 0] += moved
    return theta, labels


def test_compare_detects_shift():
    theta, labels = _fixture()
    rows = compare_all_topics(theta, labels, [0, 1, 2, 3], seed=1)
    by = {r.test.topic: r for r in rows}
    assert by[0].test.direction is Direction.NEG_GREATER
    assert by[3].test.direction is Direction.NONNEG_GREATER
    assert by[0].effect is not None and by[0].effect.d_mean > 0
    assert all(r.test.alpha_used == alpha_threshold(400) for r in rows)
    for r in rows:
        if not r.test.significant:
            assert r.effect is None


def test_compare_null_topics_ns():
    rng = np.random.default_rng(5)
    theta = rng.dirichlet(np.ones(5), size=300)
    labels = [NEG if rng.random() < 0.4 else NON for _ in range(300)]
    rows = compare_all_topics(theta, labels, list(range(5)))
    assert all(r.test.direction is Direction.NS for r in rows)


def test_compare_order_invariant():
    theta, labels = _fixture(seed=3)
    perm = np.random.default_rng(0).permutation(len(labels))
    a = compare_all_topics(theta, labels, [0, 1, 2, 3], seed=4)
    b = compare_all_topics(theta[perm], [labels[i] for i in perm], [0, 1, 2, 3], seed=4)
    assert a == b


def test_compare_one_group():
    theta, _ = _fixture(n=20)
    with pytest.warns(RuntimeWarning):
        rows = compare_all_topics(theta, [NON] * 20, [0, 1])
    assert all(r.test.direction is Direction.NS and r.test.note == "one group" for r in rows)


def test_compare_alpha_nesting():
    theta, labels = _fixture(n=400, shift=0.05, seed=8)
    small = {r.test.topic for r in compare_all_topics(theta, labels, [0, 1, 2, 3], n=400) if r.test.significant}
    big = {r.test.topic for r in compare_all_topics(theta, labels, [0, 1, 2, 3], n=10**7) if r.test.significant}
    assert big <= small


def test_compare_rounding_and_errors():
    theta, labels = _fixture()
    rows = compare_all_topics(theta, labels, [0], n=185953, round_alpha=3)
    assert rows[0].test.alpha_used == 0.001
    with pytest.raises(DataError):
        compare_all_topics(theta, labels[:-1], [0])
    with pytest.raises(DataError):
        compare_all_topics(theta, labels, [])


def test_writers(tmp_path):
    theta, labels = _fixture()
    rows = compare_all_topics(theta, labels, [0, 1, 2, 3])
    write_comparison_table(rows, tmp_path / "c.csv", {0: "mandate"})
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "topic_id,label,result,d_mean,effect_class"
    assert lines[1].startswith("0,mandate,* Neg > NonNeg,")
    write_comparison_long(rows, tmp_path / "l.csv")
    write_comparison_json(rows, tmp_path / "c.json")
    data = json.loads((tmp_path / "c.json").read_text())
    assert [d["topic"] for d in data] == [0, 1, 2, 3]
