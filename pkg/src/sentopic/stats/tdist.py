"""Student t tail probabilities via the regularized incomplete beta function."""

import math

_TINY = 1e-300
_EPS = 1e-16
_MAX_ITER = 100_000


def _stirling_tail(x: float) -> float:
    """lgamma(x) minus its leading Stirling terms, for x >= 10."""
    x2 = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0) / x2) / x2) / x2) / x


def _lbeta(a: float, b: float) -> float:
    big, small = max(a, b), min(a, b)
    if big < 10.0:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    # lgamma(big) - lgamma(big + small) without cancellation
    diff = (-(big - 0.5) * math.log1p(small / big) - small * math.log(big + small) + small
            + _stirling_tail(big) - _stirling_tail(big + small))
    return math.lgamma(small) + diff


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def _betainc(a: float, b: float, x: float, y: float, log_x=None, log_y=None) -> float:
    # y == 1 - x, supplied separately so neither side loses digits
    if y == 0.0:
        return 1.0
    if x == 0.0:
        return 0.0
    if log_x is None:
        log_x = math.log(x)
    if log_y is None:
        log_y = math.log(y)
    log_front = a * log_x + b * log_y - _lbeta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, y) / b


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError("betainc needs 0 <= x <= 1")
    return _betainc(a, b, x, 1.0 - x)


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for T ~ Student t with ``df`` degrees of freedom.

    Relative error stays below 1e-10 for df up to about 1e6.
    """
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    t2 = t * t
    x = df / (df + t2)
    y = t2 / (df + t2)
    if t2 == 0.0:
        return 1.0
    r = t2 / df
    return min(1.0, _betainc(df / 2.0, 0.5, x, y, -math.log1p(r), math.log(r) - math.log1p(r)))


def t_cdf(t: float, df: float) -> float:
    p = t_two_sided_p(t, df) / 2.0
    return 1.0 - p if t > 0 else p
