"""Correlation and significance machinery.

Pearson correlation plus the two-sided Student-t test on r, computed from
first principles: t = r * sqrt((n-2) / (1-r^2)) and
p = I_{nu/(nu+t^2)}(nu/2, 1/2), with the regularized incomplete beta
evaluated by a modified Lentz continued fraction. Self-contained on purpose —
the p-values underpin the selection gates, so their exact computation is part
of the method, not an implementation detail to swap out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EPS = 3e-12
_TINY = 1e-300
_MAX_ITER = 300


class StatsError(ValueError):
    """Statistic undefined or not computable for the given input."""


class DegenerateError(StatsError):
    """Zero variance in one of the inputs: correlation undefined."""


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
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
    raise StatsError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise StatsError(f"beta parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise StatsError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    # continued fraction converges fast only on one side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T_df| >= |t|) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise StatsError(f"degrees of freedom must be positive, got {df}")
    if not math.isfinite(t):
        return 0.0
    p = incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    return min(max(p, 0.0), 1.0)


def pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation; raises DegenerateError on zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError(f"paired 1-D arrays required, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise StatsError(f"need at least 2 paired values, got {x.size}")
    xm = x - x.mean()
    ym = y - y.mean()
    sx = math.sqrt(float(xm @ xm))
    sy = math.sqrt(float(ym @ ym))
    if sx == 0.0 or sy == 0.0:
        which = "both inputs" if sx == 0.0 and sy == 0.0 else \
            ("first input" if sx == 0.0 else "second input")
        raise DegenerateError(f"zero variance in {which}")
    r = float(xm @ ym) / (sx * sy)
    return min(max(r, -1.0), 1.0)


@dataclass(frozen=True)
class CorrelationStats:
    r: float
    n: int
    p: float


def correlation_stats(pred: np.ndarray, truth: np.ndarray) -> CorrelationStats:
    """r, n, and the two-sided t-test p-value for a prediction/truth pairing.

    Needs n >= 3 (the test has n - 2 degrees of freedom). |r| of exactly 1
    maps to p = 0.
    """
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    n = pred.size
    if n < 3:
        raise StatsError(f"need at least 3 paired values for a p-value, got {n}")
    r = pearson_r(pred, truth)
    if abs(r) >= 1.0:
        return CorrelationStats(r=r, n=n, p=0.0)
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return CorrelationStats(r=r, n=n, p=student_t_two_sided_p(t, n - 2))
