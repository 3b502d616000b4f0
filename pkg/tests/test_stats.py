"""Correlation statistics: exact small-sample oracles, closed-form
incomplete-beta identities, and monotonicity of the significance test."""

import math

import numpy as np
import pytest

from phonograde import correlation_stats, incomplete_beta, pearson_r, student_t_two_sided_p
from phonograde.stats import StatsError


def test_exact_four_point_oracle():
    # r between [1,2,3,4] and [1,2,4,3] is exactly 0.8; at df = 2 the t-test
    # p-value has the closed form 1 - t/sqrt(t^2 + 2) = 1 - r = 0.2
    stats = correlation_stats(np.array([1.0, 2, 3, 4]), np.array([1.0, 2, 4, 3]))
    assert stats.r == pytest.approx(0.8, abs=1e-15)
    assert stats.n == 4
    t = 0.8 * math.sqrt(2 / (1 - 0.64))
    closed_form = 1.0 - t / math.sqrt(t * t + 2.0)
    assert closed_form == pytest.approx(0.2, abs=1e-12)
    assert stats.p == pytest.approx(0.2, abs=1e-6)


def test_large_sample_p_value():
    # textbook example: r = 0.2 over 102 pairs is significant at ~0.044
    rng = np.random.default_rng(8)
    n = 102
    x = rng.normal(size=n)
    y = 0.2 * x + rng.normal(size=n)
    # construct data with r exactly 0.2 via orthogonalization
    y = y - np.polyval(np.polyfit(x, y, 1), x)
    y = y / np.std(y)
    xs = (x - x.mean()) / np.std(x)
    target = 0.2
    y = target * xs + math.sqrt(1 - target**2) * y
    stats = correlation_stats(xs, y)
    assert stats.r == pytest.approx(0.2, abs=1e-12)
    assert stats.p == pytest.approx(0.044, abs=0.002)


def test_pearson_r_basics():
    x = np.array([1.0, 2.0, 3.0, 5.0])
    assert pearson_r(x, 3.0 * x - 1.0) == pytest.approx(1.0)
    assert pearson_r(x, -x) == pytest.approx(-1.0)
    y = np.array([2.0, 1.0, 4.0, 3.0])
    r = pearson_r(x, y)
    # affine maps of either argument leave r unchanged
    assert pearson_r(2 * x + 7, y) == pytest.approx(r, abs=1e-12)
    assert pearson_r(x, 0.1 * y - 3) == pytest.approx(r, abs=1e-12)
    assert pearson_r(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)


def test_p_is_even_in_t_and_one_at_zero():
    assert student_t_two_sided_p(0.0, 10) == pytest.approx(1.0)
    for t in (0.5, 1.3, 2.7):
        assert student_t_two_sided_p(t, 7) == pytest.approx(
            student_t_two_sided_p(-t, 7), abs=1e-14)


def test_p_decreases_with_larger_t_and_more_data():
    ps = [student_t_two_sided_p(t, 12) for t in (0.1, 0.5, 1.0, 2.0, 4.0, 8.0)]
    assert all(a > b for a, b in zip(ps, ps[1:]))
    # same |r|, growing n: significance can only sharpen
    r = 0.4
    prev = 1.0
    for n in (5, 10, 20, 40, 80):
        t = r * math.sqrt((n - 2) / (1 - r * r))
        p = student_t_two_sided_p(t, n - 2)
        assert p < prev
        prev = p


def test_p_matches_normal_tail_at_high_df():
    # t with thousands of df is indistinguishable from a standard normal
    p = student_t_two_sided_p(1.96, 100000)
    assert p == pytest.approx(0.05, abs=5e-4)


def test_incomplete_beta_identities():
    for x in (0.0, 0.12, 0.5, 0.77, 1.0):
        assert incomplete_beta(1.0, 1.0, x) == pytest.approx(x, abs=1e-12)
    for a, b, x in [(2.0, 3.0, 0.3), (0.5, 5.0, 0.9), (7.0, 0.25, 0.6)]:
        total = incomplete_beta(a, b, x) + incomplete_beta(b, a, 1.0 - x)
        assert total == pytest.approx(1.0, abs=1e-10)
    # closed forms at unit parameters
    assert incomplete_beta(3.0, 1.0, 0.4) == pytest.approx(0.4 ** 3, rel=1e-10)
    assert incomplete_beta(1.0, 4.0, 0.2) == pytest.approx(1 - 0.8 ** 4, rel=1e-10)


def test_incomplete_beta_validation():
    with pytest.raises(StatsError, match="must be positive"):
        incomplete_beta(0.0, 1.0, 0.5)
    with pytest.raises(StatsError, match=r"x must be in \[0, 1\]"):
        incomplete_beta(1.0, 1.0, 1.5)
    with pytest.raises(StatsError, match="degrees of freedom"):
        student_t_two_sided_p(1.0, 0)


def test_degenerate_inputs_are_errors():
    x = np.array([1.0, 2.0, 3.0])
    with pytest.raises(StatsError, match="zero variance"):
        pearson_r(x, np.full(3, 5.0))
    with pytest.raises(StatsError, match="zero variance"):
        correlation_stats(np.full(3, 2.0), x)
    with pytest.raises(StatsError, match="paired 1-D arrays"):
        pearson_r(x, np.zeros((3, 1)))
    with pytest.raises(StatsError, match="need at least 2 paired values"):
        pearson_r(np.array([1.0]), np.array([2.0]))
    with pytest.raises(StatsError, match="need at least 3 paired values for a p-value"):
        correlation_stats(np.array([1.0, 2.0]), np.array([2.0, 1.0]))


def test_correlation_stats_agrees_with_scipy_convention():
    # cross-check the whole r -> t -> p chain against an independent
    # regularized-incomplete-beta implementation
    from scipy.special import betainc
    rng = np.random.default_rng(42)
    for n in (8, 25, 60):
        x = rng.normal(size=n)
        y = rng.normal(size=n) + 0.3 * x
        stats = correlation_stats(x, y)
        df = n - 2
        t = stats.r * math.sqrt(df / (1 - stats.r ** 2))
        expected = betainc(df / 2.0, 0.5, df / (df + t * t))
        assert stats.p == pytest.approx(expected, rel=1e-9)
