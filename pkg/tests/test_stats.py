import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from xlsent.analysis import (
    StatsError, cohens_d, comparison_table, magnitude_label, studentized_range_cdf, studentized_range_quantile,
    tukey_hsd,
)


def mc_quantile_interval(alpha, k, df, n=1_000_000, seed=0, z=2.5758):
    """99% distribution-free interval for the (1 - alpha) quantile from ``n`` simulated ranges."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, k))
    s = np.sqrt(rng.chisquare(df, n) / df)
    q = np.sort((x.max(axis=1) - x.min(axis=1)) / s)
    p = 1.0 - alpha
    half = z * math.sqrt(n * p * (1 - p))
    return q[int(math.floor(n * p - half))], q[int(math.ceil(n * p + half))]


def test_known_critical_value():
    assert studentized_range_quantile(0.05, 3, 9) == pytest.approx(3.948, abs=0.01)


@pytest.mark.parametrize("df", [5, 9, 30])
def test_two_group_identity_with_t(df):
    expected = math.sqrt(2) * sps.t.ppf(0.975, df)
    assert abs(studentized_range_quantile(0.05, 2, df) - expected) < 5e-3


@pytest.mark.parametrize("q, k, df", [(1.0, 2, 3), (3.5, 3, 9), (4.2, 5, 20), (2.0, 4, 1)])
def test_cdf_matches_scipy(q, k, df):
    assert studentized_range_cdf(q, k, df) == pytest.approx(sps.studentized_range.cdf(q, k, df), abs=1e-6)


@pytest.mark.parametrize("alpha, k, df", [(0.05, 3, 9), (0.06, 3, 9), (0.01, 4, 12)])
def test_inverse_consistency(alpha, k, df):
    q = studentized_range_quantile(alpha, k, df)
    assert abs(studentized_range_cdf(q, k, df) - (1 - alpha)) < 1e-4


def test_monte_carlo_oracle():
    q = studentized_range_quantile(0.05, 3, 9)
    lo, hi = mc_quantile_interval(0.05, 3, 9)
    assert lo <= q <= hi


def test_monotone_in_k_and_alpha():
    assert studentized_range_quantile(0.05, 3, 9) < studentized_range_quantile(0.05, 4, 9)
    assert studentized_range_quantile(0.10, 3, 9) < studentized_range_quantile(0.05, 3, 9)


def test_domain_errors():
    for args in [(0.0, 3, 9), (1.0, 3, 9), (0.05, 1, 9), (0.05, 3, 0), (0.05, 2.5, 9)]:
        with pytest.raises(StatsError):
            studentized_range_quantile(*args)
    # beyond the bisection bracket
    with pytest.raises(StatsError, match="beyond"):
        studentized_range_quantile(0.001, 6, 1)


def test_tukey_pairs_and_signs():
    groups = {"b": [1.0, 2.0, 3.0], "A": [2.0, 3.0, 4.0], "c": [10.0, 11.0, 12.0]}
    rows = tukey_hsd(groups, alpha=0.05)
    assert [(r.group1, r.group2) for r in rows] == [("A", "b"), ("A", "c"), ("b", "c")]
    assert rows[0].meandiff == pytest.approx(-1.0)
    assert rows[1].reject and rows[2].reject and not rows[0].reject
    assert "meandiff" in comparison_table(rows)


def test_tukey_matches_scipy():
    rng = np.random.default_rng(4)
    data = {"a": rng.normal(0, 1, 6), "b": rng.normal(0.5, 1, 6), "c": rng.normal(2, 1, 6)}
    ours = tukey_hsd(data, alpha=0.05)
    ref = sps.tukey_hsd(data["a"], data["b"], data["c"])
    ci = ref.confidence_interval(0.95)
    index = {"a": 0, "b": 1, "c": 2}
    for r in ours:
        i, j = index[r.group1], index[r.group2]
        # scipy reports mean(i) - mean(j); ours is mean(j) - mean(i)
        assert r.meandiff == pytest.approx(-ref.statistic[i, j])
        assert r.ci_lower == pytest.approx(-ci.high[i, j], abs=2e-3)
        assert r.p_adj == pytest.approx(ref.pvalue[i, j], abs=1e-4)


def test_tukey_errors_and_identical_groups():
    with pytest.raises(StatsError, match="equal sizes"):
        tukey_hsd({"a": [1, 2], "b": [1, 2, 3]})
    with pytest.raises(StatsError):
        tukey_hsd({"a": [1, 2]})
    (r,) = tukey_hsd({"a": [1.0, 2.0, 4.0], "b": [1.0, 2.0, 4.0]}, alpha=0.5)
    assert r.meandiff == 0 and not r.reject


@settings(max_examples=15, deadline=None)
@given(st.lists(st.lists(st.floats(0, 100), min_size=3, max_size=3), min_size=3, max_size=3),
       st.floats(0.1, 10))
def test_tukey_properties(values, scale):
    groups = {name: v for name, v in zip("xyz", values)}
    if all(np.var(v) == 0 for v in values):
        return
    rows = tukey_hsd(groups, alpha=0.05)
    scaled = tukey_hsd({k: [scale * x for x in v] for k, v in groups.items()}, alpha=0.05)
    for r, s in zip(rows, scaled):
        assert r.reject == (not (r.ci_lower <= 0 <= r.ci_upper))
        assert r.ci_lower + r.ci_upper == pytest.approx(2 * r.meandiff)
        assert s.meandiff == pytest.approx(scale * r.meandiff, abs=1e-9)
        assert s.ci_upper == pytest.approx(scale * r.ci_upper, abs=1e-6)
        if abs(abs(r.meandiff) - r.half_width) > 1e-6 * max(1.0, r.half_width):
            assert s.reject == r.reject


def test_cohens_d_hand_computed():
    es = cohens_d([1.0, 2.0, 3.0], [3.0, 4.0, 5.0])
    assert es.d == pytest.approx(2.0) and es.magnitude == "huge"
    assert cohens_d([1.0, 2.0], [1.0, 2.0]).magnitude == "negligible"
    with pytest.raises(StatsError):
        cohens_d([1.0, 1.0], [2.0, 2.0])
    with pytest.raises(StatsError):
        cohens_d([1.0], [2.0, 3.0])


@pytest.mark.parametrize("d, label", [(0.0, "negligible"), (0.19, "negligible"), (0.2, "small"), (0.5, "medium"),
                                      (0.8, "large"), (1.2, "very_large"), (1.99, "very_large"), (2.0, "huge"),
                                      (-1.5, "very_large")])
def test_magnitude_ladder(d, label):
    assert magnitude_label(d) == label


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=6), st.lists(st.floats(-50, 50), min_size=2, max_size=6),
       st.floats(-100, 100))
def test_cohens_d_symmetry_and_shift(a, b, c):
    if np.var(a) + np.var(b) < 1e-6:
        return
    d = cohens_d(a, b).d
    assert cohens_d(b, a).d == pytest.approx(-d)
    assert cohens_d([x + c for x in a], [x + c for x in b]).d == pytest.approx(d, abs=1e-6)
