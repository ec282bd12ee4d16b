"""Tukey HSD with a quadrature studentized-range distribution, and Cohen's d."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate

from ..reporting import format_table


class StatsError(ValueError):
    pass


_Z_LIMIT = 9.0  # standard normal mass beyond |z| = 9 is ~1e-19
_QUAD_OPTS = dict(epsabs=1e-10, epsrel=1e-9, limit=200)
_SQRT2 = math.sqrt(2.0)


def _phi_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _range_cdf(w: float, k: int) -> float:
    """P(max - min <= w) for k iid standard normals."""
    if w <= 0.0:
        return 0.0

    def integrand(z):
        return math.exp(-0.5 * z * z) * (_phi_cdf(z) - _phi_cdf(z - w)) ** (k - 1)

    val, _ = integrate.quad(integrand, -_Z_LIMIT, _Z_LIMIT + w, **_QUAD_OPTS)
    return min(1.0, k * val / math.sqrt(2.0 * math.pi))


def _log_scale_density(s: float, df: int) -> float:
    """log density of sqrt(chi2_df / df) at ``s`` > 0."""
    nu = float(df)
    return (0.5 * nu * math.log(nu) - math.lgamma(0.5 * nu) - (0.5 * nu - 1.0) * math.log(2.0)
            + (nu - 1.0) * math.log(s) - 0.5 * nu * s * s)


@lru_cache(maxsize=4096)
def studentized_range_cdf(q: float, k: int, df: int) -> float:
    """CDF of the studentized range for ``k`` groups and ``df`` error degrees of freedom."""
    _check_domain(k, df)
    if q <= 0.0:
        return 0.0

    def outer(s):
        if s <= 0.0:
            return 0.0
        return math.exp(_log_scale_density(s, df)) * _range_cdf(q * s, k)

    spread = 8.0 / math.sqrt(2.0 * df)
    lo, hi = max(0.0, 1.0 - spread), 1.0 + spread
    total = 0.0
    for a, b in ((0.0, lo), (lo, hi), (hi, math.inf)):
        if b > a:
            total += integrate.quad(outer, a, b, **_QUAD_OPTS)[0]
    return min(1.0, max(0.0, total))


def _check_domain(k: int, df: int) -> None:
    if int(k) != k or k < 2:
        raise StatsError(f"k must be an integer >= 2, got {k}")
    if int(df) != df or df < 1:
        raise StatsError(f"df must be an integer >= 1, got {df}")


def studentized_range_quantile(alpha: float, k: int, df: int, tol: float = 1e-4) -> float:
    """Upper-``alpha`` critical value: the q with CDF(q; k, df) = 1 - alpha.

    Found by bisection on [0, 100] to absolute tolerance ``tol``.
    """
    if not 0.0 < alpha < 1.0:
        raise StatsError(f"alpha must be in (0, 1), got {alpha}")
    _check_domain(k, df)
    target = 1.0 - alpha
    lo, hi = 0.0, 100.0
    if studentized_range_cdf(hi, k, df) < target:
        raise StatsError(f"quantile for alpha={alpha}, k={k}, df={df} lies beyond 100")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if studentized_range_cdf(mid, k, df) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PairComparison:
    group1: str
    group2: str
    meandiff: float
    ci_lower: float
    ci_upper: float
    reject: bool
    alpha: float
    q_crit: float
    p_adj: float

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_upper - self.ci_lower)

    def to_json(self) -> dict:
        return asdict(self)


def _ordered_names(names) -> list[str]:
    # case-insensitive: lexicon < majority < RNN
    return sorted(names, key=lambda n: (n.casefold(), n))


def tukey_hsd(groups: Mapping[str, Sequence[float]], alpha: float = 0.05) -> list[PairComparison]:
    """All-pairs Tukey HSD for equally sized groups.

    Pairs follow case-insensitive lexicographic order of group names and
    ``meandiff = mean(group2) - mean(group1)``.
    """
    if len(groups) < 2:
        raise StatsError("Tukey HSD needs at least two groups")
    arrays = {name: np.asarray(vals, dtype=float) for name, vals in groups.items()}
    sizes = {len(a) for a in arrays.values()}
    if len(sizes) != 1:
        raise StatsError(f"groups must have equal sizes, got {sorted(sizes)}")
    n = sizes.pop()
    if n < 2:
        raise StatsError("each group needs at least two observations")
    k = len(arrays)
    df = k * n - k
    sse = sum(float(((a - a.mean()) ** 2).sum()) for a in arrays.values())
    mse = sse / df
    se = math.sqrt(mse / n)
    q = studentized_range_quantile(alpha, k, df)
    hw = q * se
    out = []
    for g1, g2 in itertools.combinations(_ordered_names(arrays), 2):
        md = float(arrays[g2].mean() - arrays[g1].mean())
        if se > 0:
            p = 1.0 - studentized_range_cdf(abs(md) / se, k, df)
        else:
            p = 1.0 if md == 0 else 0.0
        out.append(PairComparison(g1, g2, md, md - hw, md + hw, abs(md) > hw, alpha, q, max(0.0, p)))
    return out


def comparison_table(rows: Sequence[PairComparison]) -> str:
    body = [(r.group1, r.group2, f"{r.meandiff:.4f}", f"{r.ci_lower:.4f}", f"{r.ci_upper:.4f}", r.reject)
            for r in rows]
    return format_table(["group1", "group2", "meandiff", "lower", "upper", "reject"], body, align="llrrrl")


MAGNITUDES = (
    (0.2, "negligible"),
    (0.5, "small"),
    (0.8, "medium"),
    (1.2, "large"),
    (2.0, "very_large"),
)


def magnitude_label(d: float) -> str:
    a = abs(d)
    for bound, label in MAGNITUDES:
        if a < bound:
            return label
    return "huge"


@dataclass(frozen=True)
class EffectSize:
    d: float
    magnitude: str

    def to_json(self) -> dict:
        return asdict(self)


def cohens_d(g1: Sequence[float], g2: Sequence[float]) -> EffectSize:
    """Standardized difference ``(mean(g2) - mean(g1)) / pooled sample SD``."""
    a, b = np.asarray(g1, dtype=float), np.asarray(g2, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise StatsError("each group needs at least two observations")
    pooled = ((len(a) - 1) * a.var(ddof=1) + (len(b) - 1) * b.var(ddof=1)) / (len(a) + len(b) - 2)
    if pooled <= 0:
        raise StatsError("pooled variance is zero")
    d = float((b.mean() - a.mean()) / math.sqrt(pooled))
    return EffectSize(d, magnitude_label(d))
