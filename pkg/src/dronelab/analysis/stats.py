"""Statistical tests used by the analysis pipeline.

All tests are self-contained: exact binomial tail by direct summation,
Pearson chi-squared on 2x2 tables without continuity correction, rank tests
with midranks and tie-corrected variances, and the two-sample
Kolmogorov-Smirnov test with the asymptotic tail. Survival functions come
from the complementary error function (one degree of freedom) and a
regularized incomplete gamma (general case).

The normal approximation in the rank tests applies a continuity correction
of one half toward the mean, which keeps small-sample p-values close to the
exact permutation distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..errors import DegenerateTableError, DomainError

_EXACT_BINOM_LIMIT = 500  # largest n for which the tail is summed in exact rationals


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    df: int | None
    method: str
    details: dict = field(default_factory=dict)


def _gamma_q(s: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(s, x) for s > 0, x >= 0."""
    if s <= 0:
        raise DomainError("shape must be positive")
    if x < 0:
        raise DomainError("argument must be non-negative")
    if x == 0:
        return 1.0
    log_prefix = -x + s * math.log(x) - math.lgamma(s)
    if x < s + 1.0:
        # Series for the lower function, complemented.
        term = 1.0 / s
        total = term
        denom = s
        for _ in range(1000):
            denom += 1.0
            term *= x / denom
            total += term
            if abs(term) < abs(total) * 1e-17:
                break
        return min(1.0, max(0.0, 1.0 - total * math.exp(log_prefix)))
    # Lentz continued fraction for the upper function.
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, 1000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return min(1.0, max(0.0, math.exp(log_prefix) * h))


def chi2_sf(x: float, df: int) -> float:
    """Survival function of the chi-squared distribution."""
    if df < 1:
        raise DomainError("df must be at least 1")
    if x <= 0:
        return 1.0
    if df == 1:
        return math.erfc(math.sqrt(x / 2.0))
    if df == 2:
        return math.exp(-x / 2.0)
    return _gamma_q(df / 2.0, x / 2.0)


def _normal_sf_two_sided(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


def binom_test_geq(k: int, n: int, p0: float) -> float:
    """Exact upper-tail probability P(X >= k) for X ~ Binomial(n, p0).

    Small instances are summed in exact rational arithmetic (so the result is
    the correctly rounded tail); large instances fall back to stable
    log-space summation.
    """
    if not (isinstance(k, int) and isinstance(n, int)):
        raise DomainError("k and n must be integers")
    if n < 0 or not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0.0 <= p0 <= 1.0:
        raise DomainError(f"p0 must be in [0, 1], got {p0}")
    if k == 0:
        return 1.0
    if p0 == 0.0:
        return 0.0
    if p0 == 1.0:
        return 1.0
    if n <= _EXACT_BINOM_LIMIT:
        p = Fraction(p0)
        q = 1 - p
        total = Fraction(0)
        for j in range(k, n + 1):
            total += math.comb(n, j) * p**j * q ** (n - j)
        return float(total)
    log_p = math.log(p0)
    log_q = math.log1p(-p0)
    terms = [
        math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * log_p + (n - j) * log_q
        for j in range(k, n + 1)
    ]
    peak = max(terms)
    return min(1.0, math.exp(peak) * math.fsum(math.exp(t - peak) for t in terms))


def chi2_2x2(a: int, b: int, c: int, d: int) -> TestResult:
    """Pearson chi-squared test of independence on a 2x2 table, without
    continuity correction; rows are (a, b) and (c, d)."""
    for count in (a, b, c, d):
        if not isinstance(count, int) or count < 0:
            raise DomainError("cell counts must be non-negative integers")
    row1, row2 = a + b, c + d
    col1, col2 = a + c, b + d
    if min(row1, row2, col1, col2) == 0:
        raise DegenerateTableError("a zero margin leaves the statistic undefined")
    n = row1 + row2
    statistic = n * (a * d - b * c) ** 2 / (row1 * row2 * col1 * col2)
    return TestResult(
        statistic=statistic,
        p_value=chi2_sf(statistic, 1),
        df=1,
        method="chi2_2x2",
        details={"table": ((a, b), (c, d))},
    )


def _midranks(pooled: Sequence[float]) -> tuple[list[float], list[int]]:
    order = sorted(range(len(pooled)), key=lambda idx: pooled[idx])
    ranks = [0.0] * len(pooled)
    tie_sizes = []
    start = 0
    while start < len(order):
        stop = start
        while stop + 1 < len(order) and pooled[order[stop + 1]] == pooled[order[start]]:
            stop += 1
        mean_rank = (start + stop) / 2.0 + 1.0
        for pos in range(start, stop + 1):
            ranks[order[pos]] = mean_rank
        tie_sizes.append(stop - start + 1)
        start = stop + 1
    return ranks, tie_sizes


def mann_whitney(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Rank-sum test of two independent samples.

    The reported statistic is U of the first sample (the number of pairs the
    first sample wins, counting ties as half); the second sample's U is
    ``n1*n2 - U``. The two-sided p-value uses the normal approximation with
    tie-corrected variance and a continuity correction.
    """
    if not a or not b:
        raise DomainError("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    n = n1 + n2
    ranks, tie_sizes = _midranks(list(a) + list(b))
    rank_sum_a = sum(ranks[:n1])
    u1 = rank_sum_a - n1 * (n1 + 1) / 2.0
    mean = n1 * n2 / 2.0
    tie_term = sum(t**3 - t for t in tie_sizes)
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        z = 0.0
        p = 1.0
    else:
        diff = u1 - mean
        shifted = math.copysign(max(abs(diff) - 0.5, 0.0), diff)
        z = shifted / math.sqrt(variance)
        p = _normal_sf_two_sided(z)
    return TestResult(
        statistic=u1,
        p_value=p,
        df=None,
        method="mann_whitney_u",
        details={"z": z, "u_other": n1 * n2 - u1, "n1": n1, "n2": n2},
    )


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> TestResult:
    """Rank-based equality-of-populations test across two or more groups,
    with tie correction; identical observations everywhere give H = 0."""
    if len(groups) < 2:
        raise DomainError("need at least two groups")
    if any(len(g) == 0 for g in groups):
        raise DomainError("groups must be non-empty")
    pooled = [x for group in groups for x in group]
    n = len(pooled)
    ranks, tie_sizes = _midranks(pooled)
    h = 0.0
    offset = 0
    for group in groups:
        size = len(group)
        rank_sum = sum(ranks[offset : offset + size])
        h += rank_sum**2 / size
        offset += size
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    tie_term = sum(t**3 - t for t in tie_sizes)
    correction = 1.0 - tie_term / (n**3 - n) if n > 1 else 0.0
    if correction <= 0:
        h = 0.0
        p = 1.0
    else:
        h /= correction
        h = max(h, 0.0)
        p = chi2_sf(h, len(groups) - 1)
    return TestResult(
        statistic=h,
        p_value=p,
        df=len(groups) - 1,
        method="kruskal_wallis",
        details={"group_sizes": [len(g) for g in groups]},
    )


def _kolmogorov_sf(lam: float) -> float:
    if lam <= 0:
        return 1.0
    total = 0.0
    for k in range(1, 201):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-17:
            break
    return min(1.0, max(0.0, total))


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sided two-sample Kolmogorov-Smirnov test with the asymptotic
    Kolmogorov tail probability."""
    if not a or not b:
        raise DomainError("both samples must be non-empty")
    xs = sorted(a)
    ys = sorted(b)
    n1, n2 = len(xs), len(ys)
    d = 0.0
    i = j = 0
    while i < n1 and j < n2:
        value = min(xs[i], ys[j])
        while i < n1 and xs[i] <= value:
            i += 1
        while j < n2 and ys[j] <= value:
            j += 1
        d = max(d, abs(i / n1 - j / n2))
    d = max(d, abs(1.0 - j / n2), abs(i / n1 - 1.0))
    effective = n1 * n2 / (n1 + n2)
    p = 1.0 if d == 0 else _kolmogorov_sf(math.sqrt(effective) * d)
    return TestResult(
        statistic=d,
        p_value=p,
        df=None,
        method="ks_two_sample",
        details={"n1": n1, "n2": n2},
    )
