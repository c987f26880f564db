"""Two-sample significance tests and rank correlations.

The t-distribution tail is computed from the regularized incomplete beta
via a Lentz continued fraction, accurate to well under 1e-10 for the sample
sizes this harness sees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import (
    DegenerateVariance,
    InsufficientPairs,
    TooFewSamples,
    ZeroVariance,
)

_CF_EPS = 1e-15
_CF_TINY = 1e-300
_CF_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise DegenerateVariance(f"degrees of freedom {df}")
    x = df / (df + t * t)
    return min(1.0, max(0.0, regularized_incomplete_beta(df / 2.0, 0.5, x)))


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float

    def reject(self, alpha: float = 0.001) -> bool:
        return self.p < alpha


def welch_ttest(a, b) -> WelchResult:
    """Unequal-variance t-test with Welch-Satterthwaite df, two-sided p."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise TooFewSamples(f"need >= 2 per sample, got {na} and {nb}")
    va = float(a.var(ddof=1))
    vb = float(b.var(ddof=1))
    if va == 0.0 and vb == 0.0:
        raise DegenerateVariance("both samples have zero variance")
    sa, sb = va / na, vb / nb
    t = (float(a.mean()) - float(b.mean())) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa ** 2 / (na - 1) + sb ** 2 / (nb - 1))
    return WelchResult(t, df, t_two_sided_p(t, df))


def midranks(values) -> np.ndarray:
    """Fractional (mid) ranks, 1-based; ties share the mean rank."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p: float

    def reject(self, alpha: float = 0.001) -> bool:
        return self.p < alpha


def mann_whitney_u(a, b) -> MannWhitneyResult:
    """Rank-sum U with mid-rank ties, tie-corrected normal approximation,
    and 0.5 continuity correction.  All values tied -> p = 1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = a.size, b.size
    if na < 1 or nb < 1:
        raise TooFewSamples("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    r_a = float(ranks[:na].sum())
    u = r_a - na * (na + 1) / 2.0
    n = na + nb
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float((counts.astype(np.float64) ** 3 - counts).sum())
    if n < 2 or tie_term >= n ** 3 - n:
        return MannWhitneyResult(u, 1.0)
    var = na * nb / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return MannWhitneyResult(u, 1.0)
    mean = na * nb / 2.0
    z = (abs(u - mean) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    p = min(1.0, 2.0 * normal_sf(z))
    return MannWhitneyResult(u, p)


def correlate(metric_values, mos_means) -> tuple[float, float]:
    """(Pearson r, Spearman rho) over aligned per-image values."""
    x = np.asarray(metric_values, dtype=np.float64)
    y = np.asarray(mos_means, dtype=np.float64)
    if x.size != y.size:
        raise InsufficientPairs(f"unequal lengths {x.size} vs {y.size}")
    if x.size < 3:
        raise InsufficientPairs(f"need >= 3 pairs, got {x.size}")
    pearson = _pearson(x, y)
    spearman = _pearson(midranks(x), midranks(y))
    return pearson, spearman


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance("a sample is constant")
    return min(1.0, max(-1.0, float(xc @ yc) / (sx * sy)))
