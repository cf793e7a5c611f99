"""Validation statistics: correlation, inter-rater agreement, paired t-test.

Self-contained implementations (no scipy at runtime): Spearman is Pearson
over average ranks, Krippendorff's alpha uses the coincidence formulation
with the interval (squared difference) metric, and t-test p-values come
from the regularized incomplete beta evaluated by continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class LengthMismatch(ValueError):
    pass


class ZeroVariance(ValueError):
    pass


class InsufficientCoincidences(ValueError):
    pass


class ZeroVarianceDifferences(ValueError):
    pass


def _paired(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"sequences must be 1-d and equal length ({x.shape} vs {y.shape})")
    if len(x) < 2:
        raise LengthMismatch("need at least 2 observations")
    return x, y


def pearson(x, y) -> float:
    """Product-moment correlation in [-1, 1]."""
    x, y = _paired(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float((dx * dx).sum()) * float((dy * dy).sum()))
    if denom == 0.0:
        raise ZeroVariance("correlation undefined for constant input")
    r = float((dx * dy).sum()) / denom
    return max(-1.0, min(1.0, r))


def rankdata(a) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    a = np.asarray(a, dtype=np.float64)
    _, inverse, counts = np.unique(a, return_inverse=True, return_counts=True)
    csum = np.cumsum(counts)
    avg = csum - (counts - 1) / 2.0
    return avg[inverse]


def spearman(x, y) -> float:
    """Rank correlation: Pearson over average-ranked data."""
    x, y = _paired(x, y)
    return pearson(rankdata(x), rankdata(y))


@dataclass
class RatingMatrix:
    """Raters x items grid of optional ratings with scale metadata."""

    values: np.ndarray  # NaN marks a missing rating
    scale_lo: float
    scale_hi: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("ratings must form a 2-d raters x items grid")
        raters, items = self.values.shape
        if raters < 2 or items < 2:
            raise ValueError("need at least 2 raters and 2 items")
        present = self.values[~np.isnan(self.values)]
        if len(present) and (present.min() < self.scale_lo or present.max() > self.scale_hi):
            raise ValueError("ratings outside declared scale")


def krippendorff_alpha(ratings, metric: str = "interval") -> float:
    """Chance-corrected agreement over a possibly incomplete rating matrix.

    alpha = 1 - D_observed / D_expected with squared-difference distances;
    items with fewer than two ratings contribute nothing. Perfect agreement
    returns exactly 1.0.
    """
    if metric != "interval":
        raise ValueError(f"unsupported metric {metric!r}")
    if isinstance(ratings, RatingMatrix):
        grid = ratings.values
    else:
        grid = np.asarray(
            [[np.nan if v is None else float(v) for v in row] for row in ratings],
            dtype=np.float64,
        )

    units = []
    for col in range(grid.shape[1]):
        present = grid[:, col]
        present = present[~np.isnan(present)]
        if len(present) >= 2:
            units.append(present)
    if not units:
        raise InsufficientCoincidences("no item carries two or more ratings")

    n_total = sum(len(u) for u in units)

    # observed: within-unit pair disagreement, each unit weighted by 1/(m-1)
    observed = 0.0
    for u in units:
        m = len(u)
        pair_sq = 2.0 * (m * float((u * u).sum()) - float(u.sum()) ** 2)
        observed += pair_sq / (m - 1)
    observed /= n_total

    pooled = np.concatenate(units)
    expected = 2.0 * (n_total * float((pooled * pooled).sum()) - float(pooled.sum()) ** 2)
    expected /= n_total * (n_total - 1)

    if expected == 0.0:
        return 1.0
    return 1.0 - observed / expected


class TTestResult(NamedTuple):
    t: float
    p_value: float


def paired_t_test(a, b) -> TTestResult:
    """Two-sided paired t-test on the differences a - b."""
    a, b = _paired(a, b)
    d = a - b
    n = len(d)
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise ZeroVarianceDifferences("differences have zero variance")
    t = float(d.mean()) / (sd / math.sqrt(n))
    df = n - 1
    p = _student_t_sf_two_sided(t, df)
    return TTestResult(t=t, p_value=p)


def _student_t_sf_two_sided(t: float, df: int) -> float:
    # P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    x = df / (df + t * t)
    return _betainc_regularized(df / 2.0, 0.5, x)


def _betainc_regularized(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    eps = 1e-15
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h
