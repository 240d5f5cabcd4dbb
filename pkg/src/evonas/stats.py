"""Small statistics toolkit: Welch's t-test, Kendall's tau-b, mean/std."""

from __future__ import annotations

import math

import numpy as np
from scipy import special, stats as _scipy_stats

__all__ = ["welch_ttest", "kendall_tau", "mean_std"]


def welch_ttest(a, b) -> tuple[float, float]:
    """Welch's unequal-variance t statistic and two-sided p-value.

    Degrees of freedom follow Welch-Satterthwaite; the p-value comes from
    the t-distribution survival function.  Requires two samples of size
    >= 2 with nonzero variance in at least one of them.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("welch_ttest needs at least 2 observations per sample")
    va = a.var(ddof=1)
    vb = b.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        raise ValueError("welch_ttest is undefined for two zero-variance samples")
    sa = va / a.size
    sb = vb / b.size
    t = (a.mean() - b.mean()) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (a.size - 1) + sb**2 / (b.size - 1))
    p = 2.0 * special.stdtr(df, -abs(t))
    return float(t), float(p)


def kendall_tau(x, y) -> float:
    """Kendall's tau-b (tie-corrected) rank correlation over all pairs."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"kendall_tau needs equal-length 1-D inputs, got {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("kendall_tau needs at least 2 observations")
    return float(_scipy_stats.kendalltau(x, y, variant="b").statistic)


def mean_std(values) -> tuple[float, float]:
    """Mean and sample standard deviation (ddof=1; 0.0 for a single value)."""
    values = np.asarray(values, dtype=np.float64)
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return float(values.mean()), std
