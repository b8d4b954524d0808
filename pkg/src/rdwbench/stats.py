"""Robust summary statistics for controller contrasts.

The reporting pipeline is: replace outliers within each controller's
per-path sample (Tukey fences, replaced by the sample median), then
report the difference of 20%-trimmed means with a percentile bootstrap
interval over jointly resampled pairs.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_TRIM = 0.2
DEFAULT_N_BOOT = 2000
DEFAULT_ALPHA = 0.05


def _as_sample(x) -> np.ndarray:
    a = np.asarray(x, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(a)):
        raise ValueError("sample contains non-finite values")
    return a


def quartiles(x) -> tuple[float, float, float]:
    """(q1, median, q3) with linear midpoint interpolation."""
    a = _as_sample(x)
    q1, med, q3 = np.percentile(a, [25.0, 50.0, 75.0])
    return float(q1), float(med), float(q3)


def replace_outliers(x) -> np.ndarray:
    """Values outside the Tukey fences become the sample median.

    Fences and median come from the original sample, so the pass is a
    single sweep (and idempotent).
    """
    a = _as_sample(x)
    if a.size < 4:
        logger.warning("outlier replacement skipped: n=%d < 4", a.size)
        return a.copy()
    q1, med, q3 = quartiles(a)
    iqr = q3 - q1
    lo = q1 - 1.5 * iqr
    hi = q3 + 1.5 * iqr
    out = a.copy()
    out[(a < lo) | (a > hi)] = med
    return out


def trimmed_mean(x, proportion: float = DEFAULT_TRIM) -> float:
    """Mean after dropping floor(proportion * n) values from each end."""
    a = np.sort(_as_sample(x))
    if not 0.0 <= proportion < 0.5:
        raise ValueError("trim proportion must be in [0, 0.5)")
    if a.size < 5 and proportion > 0.0:
        # floor(p * n) is 0 at the default 20% for n <= 4
        logger.warning("trimmed mean of n=%d samples trims nothing", a.size)
    k = math.floor(proportion * a.size)
    return float(a[k:a.size - k].mean())


def _trimmed_mean_rows(m: np.ndarray, trim: float) -> np.ndarray:
    n = m.shape[1]
    k = math.floor(trim * n)
    return np.sort(m, axis=1)[:, k:n - k].mean(axis=1)


@dataclass(frozen=True)
class ContrastResult:
    estimate: float   # trimmed_mean(a) - trimmed_mean(b)
    ci_low: float
    ci_high: float
    n_pairs: int
    n_boot: int

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "ci_low": self.ci_low,
                "ci_high": self.ci_high, "n_pairs": self.n_pairs,
                "n_boot": self.n_boot}


def bootstrap_contrast(a, b, n_boot: int = DEFAULT_N_BOOT, rng=None,
                       alpha: float = DEFAULT_ALPHA,
                       trim: float = DEFAULT_TRIM) -> ContrastResult:
    """Percentile bootstrap CI for trimmed_mean(a) - trimmed_mean(b).

    Samples are paired: each replicate draws one index vector and applies
    it to both samples before taking the trimmed-mean difference.
    """
    a = _as_sample(a)
    b = _as_sample(b)
    if a.size != b.size:
        raise ValueError("paired samples must have equal length")
    n = a.size
    est = trimmed_mean(a, trim) - trimmed_mean(b, trim)
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    idx = gen.integers(0, n, size=(int(n_boot), n))
    boot = _trimmed_mean_rows(a[idx], trim) - _trimmed_mean_rows(b[idx], trim)
    lo, hi = np.percentile(boot, [100.0 * alpha / 2.0, 100.0 * (1.0 - alpha / 2.0)])
    return ContrastResult(est, float(lo), float(hi), n, int(n_boot))


def robust_contrast(a, b, n_boot: int = DEFAULT_N_BOOT, rng=None,
                    alpha: float = DEFAULT_ALPHA,
                    trim: float = DEFAULT_TRIM) -> ContrastResult:
    """Full pipeline: outlier replacement per sample, then paired bootstrap."""
    return bootstrap_contrast(replace_outliers(a), replace_outliers(b),
                              n_boot=n_boot, rng=rng, alpha=alpha, trim=trim)
