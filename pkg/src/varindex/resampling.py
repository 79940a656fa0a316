"""Nonparametric bootstrap for the GVI and MVI estimators."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._rng import rng_for
from .asymptotics import ConfidenceInterval, normal_quantile
from .core import Dataset, NumericError, summarize
from .indexes import gvi, mvi

log = logging.getLogger(__name__)

DEFAULT_B = 1000
MAX_DEGENERATE_FRACTION = 0.10


@dataclass(frozen=True)
class BootstrapResult:
    estimate_gvi: float
    estimate_mvi: float
    se_gvi: float
    se_mvi: float
    normal_ci_gvi: ConfidenceInterval
    normal_ci_mvi: ConfidenceInterval
    percentile_ci_gvi: ConfidenceInterval
    percentile_ci_mvi: ConfidenceInterval
    replicates: int
    seed: int
    degenerate: int = 0

    def to_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "seed": self.seed,
            "degenerate_resamples": self.degenerate,
            "se_gvi": self.se_gvi,
            "se_mvi": self.se_mvi,
            "normal_ci_gvi": self.normal_ci_gvi.to_dict(),
            "normal_ci_mvi": self.normal_ci_mvi.to_dict(),
            "percentile_ci_gvi": self.percentile_ci_gvi.to_dict(),
            "percentile_ci_mvi": self.percentile_ci_mvi.to_dict(),
        }


def bootstrap_replicates(data: Dataset, B: int, seed: int) -> tuple[np.ndarray, np.ndarray, int]:
    """GVI and MVI of ``B`` resamples; replicate ``i`` draws from ``rng_for(seed, i)``.

    Resamples whose covariance matrix is identically zero contribute 0.
    """
    y = data.values
    n = y.shape[0]
    g = np.empty(B)
    m = np.empty(B)
    degenerate = 0
    for i in range(B):
        idx = rng_for(seed, i).integers(0, n, size=n)
        ms = summarize(Dataset(y[idx]))
        if not np.any(ms.cov):
            degenerate += 1
            g[i] = m[i] = 0.0
            continue
        g[i] = gvi(ms)
        m[i] = mvi(ms)
    return g, m, degenerate


def bootstrap_indexes(data, B: int = DEFAULT_B, seed: int = 0, level: float = 0.95) -> BootstrapResult:
    """Bootstrap standard errors plus normal and percentile intervals.

    The normal interval is ``estimate +/- u * se`` (the tabulated style); the
    percentile interval uses type-7 quantiles of the replicates.
    """
    if not isinstance(data, Dataset):
        data = Dataset(data)
    if B < 2:
        raise ValueError("need at least 2 bootstrap replicates")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    ms = summarize(data)
    est_g, est_m = float(gvi(ms)), float(mvi(ms))
    alpha = 1 - level

    if not np.any(ms.cov):
        # every resample of a constant dataset is the same constant dataset
        g = np.full(B, est_g)
        m = np.full(B, est_m)
        degenerate = B
    else:
        g, m, degenerate = bootstrap_replicates(data, B, seed)
        if degenerate:
            log.warning("%d of %d bootstrap resamples were degenerate", degenerate, B)
        if degenerate > MAX_DEGENERATE_FRACTION * B:
            raise NumericError("dataset too degenerate for bootstrap")

    u = normal_quantile(1 - alpha / 2)

    def intervals(est, reps):
        se = float(np.std(reps, ddof=1))
        normal = ConfidenceInterval(est - u * se, est + u * se, level)
        lo, hi = np.quantile(reps, [alpha / 2, 1 - alpha / 2])
        return se, normal, ConfidenceInterval(float(lo), float(hi), level)

    se_g, ncg, pcg = intervals(est_g, g)
    se_m, ncm, pcm = intervals(est_m, m)
    return BootstrapResult(est_g, est_m, se_g, se_m, ncg, ncm, pcg, pcm, B, int(seed), degenerate)
