"""Delta-method variances, confidence intervals and a Wald test for GVI/MVI.

Two plug-in estimates of the moment covariance are available.  ``centered=False``
(the default) uses the covariance of the raw augmented vectors
``(Y, Y_j Y_l)``, which reproduces the classical closed form for ``k = 1``.
``centered=True`` forms the products from centred data; paired with gradients
taken with respect to ``(m, Sigma)`` this is the asymptotically exact variance
and gives correctly calibrated intervals and tests.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .core import Dataset, NumericError, augmented_moments, pair_indices, summarize
from .indexes import gvi, mvi

log = logging.getLogger(__name__)

CLAMP_RTOL = 1e-10


@dataclass(frozen=True)
class GviAsymptotics:
    delta: np.ndarray
    gamma: np.ndarray
    sigma2: float


@dataclass(frozen=True)
class MviAsymptotics:
    lam: np.ndarray
    pi: np.ndarray
    sigma2: float


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    @property
    def halfwidth(self) -> float:
        return (self.upper - self.lower) / 2

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "level": self.level}


def normal_quantile(p: float) -> float:
    if not 0 < p < 1:
        raise ValueError("probability must lie in (0, 1)")
    return float(ndtri(p))


def delta_gvi(ms) -> np.ndarray:
    """Gradient of ``(m'Sm)/(m'm)^2`` with respect to ``(m, vech S)``.

    The tail is ordered (1,1),(1,2),...,(1,k),(2,2),...,(k,k); off-diagonal
    entries carry the factor 2 from the symmetric pair ``S_jl = S_lj``.
    """
    m, s = ms.mean, ms.cov
    mm = m @ m
    g = float(gvi(ms))
    head = (2 * (s @ m) - 4 * m * mm * g) / mm**2
    jj, ll = pair_indices(m.size)
    tail = np.where(jj == ll, 1.0, 2.0) * m[jj] * m[ll] / mm**2
    return np.concatenate([head, tail])


def lambda_mvi(ms) -> np.ndarray:
    """Gradient of ``sum m_j^2 S_jj / (m'm)^2`` with respect to ``(m, diag S)``."""
    m, s = ms.mean, ms.cov
    mm = m @ m
    v = float(mvi(ms))
    head = (2 * m * np.diag(s) - 4 * m * mm * v) / mm**2
    return np.concatenate([head, m * m / mm**2])


def _quadratic_form(g: np.ndarray, a: np.ndarray) -> float:
    q = float(g @ a @ g)
    if q < 0:
        bound = CLAMP_RTOL * float(g @ g) * np.linalg.norm(a, 2)
        if q < -bound:
            raise NumericError(f"numeric failure: negative delta-method variance {q:.3g}")
        log.warning("clamping negative delta-method variance %.3g to 0", q)
        q = 0.0
    return q


def sigma2_gvi(data, centered: bool = False) -> GviAsymptotics:
    """Plug-in delta-method variance of the GVI estimator."""
    gamma = augmented_moments(data, centered=centered).gamma
    d = delta_gvi(summarize(data))
    return GviAsymptotics(d, gamma, _quadratic_form(d, gamma))


def sigma2_mvi(data, centered: bool = False) -> MviAsymptotics:
    """Plug-in delta-method variance of the MVI estimator."""
    pi = augmented_moments(data, centered=centered).pi
    lam = lambda_mvi(summarize(data))
    return MviAsymptotics(lam, pi, _quadratic_form(lam, pi))


def univariate_sigma2(m1: float, m2: float, m3: float, m4: float) -> float:
    """Closed-form asymptotic variance for ``k = 1`` from the first four raw moments."""
    if not m1 > 0:
        raise ValueError("invalid moment sequence: first moment must be positive")
    var = m2 - m1 * m1
    if var < -1e-12 * m2 or m4 < m2 * m2 * (1 - 1e-12):
        raise ValueError("invalid moment sequence")
    var = max(var, 0.0)
    bracket = (m4 * m1**2 - 4 * var * m1 * m3 + 4 * var * m2 * m1**2
               - (m1 * m2) ** 2 + 4 * var**3)
    return max(bracket, 0.0) / m1**6


def sample_raw_moments(y) -> tuple[float, float, float, float]:
    """First four raw moments consistent with the unbiased covariance estimates.

    Sample averages are adjusted by ``c = n/(n-1)`` so that ``m2 - m1^2``,
    ``m3 - m1 m2`` and ``m4 - m2^2`` equal the unbiased estimates of
    ``var Y``, ``cov(Y, Y^2)`` and ``var Y^2``.  With these moments
    :func:`univariate_sigma2` reproduces ``sigma2_gvi`` on the same data.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    if n < 2:
        raise ValueError("insufficient sample")
    c = n / (n - 1)
    y2 = y * y
    a1 = y.mean()
    m2 = a1 * a1 + float(np.var(y, ddof=1))
    m3 = a1 * m2 + c * float(np.mean((y - a1) * (y2 - y2.mean())))
    m4 = m2 * m2 + float(np.var(y2, ddof=1))
    return float(a1), float(m2), float(m3), float(m4)


def asymptotic_ci(estimate: float, sigma2: float, n: int, level: float = 0.95) -> ConfidenceInterval:
    """``estimate +/- u_{1-alpha/2} sqrt(sigma2 / n)``."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if n < 1:
        raise ValueError("n must be positive")
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    u = normal_quantile(1 - (1 - level) / 2)
    hw = u * np.sqrt(sigma2) / np.sqrt(n)
    return ConfidenceInterval(float(estimate - hw), float(estimate + hw), level)


def wald_equivariation_test(data, null_value: float = 1.0, level: float = 0.95,
                            centered: bool = True) -> dict:
    """Wald test of ``GVI = null_value``.

    Uses the centred moment covariance by default so that the test has its
    nominal size; pass ``centered=False`` for the raw-moment variance.
    """
    if not isinstance(data, Dataset):
        data = Dataset(data)
    s2 = sigma2_gvi(data, centered=centered).sigma2
    if s2 <= 0:
        raise NumericError("test undefined: zero estimated variance")
    est = float(gvi(summarize(data)))
    stat = np.sqrt(data.n) * (est - null_value) / np.sqrt(s2)
    u = normal_quantile(1 - (1 - level) / 2)
    return {"statistic": float(stat), "reject": bool(abs(stat) > u), "estimate": est,
            "critical_value": u}
