"""Variation indexes computed from moment summaries or variance functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import DataError, MomentSummary, NumericError, check_symmetric

KINDS = ("GVI", "MVI", "RVI", "RWI")

DEFAULT_TOL = 0.05
DEFAULT_PINV_RTOL = 1e-10
DEFAULT_MEAN_RTOL = 1e-6


class IndexValue(float):
    """A nonnegative, finite index value tagged with its kind."""

    kind: str

    def __new__(cls, value, kind: str = "GVI"):
        value = float(value)
        if kind not in KINDS:
            raise ValueError(f"unknown index kind {kind!r}")
        if not np.isfinite(value):
            raise NumericError(f"numeric failure: {kind} is not finite")
        if value < 0:
            # rounding in indefinite-looking but PSD inputs
            if value < -1e-12:
                raise NumericError(f"numeric failure: {kind} is negative ({value:.3g})")
            value = 0.0
        obj = super().__new__(cls, value)
        obj.kind = kind
        return obj

    def __repr__(self):
        return f"IndexValue({float(self)!r}, kind={self.kind!r})"

    def __reduce__(self):
        return (IndexValue, (float(self), self.kind))


@dataclass(frozen=True)
class VariationClass:
    label: str
    tolerance: float

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class VarianceFunction:
    """A map ``m -> V(m)`` together with its mean-domain predicate."""

    eval: Callable[[np.ndarray], np.ndarray]
    domain: Callable[[np.ndarray], bool] = lambda m: bool(np.all(np.asarray(m) > 0))
    name: str = ""

    def __call__(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        if not self.domain(m):
            raise DataError("mean outside M_F")
        v = np.atleast_2d(np.asarray(self.eval(m), dtype=float))
        check_symmetric(v, "variance function value")
        return v


def _mean_cov(ms: MomentSummary) -> tuple[np.ndarray, np.ndarray]:
    return ms.mean, ms.cov


def _ratio(m: np.ndarray, a: np.ndarray) -> float:
    mm = m @ m
    return float(m @ a @ m) / mm**2


def gvi(ms: MomentSummary) -> IndexValue:
    """Generalized variation index ``(m' S m) / (m'm)^2``."""
    m, s = _mean_cov(ms)
    return IndexValue(_ratio(m, s), "GVI")


def mvi(ms: MomentSummary) -> IndexValue:
    """Multiple marginal variation index; the off-diagonal covariances are ignored."""
    m, s = _mean_cov(ms)
    m2 = m * m
    return IndexValue(float(m2 @ np.diag(s)) / m2.sum() ** 2, "MVI")


def cross_term(ms: MomentSummary) -> float:
    """``gvi - mvi`` evaluated directly as the off-diagonal part of the quadratic form."""
    m, s = _mean_cov(ms)
    off = s - np.diag(np.diag(s))
    return float(m @ off @ m) / (m @ m) ** 2


def bivariate_decomposition(ms: MomentSummary) -> dict:
    """Split a bivariate GVI into its marginal part and its correlation part.

    Returns a dict with keys ``mvi``, ``cross`` and ``gvi`` where
    ``gvi = mvi + cross`` and ``cross`` is driven by the correlation.
    """
    if ms.k != 2:
        raise DataError(f"bivariate decomposition needs k = 2, got k = {ms.k}")
    m, s = _mean_cov(ms)
    m1sq, m2sq = m * m
    v1, v2 = np.diag(s)
    vi1, vi2 = v1 / m1sq, v2 / m2sq
    if v1 > 0 and v2 > 0:
        rho = s[0, 1] / np.sqrt(v1 * v2)
        cross = rho * 2 * m1sq * m2sq * np.sqrt(vi1 * vi2) / (m1sq + m2sq) ** 2
    else:
        cross = 0.0
    mv = float(mvi(ms))
    return {"mvi": mv, "cross": float(cross), "gvi": mv + float(cross)}


def rvi(num: MomentSummary, den: MomentSummary, mean_tol: float = DEFAULT_MEAN_RTOL) -> IndexValue:
    """Relative variation index ``GVI(num) / GVI(den)`` for equal-mean summaries."""
    if num.k != den.k:
        raise DataError("summaries have different dimensions")
    if np.any(np.abs(num.mean - den.mean) > mean_tol * np.abs(den.mean)):
        raise DataError("means differ; RVI undefined")
    g_den = float(gvi(den))
    if g_den == 0:
        raise NumericError("reference index is zero")
    return IndexValue(float(gvi(num)) / g_den, "RVI")


def _check_mean(m) -> np.ndarray:
    m = np.atleast_1d(np.asarray(m, dtype=float))
    if np.any(~np.isfinite(m)) or np.any(m <= 0):
        raise DataError("mean vector must be strictly positive")
    return m


def gvi_function(V: VarianceFunction, m) -> IndexValue:
    """Generalized variation function ``m' V(m) m / (m'm)^2``."""
    m = _check_mean(m)
    return IndexValue(_ratio(m, V(m)), "GVI")


def mvi_function(V: VarianceFunction, m) -> IndexValue:
    """Multiple marginal variation function, using only ``diag V(m)``."""
    m = _check_mean(m)
    m2 = m * m
    return IndexValue(float(m2 @ np.diag(V(m))) / m2.sum() ** 2, "MVI")


def pseudo_inverse(M, rel_tol: float = DEFAULT_PINV_RTOL) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric matrix by eigendecomposition.

    Eigenvalues with ``|lambda| <= rel_tol * max|lambda|`` are treated as zero.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    check_symmetric(M)
    try:
        w, q = np.linalg.eigh((M + M.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"numeric failure: {exc}") from None
    top = np.max(np.abs(w)) if w.size else 0.0
    if top == 0:
        return np.zeros_like(M)
    keep = np.abs(w) > rel_tol * top
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    out = (q * inv) @ q.T
    return (out + out.T) / 2


def rwi(sigma_Y, W, m, rel_tol: float = DEFAULT_PINV_RTOL) -> IndexValue:
    """Relative variability index ``tr(Sigma_Y W(m)^+)``.

    ``W`` is a callable returning a symmetric PSD ``k x k`` matrix for the mean
    ``m`` (or the matrix itself).  ``W(m) = m m'`` recovers the GVI.
    """
    m = _check_mean(m)
    s = np.atleast_2d(np.asarray(sigma_Y, dtype=float))
    w = W(m) if callable(W) else np.asarray(W, dtype=float)
    w = np.atleast_2d(w)
    if s.shape != w.shape or s.shape != (m.size, m.size):
        raise DataError("sigma_Y, W(m) and m have incompatible shapes")
    return IndexValue(float(np.trace(s @ pseudo_inverse(w, rel_tol))), "RWI")


def outer_mean(m) -> np.ndarray:
    """``W(m) = m m'``, the uncorrelated-exponential reference."""
    m = np.asarray(m, dtype=float)
    return np.outer(m, m)


def outer_sqrt_mean(m) -> np.ndarray:
    """``W(m) = sqrt(m) sqrt(m)'``, the dispersion-type reference."""
    r = np.sqrt(np.asarray(m, dtype=float))
    return np.outer(r, r)


def classify(v, tol: float = DEFAULT_TOL) -> VariationClass:
    """Over / Equi / Under relative to the reference value 1."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    v = float(v)
    if v > 1 + tol:
        label = "Over"
    elif v < 1 - tol:
        label = "Under"
    else:
        label = "Equi"
    return VariationClass(label, tol)


def marginal_vi(ms: MomentSummary) -> np.ndarray:
    return np.diag(ms.cov) / ms.mean**2


def summary_indexes(ms: MomentSummary, tol: Optional[float] = None) -> dict:
    out = {"gvi": gvi(ms), "mvi": mvi(ms)}
    if tol is not None:
        out["class_gvi"] = classify(out["gvi"], tol)
        out["class_mvi"] = classify(out["mvi"], tol)
    return out
