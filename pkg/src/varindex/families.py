"""Closed-form moments, indexes and samplers for the example families.

Canonical index values are always obtained by building a
:class:`~varindex.core.MomentSummary` and calling :func:`~varindex.indexes.gvi`
and :func:`~varindex.indexes.mvi`.  The "excess" forms measure departure from
the uncorrelated exponential reference and equal 1 exactly when the
exponential components are uncorrelated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ._rng import rng_for
from .core import DataError, Dataset, MomentSummary, check_psd, summarize
from .indexes import (IndexValue, VarianceFunction, VariationClass, bivariate_decomposition,
                      classify, gvi, mvi)
from .norta import MarginalSpec, ScenarioSpec, norta_sample, weibull_vi


def _positive_vector(x, what):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DataError(f"{what} must be a vector of strictly positive numbers")
    return x


def mc_indexes(data: Dataset, batches: int = 20) -> dict:
    """GVI/MVI of the full sample with batch-means Monte-Carlo standard errors."""
    ms = summarize(data)
    parts = np.array_split(data.values, batches)
    g = np.array([float(gvi(summarize(Dataset(p)))) for p in parts])
    m = np.array([float(mvi(summarize(Dataset(p)))) for p in parts])
    return {"gvi": float(gvi(ms)), "mvi": float(mvi(ms)),
            "se_gvi": float(g.std(ddof=1) / np.sqrt(batches)),
            "se_mvi": float(m.std(ddof=1) / np.sqrt(batches)),
            "summary": ms}


# ------------------------------------------------------- exponential E_k(mu, rho)

@dataclass(frozen=True)
class ExpFamilyParams:
    """Rates ``mu`` (marginal means ``1/mu``) and correlation matrix ``rho``."""

    mu: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        mu = _positive_vector(self.mu, "rates mu")
        rho = np.atleast_2d(np.asarray(self.rho, dtype=float))
        k = mu.size
        if rho.shape != (k, k):
            raise DataError(f"rho must be {k}x{k}")
        if np.max(np.abs(rho - rho.T)) > 1e-12 or np.any(np.abs(np.diag(rho) - 1) > 1e-12):
            raise DataError("rho must be symmetric with unit diagonal")
        if np.any(np.abs(rho) > 1):
            raise DataError("correlations must lie in [-1, 1]")
        check_psd(rho, "rho")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "rho", rho)


def exp_moments(p: ExpFamilyParams) -> MomentSummary:
    m = 1 / p.mu
    return MomentSummary(m, p.rho * np.outer(m, m))


def exp_excess_gvi(p: ExpFamilyParams) -> IndexValue:
    """``1 + sum_{i != j} rho_ij m_i^2 m_j^2 / (m'm)^2`` with ``m = 1/mu``."""
    m2 = (1 / p.mu) ** 2
    off = p.rho - np.eye(p.mu.size)
    return IndexValue(1 + float(m2 @ off @ m2) / m2.sum() ** 2, "GVI")


def exp_sample(p: ExpFamilyParams, n: int, seed: int = 0) -> Dataset:
    """Exponential margins with Pearson correlation ``rho`` via NORTA."""
    spec = ScenarioSpec(tuple(MarginalSpec.exponential(1 / r) for r in p.mu), p.rho, n, seed)
    return norta_sample(spec)


# ------------------------------------------------------------ Marshall-Olkin

@dataclass(frozen=True)
class MarshallOlkinParams:
    mu: np.ndarray
    mu0: float

    def __post_init__(self):
        object.__setattr__(self, "mu", _positive_vector(self.mu, "rates mu"))
        if not (np.isfinite(self.mu0) and self.mu0 >= 0):
            raise DataError("common-shock rate mu0 must be >= 0")
        object.__setattr__(self, "mu0", float(self.mu0))


def mo_moments(p: MarshallOlkinParams) -> MomentSummary:
    """Moments of ``Y_j = min(X_j, Z)`` with ``X_j ~ Exp(mu_j)``, ``Z ~ Exp(mu0)``."""
    a = p.mu + p.mu0
    m = 1 / a
    cov = p.mu0 / (np.outer(a, a) * (p.mu[:, None] + p.mu[None, :] + p.mu0))
    np.fill_diagonal(cov, m * m)
    return MomentSummary(m, cov)


def mo_indexes(p: MarshallOlkinParams) -> dict:
    ms = mo_moments(p)
    m, cov = ms.mean, ms.cov
    off = cov - np.diag(np.diag(cov))
    excess = 1 + float(m @ off @ m) / (m @ m) ** 2
    return {"gvi": gvi(ms), "mvi": mvi(ms), "excess_gvi": IndexValue(excess, "GVI")}


def mo_sample(p: MarshallOlkinParams, n: int, seed: int = 0) -> Dataset:
    g = rng_for(seed, 0)
    x = g.exponential(1.0, size=(n, p.mu.size)) / p.mu
    if p.mu0 > 0:
        z = g.exponential(1.0, size=(n, 1)) / p.mu0
        x = np.minimum(x, z)
    return Dataset(x)


# ------------------------------------------------------- Arnold-Ng bivariate beta

@dataclass(frozen=True)
class ArnoldNgParams:
    alpha0: float
    alpha1: float
    alpha2: float
    alpha1p: float
    alpha2p: float

    def __post_init__(self):
        vals = (self.alpha0, self.alpha1, self.alpha2, self.alpha1p, self.alpha2p)
        if any(not (np.isfinite(v) and v >= 0) for v in vals):
            raise DataError("Arnold-Ng parameters must be nonnegative")

    def shapes(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.array([self.alpha1 + self.alpha1p, self.alpha2 + self.alpha2p])
        tot = self.alpha0 + self.alpha1p + self.alpha2p
        b = np.array([tot - self.alpha1p, tot - self.alpha2p])
        return a, b


def an_margin_stats(p: ArnoldNgParams) -> list[dict]:
    """Mean and VI of the two Beta(a_j, b_j) margins (exact beta moments)."""
    a, b = p.shapes()
    if np.any(a <= 0) or np.any(b <= 0):
        raise DataError("degenerate beta margin")
    mean = a / (a + b)
    vi = b / (a * (a + b + 1))
    return [{"mean": float(mean[j]), "vi": float(vi[j]), "a": float(a[j]), "b": float(b[j])}
            for j in range(2)]


def _gamma_or_zero(g, shape, n):
    return g.standard_gamma(shape, size=n) if shape > 0 else np.zeros(n)


def an_sample(p: ArnoldNgParams, n: int, seed: int = 0) -> Dataset:
    """``Y_j = (U_j + V_j) / (U_j + V_1 + V_2 + W)`` with independent unit-scale gammas."""
    an_margin_stats(p)
    g = rng_for(seed, 0)
    u1 = _gamma_or_zero(g, p.alpha1, n)
    u2 = _gamma_or_zero(g, p.alpha2, n)
    v1 = _gamma_or_zero(g, p.alpha1p, n)
    v2 = _gamma_or_zero(g, p.alpha2p, n)
    w = _gamma_or_zero(g, p.alpha0, n)
    y1 = (u1 + v1) / (u1 + v1 + v2 + w)
    y2 = (u2 + v2) / (u2 + v1 + v2 + w)
    return Dataset(np.column_stack([y1, y2]))


def an_indexes_mc(p: ArnoldNgParams, n: int, seed: int = 0) -> dict:
    if n < 1000:
        raise DataError("Monte-Carlo evaluation needs n >= 1000")
    data = an_sample(p, n, seed)
    r = mc_indexes(data)
    ms = r.pop("summary")
    rho = ms.cov[0, 1] / np.sqrt(ms.cov[0, 0] * ms.cov[1, 1])
    r["rho"] = float(rho)
    r["mc_se"] = r["se_gvi"]
    return r


def an_mvi_exact(p: ArnoldNgParams) -> float:
    st = an_margin_stats(p)
    m = np.array([s["mean"] for s in st])
    vi = np.array([s["vi"] for s in st])
    return float(np.sum(m**4 * vi) / np.sum(m**2) ** 2)


# ------------------------------------------------- Teimouri-Gupta bivariate Weibull

@dataclass(frozen=True)
class TeimouriGuptaParams:
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    gamma: float
    delta: float

    def __post_init__(self):
        if not (self.alpha1 > 0 and self.alpha2 > 0):
            raise DataError("Weibull scales must be positive")
        if not (self.beta1 > 0 and self.beta2 > 0):
            raise DataError("Weibull shapes must be positive")
        if not self.gamma > 1:
            raise DataError("gamma must exceed 1")
        if not 0 <= self.delta <= 1:
            raise DataError("delta must lie in [0, 1]")


def tg_margin_stats(p: TeimouriGuptaParams) -> list[dict]:
    out = []
    for a, b in ((p.alpha1, p.beta1), (p.alpha2, p.beta2)):
        out.append({"mean": a * float(np.exp(gammaln(1 + 1 / b))), "vi": float(weibull_vi(b))})
    return out


def tg_correlation(p: TeimouriGuptaParams) -> float:
    """Closed-form correlation of the bivariate Weibull."""
    g = p.gamma
    c1, c2 = 1 / p.beta1, 1 / p.beta2
    b1 = g ** (-1 - c1) - (g + 1) ** (-1 - c1)
    b2 = g ** (-1 - c2) - (g + 1) ** (-1 - c2)
    bracket = (g ** (-2 - c1 - c2)
               - (g + 1) * g ** (-1 - c1) * b2
               - (g + 1) * g ** (-1 - c2) * b1
               + (g + 1) ** 2 * b1 * b2)
    lg1, lg2 = gammaln(1 + c1), gammaln(1 + c2)
    # Gamma(1+2c) - Gamma(1+c)^2 = Gamma(1+c)^2 * VI
    sd = np.exp(lg1 + lg2) * np.sqrt(weibull_vi(p.beta1) * weibull_vi(p.beta2))
    return float(p.delta * np.exp(lg1 + lg2) * bracket / sd)


def tg_moments(p: TeimouriGuptaParams) -> MomentSummary:
    st = tg_margin_stats(p)
    m = np.array([s["mean"] for s in st])
    var = np.array([s["vi"] for s in st]) * m**2
    r = tg_correlation(p)
    return MomentSummary.from_corr(m, var, [[1, r], [r, 1]])


def tg_indexes(p: TeimouriGuptaParams) -> dict:
    """GVI via the bivariate decomposition, MVI from the margins."""
    st = tg_margin_stats(p)
    d = bivariate_decomposition(tg_moments(p))
    return {"gvi": IndexValue(d["gvi"], "GVI"), "mvi": IndexValue(d["mvi"], "MVI"),
            "cross": d["cross"], "rho": tg_correlation(p),
            "margins": st}


def _tg_phi(t, g):
    return (g + 1) * np.exp(-g * t) - g * np.exp(-(g - 1) * t)


def tg_sample(p: TeimouriGuptaParams, n: int, seed: int = 0) -> Dataset:
    """Rejection sampler on the unit-exponential scale.

    With ``T_j = (Y_j / alpha_j)^beta_j`` the joint density is
    ``exp(-t1 - t2) (1 + delta phi(t1) phi(t2))`` where
    ``phi(t) = (gamma + 1) e^{-gamma t} - gamma e^{-(gamma - 1) t}`` has zero mean
    under Exp(1) and ``|phi| <= 1``; proposals are i.i.d. Exp(1) pairs accepted
    with probability ``(1 + delta phi phi) / (1 + delta)``.
    """
    g = rng_for(seed, 0)
    out = np.empty((0, 2))
    while out.shape[0] < n:
        m = int(1.1 * (1 + p.delta) * (n - out.shape[0])) + 16
        t = g.exponential(size=(m, 2))
        acc = (1 + p.delta * _tg_phi(t[:, 0], p.gamma) * _tg_phi(t[:, 1], p.gamma))
        keep = g.random(m) * (1 + p.delta) < acc
        out = np.vstack([out, t[keep]])
    t = out[:n]
    y = np.column_stack([p.alpha1 * t[:, 0] ** (1 / p.beta1), p.alpha2 * t[:, 1] ** (1 / p.beta2)])
    return Dataset(np.maximum(y, np.finfo(float).tiny))


def weibull_shape_ratio(beta) -> np.ndarray:
    """``beta Gamma(2/beta) / Gamma(1/beta)^2`` (equals ``(1 + VI)/2``)."""
    b = np.asarray(beta, dtype=float)
    return np.exp(np.log(b) + gammaln(2 / b) - 2 * gammaln(1 / b))


def weibull_variation_class(beta: float, tol: float = 0.05) -> VariationClass:
    if not beta > 0:
        raise DataError("beta must be positive")
    return classify(float(weibull_vi(beta)), tol)


# ------------------------------------------------------------------- MST

@dataclass(frozen=True)
class MstParams:
    p: np.ndarray
    lam: float = 1.0

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if p.size < 1 or not p[0] >= 1:
            raise DataError("MST needs p_1 >= 1")
        rest = p[1:]
        if np.any(~((rest == 0) | (rest >= 1))):
            raise DataError("MST needs p_j in {0} or [1, inf) for j >= 2")
        if not self.lam > 0:
            raise DataError("lambda must be positive")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "lam", float(self.lam))


def mst_variance_function(p: MstParams) -> VarianceFunction:
    """``lam^(1-p1) m1^(p1-2) m m' + diag(0, m1^(1-p2) m2^p2, ..., m1^(1-pk) mk^pk)``."""
    pw = p.p
    lam = p.lam

    def V(m):
        m = np.asarray(m, dtype=float)
        if m.size != pw.size:
            raise DataError(f"mean vector must have length {pw.size}")
        lead = lam ** (1 - pw[0]) * m[0] ** (pw[0] - 2)
        diag = np.zeros(m.size)
        diag[1:] = m[0] ** (1 - pw[1:]) * m[1:] ** pw[1:]
        return lead * np.outer(m, m) + np.diag(diag)

    return VarianceFunction(V, lambda m: bool(np.all(np.asarray(m) > 0)), f"MST{tuple(pw)}")


# --------------------------------------------------------- Tweedie exponential bounds

@dataclass(frozen=True)
class VariationMatrix:
    lam: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.lam, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise DataError("variation matrix must be square")
        if np.max(np.abs(a - a.T)) > 1e-12 * max(np.max(np.abs(a)), 1e-300):
            raise DataError("variation matrix must be symmetric")
        if np.any(np.diag(a) <= 0):
            raise DataError("diagonal of the variation matrix must be positive")
        if np.any(a < 0):
            raise DataError("off-diagonal entries must be nonnegative")
        object.__setattr__(self, "lam", a)


def _row_bound(lam: np.ndarray, i: int, j: int) -> float:
    others = [l for l in range(lam.shape[0]) if l not in (i, j)]
    mass = lam[i, others].sum() / lam[i, i]
    return float(np.sqrt(lam[i, i] / lam[j, j]) * (1 - mass))


def tweedie_exp_corr_bounds(vm: VariationMatrix) -> dict:
    """Upper correlation bounds ``min(R(i,j), R(j,i))`` and validity of the implied correlations."""
    lam = vm.lam
    k = lam.shape[0]
    bound = np.ones((k, k))
    R = np.ones((k, k))
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            R[i, j] = _row_bound(lam, i, j)
            if R[i, j] <= 0:
                raise DataError(f"invalid variation matrix (row mass too large) for pair "
                                f"({i + 1}, {j + 1})")
    bound = np.minimum(R, R.T)
    np.fill_diagonal(bound, 1.0)
    d = np.sqrt(np.diag(lam))
    rho = lam / np.outer(d, d)
    valid = (rho >= 0) & (rho < bound)
    np.fill_diagonal(valid, True)
    return {"R": R, "bound": bound, "rho": rho, "valid": valid}
