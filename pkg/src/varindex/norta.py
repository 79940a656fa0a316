"""NORTA generation of positive-orthant data with given marginals and correlations.

A standard normal vector ``Z ~ N(0, R_z)`` is pushed through ``Phi`` and the
marginal quantile functions.  ``R_z`` is found pairwise so that the Pearson
correlation of the *output* matches the target; the pair correlation is
evaluated by tensor Gauss-Hermite quadrature and inverted by bisection.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln, log_ndtr, ndtr, ndtri

from ._rng import rng_for
from .core import DataError, Dataset, NumericError

log = logging.getLogger(__name__)


class InfeasibleCorrelationError(NumericError):
    pass


# ---------------------------------------------------------------- marginals

@dataclass(frozen=True)
class MarginalSpec:
    """One marginal law: ``exponential(mean)``, ``lognormal(m, sigma2)`` or ``weibull(alpha, beta)``."""

    kind: str
    params: tuple

    def __post_init__(self):
        p = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", p)
        if self.kind == "exponential":
            if len(p) != 1 or not p[0] > 0:
                raise DataError("exponential marginal needs mean > 0")
        elif self.kind == "lognormal":
            if len(p) != 2 or not np.isfinite(p[0]) or not p[1] > 0:
                raise DataError("lognormal marginal needs real m and sigma2 > 0")
        elif self.kind == "weibull":
            if len(p) != 2 or not (p[0] > 0 and p[1] > 0):
                raise DataError("weibull marginal needs alpha > 0 and beta > 0")
        else:
            raise DataError(f"unknown marginal kind {self.kind!r}")

    @classmethod
    def exponential(cls, mean):
        return cls("exponential", (mean,))

    @classmethod
    def lognormal(cls, m, sigma2):
        return cls("lognormal", (m, sigma2))

    @classmethod
    def weibull(cls, alpha, beta):
        return cls("weibull", (alpha, beta))

    @classmethod
    def from_dict(cls, d: dict) -> "MarginalSpec":
        kind = str(d.get("kind", "")).lower()
        try:
            if kind in ("exponential", "exp"):
                return cls.exponential(d["mean"])
            if kind == "lognormal":
                return cls.lognormal(d["m"], d["sigma2"])
            if kind == "weibull":
                return cls.weibull(d["alpha"], d["beta"])
        except KeyError as exc:
            raise DataError(f"{kind} marginal is missing parameter {exc}") from None
        raise DataError(f"unknown marginal kind {d.get('kind')!r}")

    def to_dict(self) -> dict:
        if self.kind == "exponential":
            return {"kind": "exponential", "mean": self.params[0]}
        if self.kind == "lognormal":
            return {"kind": "lognormal", "m": self.params[0], "sigma2": self.params[1]}
        return {"kind": "weibull", "alpha": self.params[0], "beta": self.params[1]}


def weibull_vi(beta) -> np.ndarray:
    """``Gamma(1+2/b) / Gamma(1+1/b)^2 - 1`` through log-gamma (finite down to tiny ``b``)."""
    b = np.asarray(beta, dtype=float)
    return np.expm1(gammaln(1 + 2 / b) - 2 * gammaln(1 + 1 / b))


def marginal_stats(spec: MarginalSpec) -> dict:
    """Closed-form mean, variance and variation index."""
    if spec.kind == "exponential":
        (theta,) = spec.params
        mean, vi = theta, 1.0
    elif spec.kind == "lognormal":
        m, s2 = spec.params
        mean, vi = float(np.exp(m + s2 / 2)), float(np.expm1(s2))
    else:
        a, b = spec.params
        mean = a * float(np.exp(gammaln(1 + 1 / b)))
        vi = float(weibull_vi(b))
    return {"mean": mean, "variance": vi * mean**2, "vi": vi}


def marginal_cdf(spec: MarginalSpec, y):
    y = np.asarray(y, dtype=float)
    if spec.kind == "exponential":
        return -np.expm1(-y / spec.params[0])
    if spec.kind == "lognormal":
        m, s2 = spec.params
        with np.errstate(divide="ignore"):
            return ndtr((np.log(y) - m) / np.sqrt(s2))
    a, b = spec.params
    return -np.expm1(-((y / a) ** b))


def marginal_quantile(spec: MarginalSpec, u):
    """Inverse CDF; ``u`` must lie strictly inside (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0) | ~(u < 1)):
        raise DataError("u must lie in (0, 1)")
    if spec.kind == "exponential":
        return -spec.params[0] * np.log1p(-u)
    if spec.kind == "lognormal":
        m, s2 = spec.params
        return np.exp(m + np.sqrt(s2) * ndtri(u))
    a, b = spec.params
    return a * (-np.log1p(-u)) ** (1 / b)


def transform_normal(spec: MarginalSpec, z):
    """``Q(Phi(z))`` evaluated without forming ``Phi(z)``, keeping upper-tail precision."""
    z = np.asarray(z, dtype=float)
    if spec.kind == "lognormal":
        m, s2 = spec.params
        return np.exp(m + np.sqrt(s2) * z)
    # -log(1 - Phi(z)) = -log Phi(-z)
    e = -log_ndtr(-z)
    if spec.kind == "exponential":
        return spec.params[0] * e
    a, b = spec.params
    return a * e ** (1 / b)


# ---------------------------------------------------------------- matching

@lru_cache(maxsize=8)
def _hermite(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.hermite.hermgauss(nodes)
    return np.sqrt(2.0) * x, w / np.sqrt(np.pi)


class _PairQuadrature:
    """Pearson correlation of ``(Q_i(Phi(Z1)), Q_j(Phi(Z2)))`` as a function of ``corr(Z1, Z2)``."""

    def __init__(self, spec_i: MarginalSpec, spec_j: MarginalSpec, nodes: int):
        self.z, self.w = _hermite(nodes)
        self.spec_i, self.spec_j = spec_i, spec_j
        fi = transform_normal(spec_i, self.z)
        self.fi = fi
        # moments under the same rule keep r_z = 0 -> 0 and identical margins at r_z = 1 -> 1 exact
        self.mi = self.w @ fi
        self.si = np.sqrt(max(self.w @ (fi - self.mi) ** 2, 0.0))
        fj = transform_normal(spec_j, self.z)
        self.mj = self.w @ fj
        self.sj = np.sqrt(max(self.w @ (fj - self.mj) ** 2, 0.0))

    def __call__(self, r: float) -> float:
        r = float(np.clip(r, -1.0, 1.0))
        z2 = r * self.z[:, None] + np.sqrt(max(1 - r * r, 0.0)) * self.z[None, :]
        fj = transform_normal(self.spec_j, z2)
        e = self.w @ (((self.fi - self.mi)[:, None]) * (fj - self.mj)) @ self.w
        return float(e / (self.si * self.sj))


def _nodes_for(spec_i: MarginalSpec, spec_j: MarginalSpec, nodes: Optional[int]) -> int:
    if nodes is not None:
        return nodes
    heavy = max(marginal_stats(spec_i)["vi"], marginal_stats(spec_j)["vi"]) > 10
    return 128 if heavy else 64


def pair_correlation(spec_i: MarginalSpec, spec_j: MarginalSpec, r_z: float,
                     nodes: Optional[int] = None) -> float:
    """Output Pearson correlation produced by Gaussian correlation ``r_z``."""
    return _PairQuadrature(spec_i, spec_j, _nodes_for(spec_i, spec_j, nodes))(r_z)


def attainable_range(spec_i: MarginalSpec, spec_j: MarginalSpec,
                     nodes: Optional[int] = None) -> tuple[float, float]:
    q = _PairQuadrature(spec_i, spec_j, _nodes_for(spec_i, spec_j, nodes))
    return q(-0.9999), q(0.9999)


def _mc_pair(spec_i, spec_j, r, n, seed):
    g = rng_for(seed, 0x4E4F)
    z1 = g.standard_normal(n)
    z2 = r * z1 + np.sqrt(1 - r * r) * g.standard_normal(n)
    return float(np.corrcoef(transform_normal(spec_i, z1), transform_normal(spec_j, z2))[0, 1])


def _bisect(f, target, iters=60):
    # f is nondecreasing on [-1, 1]
    lo, hi = -1.0, 1.0
    for _ in range(iters):
        mid = (lo + hi) / 2
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def match_gaussian_correlation(spec_i: MarginalSpec, spec_j: MarginalSpec, target_r: float,
                               tol: float = 1e-8, nodes: Optional[int] = None,
                               verify: bool = False, seed: int = 0) -> float:
    """Gaussian correlation whose NORTA image has Pearson correlation ``target_r``.

    Parameters
    ----------
    spec_i, spec_j : MarginalSpec
    target_r : float
        Desired Pearson correlation of the transformed pair.
    tol : float
        Accuracy of the achieved (quadrature) correlation.
    nodes : int, optional
        Gauss-Hermite nodes per axis; 64, or 128 when a marginal VI exceeds 10.
    verify : bool
        Compare the quadrature solution with a 1e5-draw simulation and fall back
        to a 2e5-draw simulated bisection if they disagree by more than 0.01.

    Raises
    ------
    InfeasibleCorrelationError
        If ``target_r`` is outside 0.995 times the attainable interval.
    """
    target_r = float(target_r)
    if target_r == 0:
        return 0.0
    if not -1 < target_r < 1:
        raise DataError("target correlation must lie in (-1, 1)")
    q = _PairQuadrature(spec_i, spec_j, _nodes_for(spec_i, spec_j, nodes))
    lo_r, hi_r = q(-0.9999), q(0.9999)
    if not (0.995 * lo_r < target_r < 0.995 * hi_r):
        raise InfeasibleCorrelationError(
            f"target correlation infeasible for these marginals: {target_r:.4f} not in "
            f"attainable interval [{lo_r:.4f}, {hi_r:.4f}]")
    r_z = _bisect(q, target_r)
    if abs(q(r_z) - target_r) > tol:
        raise NumericError(f"correlation matching did not converge for target {target_r:.4f}")
    if verify:
        check = _mc_pair(spec_i, spec_j, r_z, 100_000, seed)
        if abs(check - target_r) > 0.01:
            log.warning("quadrature and simulation disagree (%.4f vs %.4f); using simulation",
                        q(r_z), check)
            r_z = _bisect(lambda r: _mc_pair(spec_i, spec_j, r, 200_000, seed), target_r, iters=30)
    return float(r_z)


def nearest_pd(matrix, floor: float = 1e-8) -> np.ndarray:
    """Repair a symmetric matrix into a correlation matrix by eigenvalue clipping.

    Matrices whose smallest eigenvalue already exceeds ``floor`` are returned
    unchanged.
    """
    a = np.asarray(matrix, dtype=float)
    a = (a + a.T) / 2
    w, q = np.linalg.eigh(a)
    if w[0] >= floor:
        return a
    out = (q * np.maximum(w, floor)) @ q.T
    out = (out + out.T) / 2
    d = np.sqrt(np.diag(out))
    out = out / np.outer(d, d)
    np.fill_diagonal(out, 1.0)
    change = float(np.max(np.abs(out - a)))
    if change > 0.01:
        warnings.warn(f"correlation matrix repaired; max elementwise change {change:.4f}",
                      stacklevel=2)
    return out


# ---------------------------------------------------------------- scenarios

@dataclass(frozen=True)
class ScenarioSpec:
    marginals: tuple
    target_corr: np.ndarray
    n: int
    seed: int = 0
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        margs = tuple(m if isinstance(m, MarginalSpec) else MarginalSpec.from_dict(m)
                      for m in self.marginals)
        object.__setattr__(self, "marginals", margs)
        r = np.array(self.target_corr, dtype=float)
        k = len(margs)
        if k < 1:
            raise DataError("scenario needs at least one marginal")
        if r.shape != (k, k):
            raise DataError(f"target_corr must be {k}x{k}, got {r.shape}")
        if np.max(np.abs(r - r.T)) > 1e-12:
            raise DataError("target_corr is not symmetric")
        if np.any(np.abs(np.diag(r) - 1) > 1e-12):
            raise DataError("target_corr must have a unit diagonal")
        off = r[~np.eye(k, dtype=bool)]
        if np.any(np.abs(off) >= 1):
            raise DataError("off-diagonal target correlations must lie in (-1, 1)")
        if int(self.n) < 2:
            raise DataError("scenario sample size must be at least 2")
        if not 0 <= int(self.seed) < 2**64:
            raise DataError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "target_corr", r)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def k(self) -> int:
        return len(self.marginals)

    def with_(self, **changes) -> "ScenarioSpec":
        d = {"marginals": self.marginals, "target_corr": self.target_corr, "n": self.n,
             "seed": self.seed, "name": self.name, "meta": self.meta}
        d.update(changes)
        return ScenarioSpec(**d)

    def to_dict(self) -> dict:
        d = {"n": self.n, "seed": self.seed,
             "marginals": [m.to_dict() for m in self.marginals],
             "target_corr": self.target_corr.tolist()}
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        try:
            return cls(marginals=tuple(MarginalSpec.from_dict(m) for m in d["marginals"]),
                       target_corr=d["target_corr"], n=d["n"], seed=d.get("seed", 0),
                       name=d.get("name", ""),
                       meta={k: v for k, v in d.items()
                             if k not in ("marginals", "target_corr", "n", "seed", "name")})
        except KeyError as exc:
            raise DataError(f"scenario is missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"malformed scenario: {exc}") from None


def load_scenario(path) -> ScenarioSpec:
    path = Path(path)
    if not path.exists():
        builtin = Path(__file__).parent / "scenarios" / f"{path.name.removesuffix('.json')}.json"
        if builtin.exists():
            path = builtin
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read scenario {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"scenario {path} is not valid JSON: {exc}") from None
    return ScenarioSpec.from_dict(d)


def builtin_scenarios() -> dict[str, ScenarioSpec]:
    folder = Path(__file__).parent / "scenarios"
    return {p.stem: load_scenario(p) for p in sorted(folder.glob("*.json"))}


@dataclass(frozen=True)
class GaussianPlan:
    """Matched Gaussian correlation matrix plus bookkeeping for the sidecar file."""

    matched: np.ndarray
    repaired: np.ndarray
    repair_change: float
    cholesky: np.ndarray

    def to_dict(self) -> dict:
        return {"matched_gaussian_corr": self.matched.tolist(),
                "repaired_gaussian_corr": self.repaired.tolist(),
                "repair_max_change": self.repair_change}


_PLAN_CACHE: dict = {}


def plan_gaussian(spec: ScenarioSpec, verify: bool = False) -> GaussianPlan:
    key = (tuple(m for m in spec.marginals), spec.target_corr.tobytes(), verify)
    if key in _PLAN_CACHE:
        return _PLAN_CACHE[key]
    k = spec.k
    rz = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            rz[i, j] = rz[j, i] = match_gaussian_correlation(
                spec.marginals[i], spec.marginals[j], spec.target_corr[i, j],
                verify=verify, seed=spec.seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fixed = nearest_pd(rz)
    change = float(np.max(np.abs(fixed - rz)))
    if change > 0.01:
        warnings.warn(f"matched Gaussian correlation repaired; max change {change:.4f}",
                      stacklevel=2)
    try:
        chol = np.linalg.cholesky(fixed)
    except np.linalg.LinAlgError:
        raise NumericError("correlation matrix irreparable") from None
    plan = GaussianPlan(rz, fixed, change, chol)
    _PLAN_CACHE[key] = plan
    return plan


def norta_sample(spec: ScenarioSpec, plan: Optional[GaussianPlan] = None) -> Dataset:
    """Draw ``spec.n`` rows; deterministic in ``spec.seed``."""
    if plan is None:
        plan = plan_gaussian(spec)
    g = rng_for(spec.seed, 0)
    z = g.standard_normal((spec.n, spec.k)) @ plan.cholesky.T
    cols = [transform_normal(m, z[:, j]) for j, m in enumerate(spec.marginals)]
    y = np.column_stack(cols)
    # the exponential/Weibull transforms can underflow to 0 at extreme lower tails
    tiny = np.finfo(float).tiny
    y = np.maximum(y, tiny)
    return Dataset(y)


def scenario_moments(spec: ScenarioSpec):
    """Theoretical moment summary of a scenario (target correlations, closed-form margins)."""
    from .core import MomentSummary

    st = [marginal_stats(m) for m in spec.marginals]
    return MomentSummary.from_corr([s["mean"] for s in st], [s["variance"] for s in st],
                                   spec.target_corr)
