"""Data ingestion, validation and moment computation.

Every index in the package is computed from a :class:`MomentSummary`; the
empirical ones come from :func:`summarize`, the analytic ones are built
directly by the family calculators.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class VarIndexError(ValueError):
    """Base class for all errors raised by the package."""


class DataError(VarIndexError):
    """Invalid input data, parameters or specification."""


class NumericError(VarIndexError):
    """A numerical procedure failed or produced a non-finite result."""


SYM_RTOL = 1e-12
PSD_RTOL = 1e-10


def check_symmetric(a: np.ndarray, what: str = "matrix") -> None:
    scale = max(float(np.max(np.abs(a))), np.finfo(float).tiny)
    if np.max(np.abs(a - a.T)) > SYM_RTOL * scale:
        raise DataError(f"{what} is not symmetric")


def check_psd(a: np.ndarray, what: str = "matrix") -> None:
    ev = np.linalg.eigvalsh(a)
    if ev.size and ev[0] < -PSD_RTOL * max(abs(ev[-1]), abs(ev[0])):
        raise DataError(f"{what} is not positive semi-definite (min eigenvalue {ev[0]:.3g})")


@dataclass(frozen=True)
class Dataset:
    """An ``n x k`` matrix of strictly positive observations (rows are observations)."""

    values: np.ndarray
    names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] < 1:
            raise DataError("dataset must be a 2-d array with at least one column")
        if v.shape[0] < 2:
            raise DataError(f"insufficient sample: n={v.shape[0]} < 2")
        bad = ~np.isfinite(v)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise DataError(f"non-finite value at row {i + 1}, column {j + 1}")
        bad = v <= 0
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise DataError(f"nonpositive value {v[i, j]!r} at row {i + 1}, column {j + 1}")
        if self.names is not None:
            if len(self.names) != v.shape[1]:
                raise DataError("number of names does not match number of columns")
            object.__setattr__(self, "names", tuple(self.names))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class MomentSummary:
    """Mean vector, covariance matrix and (optionally) the sample size."""

    mean: np.ndarray
    cov: np.ndarray
    n: Optional[int] = None
    names: Optional[tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        m = np.atleast_1d(np.array(self.mean, dtype=float))
        c = np.atleast_2d(np.array(self.cov, dtype=float))
        k = m.shape[0]
        if m.ndim != 1 or c.shape != (k, k):
            raise DataError(f"mean of length {k} incompatible with cov of shape {c.shape}")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(c))):
            raise DataError("moment summary contains non-finite values")
        if np.any(m <= 0):
            raise DataError("mean vector must be strictly positive")
        check_symmetric(c, "covariance matrix")
        if np.any(np.diag(c) < 0):
            raise DataError("covariance matrix has a negative variance")
        check_psd(c, "covariance matrix")
        if self.n is not None and int(self.n) < 1:
            raise DataError("sample size must be positive")
        m.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "cov", c)

    @property
    def k(self) -> int:
        return self.mean.shape[0]

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.cov).copy()

    @classmethod
    def from_corr(cls, mean, variances, corr, n=None) -> "MomentSummary":
        """Build a summary from marginal variances and a correlation matrix."""
        sd = np.sqrt(np.asarray(variances, dtype=float))
        corr = np.asarray(corr, dtype=float)
        return cls(mean, corr * np.outer(sd, sd), n)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist(), "n": self.n}

    @classmethod
    def from_dict(cls, d: dict) -> "MomentSummary":
        try:
            return cls(d["mean"], d["cov"], d.get("n"))
        except KeyError as exc:
            raise DataError(f"moment summary JSON is missing {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MomentSummary":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class AugmentedMoments:
    """Sample covariances of the augmented vectors.

    ``gamma`` is the covariance of ``(Y, Y_1Y_1, Y_1Y_2, ..., Y_kY_k)`` (upper
    triangle of ``YY^T`` in row-major order) and ``pi`` the covariance of
    ``(Y, Y_1^2, ..., Y_k^2)``.
    """

    gamma: np.ndarray
    pi: np.ndarray


def pair_indices(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs ``(j, l)`` with ``l >= j`` in the order (1,1),(1,2),...,(1,k),(2,2),...,(k,k)."""
    return np.triu_indices(k)


def load_csv(path, has_header: bool = False) -> Dataset:
    """Read a comma-separated numeric file into a :class:`Dataset`.

    Errors name the offending (1-based) line and column.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise DataError(f"{path} is not valid UTF-8") from None
    names = None
    offset = 1
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        names = tuple(c.strip() for c in rows[0])
        rows = rows[1:]
        offset = 2
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(names) if names is not None else len(rows[0])
    values = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        line = i + offset
        if len(row) != width:
            raise DataError(f"{path}: row {line} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row):
            try:
                x = float(cell)
            except ValueError:
                raise DataError(f"{path}: cannot parse {cell.strip()!r} at row {line}, column {j + 1}") from None
            if not np.isfinite(x):
                raise DataError(f"{path}: non-finite value at row {line}, column {j + 1}")
            if x <= 0:
                raise DataError(f"{path}: nonpositive value {cell.strip()} at row {line}, column {j + 1}")
            values[i, j] = x
    return Dataset(values, names)


def write_csv(data: Dataset, path, precision: int = 17) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if data.names is not None:
            w.writerow(data.names)
        for row in data.values:
            w.writerow([f"{x:.{precision}g}" for x in row])


def _unbiased_cov(x: np.ndarray) -> np.ndarray:
    # two-pass: centre first, then accumulate products
    xc = x - x.mean(axis=0)
    c = xc.T @ xc / (x.shape[0] - 1)
    return (c + c.T) / 2


def _cross_cov(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    return xc.T @ yc / (x.shape[0] - 1)


def _as_values(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.values
    return Dataset(data).values


def summarize(data) -> MomentSummary:
    """Column means and unbiased sample covariance of a dataset."""
    y = _as_values(data)
    n = y.shape[0]
    if n < 2:
        raise DataError("insufficient sample")
    names = data.names if isinstance(data, Dataset) else None
    return MomentSummary(y.mean(axis=0), _unbiased_cov(y), n, names)


def correlation_from_cov(ms) -> np.ndarray:
    """Correlation matrix implied by a covariance matrix (or a :class:`MomentSummary`)."""
    cov = ms.cov if isinstance(ms, MomentSummary) else np.asarray(ms, dtype=float)
    d = np.diag(cov)
    if np.any(d <= 0):
        j = int(np.argmax(d <= 0))
        raise NumericError(f"degenerate marginal: zero variance in column {j + 1}")
    sd = np.sqrt(d)
    r = cov / np.outer(sd, sd)
    over = np.abs(r) - 1
    if np.any(over > 1e-12):
        raise NumericError("correlation outside [-1, 1]")
    r = np.clip(r, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return r


def augmented_moments(data, centered: bool = False) -> AugmentedMoments:
    """Sample covariance matrices of the augmented vectors ``Z`` and ``W``.

    Parameters
    ----------
    data : Dataset or array_like
    centered : bool
        If True the second-order products are formed from column-centred data,
        ``(Y_j - Ybar_j)(Y_l - Ybar_l)``.  The default uses raw products
        ``Y_j Y_l`` as in the classical construction.

    Returns
    -------
    AugmentedMoments
        The top-left ``k x k`` blocks of both matrices are exactly
        ``summarize(data).cov``.
    """
    y = _as_values(data)
    n, k = y.shape
    if n < 2:
        raise DataError("insufficient sample")
    with np.errstate(over="ignore", invalid="ignore"):
        if not np.all(np.isfinite(np.max(y, axis=0) ** 4)):
            raise NumericError("magnitude overflow, rescale data")
    base = y - y.mean(axis=0) if centered else y
    jj, ll = pair_indices(k)
    prods = base[:, jj] * base[:, ll]
    squares = base * base
    sigma = _unbiased_cov(y)

    g3 = _cross_cov(prods, y)
    g4 = _unbiased_cov(prods)
    gamma = np.block([[sigma, g3.T], [g3, g4]])

    p3 = _cross_cov(squares, y)
    p4 = _unbiased_cov(squares)
    pi = np.block([[sigma, p3.T], [p3, p4]])
    if not (np.all(np.isfinite(gamma)) and np.all(np.isfinite(pi))):
        raise NumericError("magnitude overflow, rescale data")
    return AugmentedMoments(gamma, pi)


def as_dataset(values: Sequence, names: Optional[Sequence[str]] = None) -> Dataset:
    return Dataset(np.asarray(values, dtype=float), None if names is None else tuple(names))
