import numpy as np
import pytest

from varindex import Dataset, MomentSummary

REAL4_MEAN = np.array([4.1476, 3.1709, 2.2610, 4.5547])
REAL4_VAR = np.array([1.9630, 0.6049, 0.6330, 8.4074])
REAL4_CORR = np.array([
    [1.0000, 0.9579, 0.9905, 0.3926],
    [0.9579, 1.0000, 0.9552, 0.6002],
    [0.9905, 0.9552, 1.0000, 0.4331],
    [0.3926, 0.6002, 0.4331, 1.0000],
])


def real4_summary() -> MomentSummary:
    return MomentSummary.from_corr(REAL4_MEAN, REAL4_VAR, REAL4_CORR, n=90)


def recolor(mean, cov, n, seed=0, max_tries=200):
    """Strictly positive data whose sample mean and unbiased covariance equal ``(mean, cov)``."""
    mean = np.asarray(mean, float)
    L = np.linalg.cholesky(np.asarray(cov, float))
    for t in range(max_tries):
        w = np.random.default_rng(seed + t).exponential(size=(n, mean.size))
        w -= w.mean(axis=0)
        c = np.cov(w, rowvar=False)
        w = w @ np.linalg.inv(np.linalg.cholesky(c)).T
        y = mean + w @ L.T
        if np.all(y > 0):
            return y
    raise RuntimeError("could not build a positive recoloured sample")


@pytest.fixture
def real4_csv(tmp_path):
    y = recolor(REAL4_MEAN, real4_summary().cov, 90, seed=3)
    path = tmp_path / "real4.csv"
    np.savetxt(path, y, delimiter=",", fmt="%.17g")
    return path


def random_summary(rng, k, corr_scale=1.0):
    m = rng.uniform(0.1, 10, size=k)
    a = rng.normal(size=(k, k + 2))
    cov = a @ a.T * rng.uniform(0.01, 5) * corr_scale
    return MomentSummary(m, cov)


def exp_data(n, k=2, seed=0):
    return Dataset(np.random.default_rng(seed).exponential(size=(n, k)))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num])
