import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import kstest

from varindex import (DataError, InfeasibleCorrelationError, MarginalSpec, ScenarioSpec,
                      gvi, load_scenario, marginal_quantile, marginal_stats,
                      match_gaussian_correlation, mvi, nearest_pd, norta_sample, summarize)
from varindex.norta import (attainable_range, builtin_scenarios, marginal_cdf, pair_correlation,
                            plan_gaussian, transform_normal)

EXP1 = MarginalSpec.exponential(1.0)
LN = MarginalSpec.lognormal(0.0, 1.0)
WB = MarginalSpec.weibull(2.0, 0.7)
KINDS = [EXP1, LN, WB, MarginalSpec.weibull(1.0, 3.0), MarginalSpec.lognormal(0.5, 0.1)]


def test_marginal_stats_examples():
    assert marginal_stats(MarginalSpec.lognormal(3.3, np.log(2)))["vi"] == pytest.approx(1.0)
    for theta in (0.1, 1.0, 7.0):
        st_ = marginal_stats(MarginalSpec.exponential(theta))
        assert st_["vi"] == 1 and st_["mean"] == theta
    assert marginal_stats(LN)["vi"] == pytest.approx(np.e - 1)


def test_marginal_quantile_examples():
    u = 1 - np.exp(-1)
    assert marginal_quantile(EXP1, u) == pytest.approx(1.0)
    assert marginal_quantile(MarginalSpec.weibull(2.0, 1.0), u) == pytest.approx(2.0)
    assert marginal_quantile(LN, 0.5) == pytest.approx(1.0)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DataError):
            marginal_quantile(EXP1, bad)


@pytest.mark.parametrize("spec", KINDS)
def test_quantile_monotone_and_inverse(spec):
    u = np.linspace(1e-6, 1 - 1e-6, 2001)
    q = marginal_quantile(spec, u)
    assert np.all(np.diff(q) > 0)
    np.testing.assert_allclose(marginal_cdf(spec, q), u, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("spec", KINDS)
def test_transform_normal_matches_quantile(spec):
    from scipy.special import ndtr
    z = np.linspace(-6, 6, 101)
    np.testing.assert_allclose(transform_normal(spec, z), marginal_quantile(spec, ndtr(z)),
                               rtol=1e-8)


def test_marginal_spec_validation():
    with pytest.raises(DataError):
        MarginalSpec.exponential(0)
    with pytest.raises(DataError):
        MarginalSpec.lognormal(0, -1)
    with pytest.raises(DataError):
        MarginalSpec("gamma", (1.0,))
    assert MarginalSpec.from_dict(WB.to_dict()) == WB


def test_match_examples():
    for a in KINDS:
        assert match_gaussian_correlation(a, WB, 0.0) == 0.0
    rz = match_gaussian_correlation(LN, LN, 0.9)
    assert rz >= 0.9
    assert pair_correlation(LN, LN, rz) == pytest.approx(0.9, abs=1e-8)


def test_match_exponential_pair_monte_carlo():
    rz = match_gaussian_correlation(EXP1, EXP1, 0.5)
    spec = ScenarioSpec((EXP1, EXP1), [[1, 0.5], [0.5, 1]], 100_000, seed=8)
    d = norta_sample(spec)
    assert np.corrcoef(d.values, rowvar=False)[0, 1] == pytest.approx(0.5, abs=0.01)
    assert rz > 0.5


def test_infeasible_target():
    lo, hi = attainable_range(EXP1, EXP1)
    assert lo > -0.7 and hi > 0.999
    with pytest.raises(InfeasibleCorrelationError, match="infeasible") as e:
        match_gaussian_correlation(EXP1, EXP1, -0.9)
    assert f"{lo:.4f}" in str(e.value)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(KINDS), st.sampled_from(KINDS), st.floats(-0.95, 0.95))
def test_match_achieves_target(a, b, target):
    lo, hi = attainable_range(a, b)
    if not 0.995 * lo < target < 0.995 * hi:
        return
    rz = match_gaussian_correlation(a, b, target)
    assert pair_correlation(a, b, rz) == pytest.approx(target, abs=1e-8)
    assert abs(target) <= abs(rz) + 1e-9


@pytest.mark.parametrize("a,b", [(EXP1, LN), (LN, WB), (WB, KINDS[3])])
def test_map_is_monotone(a, b):
    grid = np.linspace(-0.999, 0.999, 81)
    vals = [pair_correlation(a, b, r) for r in grid]
    assert np.all(np.diff(vals) >= -1e-12)


def test_verify_option_agrees():
    rz = match_gaussian_correlation(EXP1, WB, 0.4)
    assert match_gaussian_correlation(EXP1, WB, 0.4, verify=True, seed=3) == rz


def test_nearest_pd_examples():
    a = np.array([[1, 0.3, 0.1], [0.3, 1, -0.2], [0.1, -0.2, 1]])
    np.testing.assert_allclose(nearest_pd(a), a, atol=1e-12)
    with pytest.warns(UserWarning, match="repaired"):
        fixed = nearest_pd(np.array([[1, 1.2], [1.2, 1]]))
    assert -1 < fixed[0, 1] < 1 and np.allclose(np.diag(fixed), 1)
    assert np.linalg.eigvalsh(fixed).min() >= 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_nearest_pd_property(seed, k):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1, 1, (k, k))
    a = (a + a.T) / 2
    np.fill_diagonal(a, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = nearest_pd(a)
    assert np.linalg.eigvalsh(out).min() >= -1e-12
    np.testing.assert_allclose(np.diag(out), 1, rtol=1e-12)


def test_scenario_validation():
    with pytest.raises(DataError):
        ScenarioSpec((EXP1, EXP1), [[1, 0.5], [0.4, 1]], 10)
    with pytest.raises(DataError):
        ScenarioSpec((EXP1, EXP1), [[1, 1.0], [1.0, 1]], 10)
    with pytest.raises(DataError):
        ScenarioSpec((EXP1,), [[2.0]], 10)
    with pytest.raises(DataError):
        ScenarioSpec.from_dict({"n": 10, "marginals": [{"kind": "exponential"}],
                                "target_corr": [[1]]})


def test_scenario_json_roundtrip(tmp_path):
    spec = load_scenario("six_variate")
    p = tmp_path / "s.json"
    p.write_text(json.dumps(spec.to_dict()))
    back = load_scenario(p)
    assert back.marginals == spec.marginals and np.array_equal(back.target_corr, spec.target_corr)
    assert (back.n, back.seed) == (spec.n, spec.seed)


def test_builtin_scenarios_are_feasible():
    for name, spec in builtin_scenarios().items():
        plan = plan_gaussian(spec)
        assert plan.repair_change == 0, name


def test_determinism_and_seed_sensitivity():
    spec = load_scenario("three_variate_under").with_(n=500)
    a, b = norta_sample(spec), norta_sample(spec)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, norta_sample(spec.with_(seed=spec.seed + 1)).values)


def test_independent_exponentials():
    spec = ScenarioSpec((EXP1, MarginalSpec.exponential(3.0)), np.eye(2), 100_000, seed=1)
    d = norta_sample(spec)
    assert abs(np.corrcoef(d.values, rowvar=False)[0, 1]) < 0.02
    vi = np.var(d.values, axis=0, ddof=1) / d.values.mean(axis=0) ** 2
    np.testing.assert_allclose(vi, 1, atol=0.03)


def test_bivariate_no2_sign_pattern():
    spec = load_scenario("bivariate_no02").with_(n=100_000)
    ms = summarize(norta_sample(spec))
    assert gvi(ms) < mvi(ms)


def test_six_variate_determinant():
    spec = load_scenario("six_variate")
    assert np.linalg.det(spec.target_corr) == pytest.approx(0.2051, abs=5e-5)
    d = norta_sample(spec.with_(n=100_000))
    assert abs(np.linalg.det(np.corrcoef(d.values, rowvar=False)) - 0.21) <= 0.05


def test_round_trip_marginals_and_correlations():
    spec = load_scenario("four_variate_over").with_(n=100_000, seed=99)
    d = norta_sample(spec)
    for j, m in enumerate(spec.marginals):
        st_ = marginal_stats(m)
        col = d.values[:, j]
        assert col.mean() == pytest.approx(st_["mean"], rel=0.03)
        assert np.var(col, ddof=1) / col.mean() ** 2 == pytest.approx(st_["vi"], rel=0.03)
    assert np.max(np.abs(np.corrcoef(d.values, rowvar=False) - spec.target_corr)) <= 0.03


def test_permuted_marginals_permute_structure():
    spec = load_scenario("three_variate_under").with_(n=100_000)
    perm = [2, 0, 1]
    pspec = spec.with_(marginals=tuple(spec.marginals[i] for i in perm),
                       target_corr=spec.target_corr[np.ix_(perm, perm)])
    a = norta_sample(spec).values
    b = norta_sample(pspec).values
    np.testing.assert_allclose(np.corrcoef(b, rowvar=False),
                               np.corrcoef(a, rowvar=False)[np.ix_(perm, perm)], atol=0.02)
    for jb, ja in enumerate(perm):
        m = spec.marginals[ja]
        assert kstest(b[:, jb], lambda y: marginal_cdf(m, y)).pvalue > 1e-3
