import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from varindex import (DataError, Dataset, MomentSummary, NumericError, augmented_moments,
                      correlation_from_cov, load_csv, summarize, write_csv)
from varindex.core import pair_indices

from conftest import REAL4_CORR, real4_summary

positive = st.floats(0.01, 100, allow_nan=False)
datasets = st.integers(1, 4).flatmap(
    lambda k: arrays(float, st.tuples(st.integers(3, 30), st.just(k)), elements=positive))


def test_load_csv_basic(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("1.0,2.0\n2.0,1.0\n3.0,3.0")
    d = load_csv(p)
    assert (d.n, d.k) == (3, 2)


def test_load_csv_header(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x,y\n1,2\n3,4\n")
    d = load_csv(p, has_header=True)
    assert d.names == ("x", "y")
    assert d.values.tolist() == [[1, 2], [3, 4]]


@pytest.mark.parametrize("body, needle", [
    ("1,2\n0.0,1\n", "nonpositive value"),
    ("1,2\n-3,1\n", "nonpositive value"),
    ("1,2\n3\n", "row 2"),
    ("1,2\nabc,1\n", "row 2"),
    ("1,2\n,1\n", "row 2"),
    ("1,2\nnan,1\n", "row 2"),
])
def test_load_csv_errors(tmp_path, body, needle):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(DataError, match=needle):
        load_csv(p)


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "nope.csv")


def test_csv_roundtrip(tmp_path):
    y = np.random.default_rng(1).gamma(2.0, size=(20, 3))
    p = tmp_path / "r.csv"
    write_csv(Dataset(y, ("a", "b", "c")), p)
    back = load_csv(p, has_header=True)
    assert np.array_equal(back.values, y)
    assert back.names == ("a", "b", "c")


def test_dataset_needs_two_rows():
    with pytest.raises(DataError, match="insufficient sample"):
        Dataset(np.array([[1.0, 2.0]]))


def test_summarize_examples():
    ms = summarize(Dataset(np.array([[1.0], [3.0]])))
    assert ms.mean.tolist() == [2.0] and ms.cov.tolist() == [[2.0]]
    ms = summarize(Dataset(np.array([[1.0, 2], [2, 1], [3, 3]])))
    np.testing.assert_allclose(ms.mean, [2, 2])
    np.testing.assert_allclose(ms.cov, [[1, 0.5], [0.5, 1]], atol=1e-15)
    ms = summarize(Dataset(np.full((5, 2), 3.7)))
    assert not np.any(ms.cov)


def test_correlation_examples():
    assert np.array_equal(correlation_from_cov(np.diag([2.0, 5.0])), np.eye(2))
    assert correlation_from_cov(np.array([[4.0, 2], [2, 4]]))[0, 1] == pytest.approx(0.5)
    np.testing.assert_allclose(correlation_from_cov(real4_summary()), REAL4_CORR, atol=1e-12)
    with pytest.raises(NumericError, match="degenerate marginal"):
        correlation_from_cov(np.diag([1.0, 0.0]))


def test_augmented_k1_example():
    am = augmented_moments(Dataset(np.array([[1.0], [3.0]])))
    np.testing.assert_allclose(am.gamma, [[2, 8], [8, 32]])
    np.testing.assert_allclose(am.pi, [[2, 8], [8, 32]])


def test_augmented_degenerate():
    am = augmented_moments(Dataset(np.full((4, 3), 2.0)))
    assert not np.any(am.gamma) and not np.any(am.pi)


def test_augmented_shapes_and_ordering():
    y = np.random.default_rng(0).gamma(3.0, size=(50, 3))
    am = augmented_moments(Dataset(y))
    assert am.gamma.shape == (9, 9) and am.pi.shape == (6, 6)
    jj, ll = pair_indices(3)
    assert list(zip(jj.tolist(), ll.tolist())) == [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
    z = np.column_stack([y, y[:, jj] * y[:, ll]])
    np.testing.assert_allclose(am.gamma, np.cov(z, rowvar=False), rtol=1e-10)


def test_augmented_overflow():
    with pytest.raises(NumericError, match="magnitude overflow"):
        augmented_moments(Dataset(np.array([[1e100], [2e100]])))


def test_moment_summary_validation():
    with pytest.raises(DataError):
        MomentSummary([1, -1], np.eye(2))
    with pytest.raises(DataError):
        MomentSummary([1, 1], [[1, 0.5], [0.4, 1]])
    with pytest.raises(DataError):
        MomentSummary([1, 1], [[1, 2], [2, 1]])


def test_moment_summary_json_roundtrip():
    ms = real4_summary()
    back = MomentSummary.from_json(ms.to_json())
    assert np.array_equal(back.mean, ms.mean) and np.array_equal(back.cov, ms.cov)
    assert back.n == 90
    assert set(json.loads(ms.to_json())) == {"mean", "cov", "n"}


@settings(max_examples=60, deadline=None)
@given(datasets, st.floats(0.01, 100))
def test_scaling_property(y, c):
    a, b = summarize(Dataset(y)), summarize(Dataset(c * y))
    np.testing.assert_allclose(b.mean, c * a.mean, rtol=1e-12)
    np.testing.assert_allclose(b.cov, c * c * a.cov, rtol=1e-10, atol=1e-12 * (c * a.mean.max()) ** 2)


@settings(max_examples=60, deadline=None)
@given(datasets, st.randoms(use_true_random=False))
def test_permutation_property(y, rnd):
    perm = list(range(y.shape[1]))
    rnd.shuffle(perm)
    a, b = summarize(Dataset(y)), summarize(Dataset(y[:, perm]))
    np.testing.assert_allclose(b.mean, a.mean[perm], rtol=1e-12)
    np.testing.assert_allclose(b.cov, a.cov[np.ix_(perm, perm)], rtol=1e-12,
                               atol=1e-12 * a.mean.max() ** 2)


@settings(max_examples=60, deadline=None)
@given(datasets)
def test_top_left_blocks_bitwise(y):
    d = Dataset(y)
    cov = summarize(d).cov
    am = augmented_moments(d)
    k = d.k
    assert np.array_equal(am.gamma[:k, :k], cov)
    assert np.array_equal(am.pi[:k, :k], cov)


@settings(max_examples=40, deadline=None)
@given(datasets, arrays(float, 4, elements=st.floats(0.1, 10)))
def test_correlation_scale_invariant(y, scales):
    ms = summarize(Dataset(y))
    if np.any(np.diag(ms.cov) <= 1e-8 * ms.mean**2):
        return
    s = scales[: y.shape[1]]
    r1 = correlation_from_cov(ms)
    r2 = correlation_from_cov(summarize(Dataset(y * s)))
    np.testing.assert_allclose(r1, r2, atol=1e-9)
