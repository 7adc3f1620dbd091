import math
import warnings
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import jensenshannon
from scipy.stats import wasserstein_distance

from synthaudit.data import Dataset, TableSchema
from synthaudit.errors import ColumnOrderMismatch, DegenerateColumnWarning, EmptyInput, LengthMismatch, ShapeMismatch
from synthaudit.fidelity import (
    association_matrices,
    correlation_ratio,
    fidelity_report,
    FidelityReport,
    histogram_diff,
    histogram_diffs,
    jensen_shannon_distance,
    js_distance_columns,
    matrix_l2_distance,
    pearson_corr,
    theils_u,
    wasserstein_1d,
)
from synthaudit.preprocess import DerivedFeatureSpec

finite = st.floats(-1e6, 1e6, allow_nan=False)


def matching_oracle(x, y):
    cost = np.abs(np.subtract.outer(np.asarray(x, float), np.asarray(y, float)))
    r, c = linear_sum_assignment(cost)
    return cost[r, c].sum() / len(x)


def theils_u_oracle(x, y):
    n = len(x)
    hx = -sum(c / n * math.log(c / n) for c in Counter(x).values())
    if hx == 0:
        return 1.0
    py = Counter(y)
    hxy = -sum(c / n * math.log(c / py[b]) for (a, b), c in Counter(zip(x, y)).items())
    return (hx - hxy) / hx


# ------------------------------------------------------------------ Wasserstein

def test_wasserstein_examples():
    assert wasserstein_1d([3, 1, 2], [2, 3, 1]) == 0.0
    assert wasserstein_1d([0, 1], [0, 3]) == 1.0
    assert wasserstein_1d([0], [0, 2]) == 1.0
    with pytest.raises(EmptyInput):
        wasserstein_1d([], [1.0])


def test_wasserstein_matches_matching_oracle():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 65))
        x, y = rng.normal(size=n) * rng.uniform(0.1, 10), rng.standard_t(3, size=n)
        assert abs(wasserstein_1d(x, y) - matching_oracle(x, y)) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=1, max_size=30), st.lists(finite, min_size=1, max_size=30))
def test_wasserstein_properties(x, y):
    d = wasserstein_1d(x, y)
    assert d >= 0
    assert d == pytest.approx(wasserstein_1d(y, x), rel=1e-12, abs=1e-9)
    assert d == pytest.approx(wasserstein_distance(x, y), rel=1e-9, abs=1e-6)
    shift = 7.5
    assert wasserstein_1d(np.add(x, shift), np.add(y, shift)) == pytest.approx(d, rel=1e-6, abs=1e-6)


# ------------------------------------------------------------------ Jensen-Shannon

def test_js_examples():
    assert jensen_shannon_distance({"a": 1, "b": 1}, {"b": 1, "a": 1}) == 0.0
    assert jensen_shannon_distance({"a": 1}, {"b": 1}) == 1.0
    # JSD = 0.5*KL(p||m) + 0.5*KL(q||m) with m = (3/4, 1/4), in bits
    exact = math.sqrt(0.5 * (0.5 * math.log2(2 / 3) + 0.5) + 0.5 * math.log2(4 / 3))
    assert abs(jensen_shannon_distance({"a": 0.5, "b": 0.5}, {"a": 1.0}) - exact) < 1e-12
    assert round(exact, 6) == 0.557923


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=50), st.lists(st.sampled_from("abcdef"), min_size=1, max_size=50))
def test_js_matches_scipy_and_is_bounded(a, b):
    d = js_distance_columns(a, b)
    labels = sorted(set(a) | set(b))
    p = [a.count(k) for k in labels]
    q = [b.count(k) for k in labels]
    assert 0.0 <= d <= 1.0
    assert d == pytest.approx(jensenshannon(p, q, base=2), abs=1e-7)
    assert d == pytest.approx(js_distance_columns(b, a), abs=1e-12)


# ------------------------------------------------------------------ associations

def test_pearson_examples():
    assert pearson_corr([1, 2, 3], [2, 4, 6]) == 1.0
    assert abs(pearson_corr([1, 2, 3], [1, 3, 2]) - 0.5) <= 1e-12
    with pytest.warns(DegenerateColumnWarning):
        assert pearson_corr([1, 2, 3], [5, 5, 5]) == 0.0
    with pytest.raises(LengthMismatch):
        pearson_corr([1, 2], [1, 2, 3])


def test_theils_u_examples():
    assert theils_u(list("abab"), list("abab")) == 1.0
    assert theils_u(list("aabb"), list("pqpq")) == pytest.approx(0.0, abs=1e-12)
    x, y = list("aaab"), list("ppqq")
    assert abs(theils_u(y, x) - 0.311278) < 1e-6
    with pytest.warns(DegenerateColumnWarning):
        assert theils_u(list("aaa"), list("abc")) == 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from("pqrs")), min_size=1, max_size=40))
def test_theils_u_matches_oracle(pairs):
    x, y = [p[0] for p in pairs], [p[1] for p in pairs]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        u = theils_u(x, y)
    assert 0.0 <= u <= 1.0
    assert u == pytest.approx(theils_u_oracle(x, y), abs=1e-9)


def test_correlation_ratio_examples():
    assert correlation_ratio(list("aabb"), [1, 2, 2, 1]) == 0.0
    assert correlation_ratio(list("aabb"), [1, 1, 5, 5]) == 1.0
    assert abs(correlation_ratio(list("aabb"), [1, 2, 3, 4]) - 0.894427) < 1e-6
    with pytest.warns(DegenerateColumnWarning):
        assert correlation_ratio(list("ab"), [3, 3]) == 0.0


def test_association_matrices_compose_element_metrics():
    rng = np.random.default_rng(4)
    n = 200
    x = rng.normal(size=n)
    c1 = np.where(x > 0, "hi", "lo")
    c2 = rng.choice(["u", "v", "w"], size=n)
    s = TableSchema.of(("x", "numeric"), ("y", "numeric"), ("c1", "categorical"), ("c2", "categorical"))
    ds = Dataset(s, {"x": x, "y": x + rng.normal(size=n), "c1": c1, "c2": c2})
    m = association_matrices(ds)
    assert m.num_num[0, 1] == pytest.approx(pearson_corr(ds["x"], ds["y"]), abs=1e-12)
    assert m.cat_cat[0, 1] == pytest.approx(theils_u(c1, c2), abs=1e-12)
    assert m.cat_cat[1, 0] == pytest.approx(theils_u(c2, c1), abs=1e-12)
    assert m.num_cat.shape == (2, 2)
    assert m.num_cat[1, 0] == pytest.approx(correlation_ratio(c2, ds["x"]), abs=1e-12)


def test_association_matrices_edge_cases():
    single = Dataset(TableSchema.of(("x", "numeric")), {"x": [1.0, 2.0, 4.0]})
    assert association_matrices(single).num_num.tolist() == [[1.0]]
    s = TableSchema.of(("a", "categorical"), ("b", "categorical"))
    dup = Dataset(s, {"a": list("xyzx"), "b": list("xyzx")})
    m = association_matrices(dup)
    assert m.cat_cat[0, 1] == 1.0 and m.cat_cat[1, 0] == 1.0


def test_matrix_l2():
    a = [[1, 0], [0, 1]]
    assert matrix_l2_distance(a, a) == 0.0
    assert abs(matrix_l2_distance(a, [[1, 0.6], [0.6, 1]]) - 0.848528) < 1e-6
    assert abs(matrix_l2_distance(a, [[1, 0.6], [0.6, 1]]) - math.sqrt(0.72)) < 1e-9
    with pytest.raises(ShapeMismatch):
        matrix_l2_distance(a, [[1.0]])
    with pytest.raises(ColumnOrderMismatch):
        matrix_l2_distance(a, a, labels_a=("x", "y"), labels_b=("y", "x"))


# ------------------------------------------------------------------ reports

def test_self_comparison_is_zero(mixed):
    r = fidelity_report(mixed, mixed)
    assert r.num_mean == 0.0 and r.cat_mean == 0.0
    assert all(v == 0.0 for v in r.joint.values())


def test_fidelity_report_round_trip_and_scaling(mixed_split):
    t, h = mixed_split.train, mixed_split.holdout
    r = fidelity_report(t, h, [DerivedFeatureSpec("gap", "difference", "x1", "x2")], wd_scaling="minmax")
    assert set(r.numeric_wd) == {"x1", "x2", "x3", "x4"}
    assert set(r.derived_wd) == {"gap"}
    assert all(0 <= v <= 1 for v in r.numeric_wd.values())
    assert FidelityReport.from_dict(r.to_dict()) == r


def test_histogram_diff():
    same = histogram_diff([1, 2, 3], [1, 2, 3], bins=4)
    assert not same.diff.any()
    apart = histogram_diff([0, 0, 1], [10, 11], bins=5)
    assert apart.diff.sum() == pytest.approx(0.0, abs=1e-12)
    assert np.abs(apart.diff).max() == pytest.approx(max(apart.train_freq.max(), apart.other_freq.max()))
    shifted = histogram_diff([0, 1, 2, 3], [2, 3, 4, 5], bins=3)
    nz = shifted.diff[shifted.diff != 0]
    assert nz[0] < 0 < nz[-1]


def test_histogram_diffs_csv(tmp_path, mixed_split):
    out = histogram_diffs(mixed_split.train, mixed_split.holdout, bins="fd")
    assert set(out) == {"x1", "x2", "x3", "x4"}
    out["x1"].write_csv(tmp_path / "x1.csv")
    lines = (tmp_path / "x1.csv").read_text().splitlines()
    assert lines[0] == "bin_edge_lo,bin_edge_hi,train_freq,other_freq,diff"
    assert len(lines) == len(out["x1"].diff) + 1
