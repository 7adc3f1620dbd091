from collections import Counter

import numpy as np
import pytest

from synthaudit.baselines import SynthesizerSpec, synthesize
from synthaudit.data import Dataset, TableSchema
from synthaudit.errors import EmptyInput, InvalidSpec
from synthaudit.fidelity import pearson_corr, wasserstein_1d


def test_copy_is_row_multiset_identical(mixed):
    s = synthesize(mixed, SynthesizerSpec("copy", 1))
    assert Counter(s.to_records()) == Counter(mixed.to_records())


def test_copy_resamples_when_count_differs(mixed):
    s = synthesize(mixed, SynthesizerSpec("copy", 1, rows=100))
    assert s.row_count == 100 and set(s.to_records()) <= set(mixed.to_records())


def test_noisy_copy_with_zero_noise_equals_copy(mixed):
    assert synthesize(mixed, SynthesizerSpec("noisy-copy", 4, noise_scale=0.0)) == synthesize(mixed, SynthesizerSpec("copy", 4))


def test_noisy_copy_noise_is_bounded(mixed):
    s = synthesize(mixed, SynthesizerSpec("noisy-copy", 4, noise_scale=0.05))
    for c in mixed.schema.numeric():
        half = 0.05 * np.ptp(mixed[c])
        assert np.abs(s[c] - mixed[c]).max() <= half
    flipped = np.mean(s["c1"] != mixed["c1"])
    assert 0.02 < flipped < 0.08
    assert set(s["c1"].tolist()) <= set(mixed["c1"].tolist())


def test_independent_marginals_destroy_correlation():
    rng = np.random.default_rng(0)
    z = rng.multivariate_normal([0, 0], [[1, 0.9], [0.9, 1]], size=3000)
    ds = Dataset(TableSchema.of(("x", "numeric"), ("y", "numeric")), {"x": z[:, 0], "y": z[:, 1]})
    assert pearson_corr(ds["x"], ds["y"]) > 0.88
    s = synthesize(ds, SynthesizerSpec("independent", 9))
    assert abs(pearson_corr(s["x"], s["y"])) < 0.1
    assert set(s["x"].tolist()) <= set(ds["x"].tolist())


def test_copula_keeps_marginals_and_correlation(mixed_split):
    t, h = mixed_split.train, mixed_split.holdout
    s = synthesize(t, SynthesizerSpec("copula", 3))
    for c in t.schema.numeric():
        assert wasserstein_1d(t[c], s[c]) < 2 * wasserstein_1d(t[c], h[c])
    assert abs(pearson_corr(s["x1"], s["x2"]) - pearson_corr(t["x1"], t["x2"])) < 0.1


@pytest.mark.parametrize("method", ["copy", "noisy-copy", "independent", "copula"])
def test_deterministic_per_seed(mixed, method):
    a = synthesize(mixed, SynthesizerSpec(method, 12))
    assert a == synthesize(mixed, SynthesizerSpec(method, 12))
    if method != "copy":
        assert a != synthesize(mixed, SynthesizerSpec(method, 13))


def test_spec_validation(mixed):
    with pytest.raises(InvalidSpec):
        SynthesizerSpec("gan")
    with pytest.raises(InvalidSpec):
        SynthesizerSpec("noisy-copy", noise_scale=-1)
    with pytest.raises(InvalidSpec):
        SynthesizerSpec("copy", rows=0)
    with pytest.raises(EmptyInput):
        synthesize(mixed.take([]), SynthesizerSpec("copy"))
    with pytest.raises(InvalidSpec):
        synthesize(mixed.select(["x1", "c1"]), SynthesizerSpec("copula"))
