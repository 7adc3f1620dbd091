import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthaudit.data import Dataset, TableSchema
from synthaudit.errors import EmptyReference, SchemaMismatch
from synthaudit.privacy import (
    DistanceConfig,
    PrivacyReport,
    ccr,
    dcr,
    mixed_l1_distance,
    privacy_report,
)

S1 = TableSchema.of(("x", "numeric"), ("c", "categorical"))
UNIT = DistanceConfig(("x",), ("c",), {"x": (0.0, 1.0)})


def table(rows, schema=S1):
    return Dataset(schema, {n: [r[i] for r in rows] for i, n in enumerate(schema.names)})


def brute_dcr(query, reference, config):
    q = [dict(zip(query.names, r)) for r in query.to_records()]
    ref = [dict(zip(reference.names, r)) for r in reference.to_records()]
    return np.array([min(mixed_l1_distance(a, b, config) for b in ref) for a in q])


def test_record_distance_examples():
    assert mixed_l1_distance((0.5, "a"), (0.5, "a"), UNIT) == 0.0
    assert mixed_l1_distance((0.5, "a"), (0.0, "a"), UNIT) == 0.5
    assert mixed_l1_distance((0.5, "a"), (1.0, "b"), UNIT) == 1.5
    assert mixed_l1_distance({"x": 7.0, "c": "a"}, {"x": 0.5, "c": "a"}, UNIT) == 0.5  # clamped
    with pytest.raises(SchemaMismatch):
        mixed_l1_distance((0.5,), (0.5, "a"), UNIT)


def test_dcr_examples():
    t = table([(0.0, "a"), (1.0, "b")])
    assert dcr(table([(0.5, "a")]), t, UNIT).distances.tolist() == [0.5]
    copy = dcr(t, t, UNIT)
    assert copy.median == 0.0 and not copy.distances.any()
    with pytest.raises(EmptyReference):
        dcr(t, table([]), UNIT)


def test_dcr_matches_brute_force():
    rng = np.random.default_rng(8)
    s = TableSchema.of(("a", "numeric"), ("b", "numeric"), ("c", "categorical"), ("d", "categorical"))
    for _ in range(5):
        def draw(n):
            return Dataset(s, {"a": rng.normal(size=n), "b": rng.integers(0, 5, size=n).astype(float),
                               "c": rng.choice(list("xyz"), size=n), "d": rng.choice(list("pq"), size=n)})
        q, ref = draw(int(rng.integers(1, 500))), draw(int(rng.integers(1, 500)))
        cfg = DistanceConfig.fit(ref)
        got = dcr(q, ref, cfg).distances
        assert np.array_equal(got, brute_dcr(q, ref, cfg))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.sampled_from("ab")), min_size=1, max_size=15),
       st.lists(st.tuples(st.floats(-5, 5), st.sampled_from("abc")), min_size=1, max_size=15))
def test_dcr_properties(query_rows, ref_rows):
    q, ref = table(query_rows), table(ref_rows)
    cfg = DistanceConfig.fit(ref)
    d = dcr(q, ref, cfg).distances
    assert np.array_equal(d, brute_dcr(q, ref, cfg))
    assert (d >= 0).all() and (d <= len(cfg.numeric) + len(cfg.categorical)).all()
    assert not dcr(ref, ref, cfg).distances.any()


def test_ccr_examples():
    s1 = TableSchema.of(("x", "numeric"))
    cfg = DistanceConfig(("x",), (), {"x": (0.0, 1.0)})
    t, h = table([(0.0,)], s1), table([(1.0,)], s1)
    assert ccr(table([(0.0,), (0.9,)], s1), t, h, cfg) == 0.5
    assert ccr(t, t, h, cfg) == 1.0
    assert ccr(h, t, h, cfg) == 0.0
    assert ccr(table([(0.5,)], s1), t, h, cfg) == 1.0  # ties count as closer to train


def test_privacy_report(mixed_split):
    t, h = mixed_split.train, mixed_split.holdout
    self_report = privacy_report(h, t, h)
    assert self_report.dcr_normalized == 1.0
    copy = privacy_report(t, t, h)
    assert copy.dcr_raw_median == 0.0 and copy.ccr == 1.0 and copy.dcr_normalized == 0.0
    assert PrivacyReport.from_dict(copy.to_dict()) == copy


def test_zero_baseline_reports_none():
    t = table([(0.0, "a"), (1.0, "b")])
    r = privacy_report(t, t, t)
    assert r.dcr_normalized is None and r.warnings


def test_zero_range_column_is_flagged():
    t = table([(1.0, "a"), (1.0, "b")])
    cfg = DistanceConfig.fit(t)
    assert cfg.zero_range == ("x",)
    assert mixed_l1_distance((1.0, "a"), (9.0, "a"), cfg) == 0.0
