import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthaudit.data import Dataset, TableSchema
from synthaudit.errors import EmptyInput, LengthMismatch, SingleClassTraining
from synthaudit.fixtures import MIXED_TASK
from synthaudit.utility import (
    ClassificationMetrics,
    ClassificationTask,
    TrainedModel,
    TreeParams,
    UtilityReport,
    assemble,
    classification_metrics,
    make_labels,
    predict_proba,
    roc_auc_score,
    train_bagged_trees,
    utility_report,
)
from synthaudit.utility.trees import FeatureEncoder, Tree, fit_tree, tree_seeds


def auc_oracle(y, s):
    pos = [v for v, t in zip(s, y) if t == 1]
    neg = [v for v, t in zip(s, y) if t == 0]
    if not pos or not neg:
        return None
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


# ------------------------------------------------------------------ labels and assembly

def test_make_labels_threshold_is_strict():
    ds = Dataset(TableSchema.of(("basket_size", "numeric")), {"basket_size": [11, 10, 10.5]})
    task = ClassificationTask(features=("basket_size",))
    assert make_labels(ds, task)["label"].tolist() == [1.0, 0.0, 1.0]


def test_assemble_collapses_entities():
    s = TableSchema.of(("h", "categorical"), ("w", "categorical"), ("age", "categorical"),
                       ("price", "numeric"), ("basket_size", "numeric"))
    ds = Dataset(s, {"h": ["a", "a", "b"], "w": ["1", "1", "1"], "age": ["x", "x", "y"],
                     "price": [1.0, 3.0, 5.0], "basket_size": [12.0, 12.0, 4.0]})
    task = ClassificationTask(("age", "price"), entity_columns=("h", "w"))
    out = assemble(ds, task)
    assert out.row_count == 2
    assert out["price"].tolist() == [2.0, 5.0]
    assert out["label"].tolist() == [1.0, 0.0]


def test_task_round_trip():
    assert ClassificationTask.from_dict(MIXED_TASK.to_dict()) == MIXED_TASK


# ------------------------------------------------------------------ trees

def test_separable_data_is_fit_exactly():
    x = np.concatenate([np.linspace(0, 1, 40), np.linspace(3, 4, 40)])
    y = np.r_[np.zeros(40), np.ones(40)].astype(int)
    model = train_bagged_trees({"x": x}, y, {"x": "numeric"}, TreeParams(9, 3, 1), seed=2)
    assert np.array_equal((predict_proba(model, {"x": x}) >= 0.5).astype(int), y)


def test_depth_zero_is_majority_constant():
    rng = np.random.default_rng(1)
    x = rng.normal(size=50)
    y = (rng.random(50) < 0.3).astype(int)
    model = train_bagged_trees({"x": x}, y, {"x": "numeric"}, TreeParams(1, 0, 1), seed=0)
    p = predict_proba(model, {"x": rng.normal(size=20)})
    assert len(set(p.tolist())) == 1


def test_single_tree_gini_split_choice():
    X = np.array([[0.0, 5.0], [1.0, 5.0], [2.0, 6.0], [3.0, 6.0]])
    tree = fit_tree(X, np.array([0, 0, 1, 1]), max_depth=1, min_leaf=1)
    # both features separate perfectly; the first feature wins the tie
    assert tree.feature[0] == 0 and tree.threshold[0] == 1.5


def test_same_seed_same_predictions_and_seed_provenance():
    rng = np.random.default_rng(5)
    feats = {"x": rng.normal(size=200), "c": rng.choice(["a", "b", "c"], size=200).astype(object)}
    y = ((feats["x"] > 0) ^ (feats["c"] == "a")).astype(int)
    kinds = {"x": "numeric", "c": "categorical"}
    m1 = train_bagged_trees(feats, y, kinds, seed=11)
    m2 = train_bagged_trees(feats, y, kinds, seed=11)
    probe = {"x": rng.normal(size=50), "c": rng.choice(["a", "b", "z"], size=50).astype(object)}
    assert np.array_equal(predict_proba(m1, probe), predict_proba(m2, probe))
    assert m1.tree_seeds == tree_seeds(11, 25) and len(set(m1.tree_seeds)) == 25


def _leaf(value):
    return Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([value]))


@pytest.mark.parametrize("positives,expected", [(25, 1.0), (0, 0.0), (13, 0.52)])
def test_vote_fraction(positives, expected):
    trees = tuple(_leaf(1) for _ in range(positives)) + tuple(_leaf(0) for _ in range(25 - positives))
    model = TrainedModel(trees, tuple(range(25)), FeatureEncoder(("x",)), TreeParams(), 0)
    assert predict_proba(model, {"x": np.zeros(3)}).tolist() == [expected] * 3


def test_training_errors():
    with pytest.raises(SingleClassTraining):
        train_bagged_trees({"x": np.arange(5.0)}, [1] * 5, {"x": "numeric"})
    with pytest.raises(EmptyInput):
        train_bagged_trees({"x": np.arange(1.0)}, [1], {"x": "numeric"})


def test_unseen_category_encodes_as_zeros():
    enc = FeatureEncoder.fit({"c": np.array(["a", "b"], dtype=object)}, {"c": "categorical"})
    assert enc.transform({"c": np.array(["b", "q"], dtype=object)}).tolist() == [[0.0, 1.0], [0.0, 0.0]]


# ------------------------------------------------------------------ metrics

def test_confusion_example():
    y = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
    s = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0]
    m = classification_metrics(y, s)
    assert (m.tp, m.fp, m.fn, m.tn) == (2, 1, 1, 6)
    assert m.accuracy == pytest.approx(0.8)
    assert m.precision == pytest.approx(2 / 3) and m.recall == pytest.approx(2 / 3) and m.f1 == pytest.approx(2 / 3)


def test_auc_examples():
    assert roc_auc_score([1, 1, 0, 0], [0.9, 0.8, 0.2, 0.1]) == 1.0
    assert roc_auc_score([1, 1, 0, 0], [0.9, 0.4, 0.6, 0.2]) == 0.75
    assert roc_auc_score([1, 1], [0.2, 0.3]) is None
    with pytest.raises(LengthMismatch):
        classification_metrics([1, 0], [0.5])


def test_zero_division_gives_zero():
    m = classification_metrics([0, 0, 1], [0.1, 0.2, 0.3])
    assert m.precision == 0.0 and m.recall == 0.0 and m.f1 == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0])), min_size=1, max_size=60))
def test_metrics_match_oracle(pairs):
    y = [p[0] for p in pairs]
    s = [p[1] for p in pairs]
    m = classification_metrics(y, s)
    assert m.tp + m.fp + m.fn + m.tn == len(y)
    assert m.accuracy == pytest.approx(sum((v >= 0.5) == (t == 1) for t, v in zip(y, s)) / len(y), abs=1e-12)
    oracle = auc_oracle(y, s)
    assert (m.roc_auc is None) == (oracle is None)
    if oracle is not None:
        assert abs(m.roc_auc - oracle) <= 1e-12
    assert ClassificationMetrics.from_dict(m.to_dict()) == m


# ------------------------------------------------------------------ harness

def test_utility_report_rows_and_single_class_source(mixed_split):
    t, h, e = mixed_split.train, mixed_split.holdout, mixed_split.eval
    one_class = t.filter(t["x4"] <= MIXED_TASK.threshold)
    r = utility_report(t, h, one_class, e, MIXED_TASK, TreeParams(5, 4, 5), seed=1)
    assert r.rows["synthetic"] is None and "SingleClassTraining" in r.errors["synthetic"]
    assert r.rows["train"].accuracy > r.eval_majority_rate
    assert UtilityReport.from_dict(r.to_dict()).to_dict() == r.to_dict()
