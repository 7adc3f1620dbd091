"""Bagged CART classifier (Gini splits) with seed provenance per tree."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import EmptyInput, LengthMismatch, SchemaMismatch, SingleClassTraining


@dataclass(frozen=True)
class TreeParams:
    n_trees: int = 25
    max_depth: int = 8
    min_leaf: int = 5

    def to_dict(self) -> dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth, "min_leaf": self.min_leaf}


@dataclass(frozen=True)
class Tree:
    """Flat array tree. Leaves have ``feature == -1`` and carry their class in ``value``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            nd = node[active]
            go_left = X[active, self.feature[nd]] <= self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
            active = active[self.feature[node[active]] >= 0]
        return self.value[node]


def _majority(y: np.ndarray) -> int:
    ones = int(y.sum())
    # ties resolve to the negative class
    return 1 if 2 * ones > y.size else 0


def fit_tree(X: np.ndarray, y: np.ndarray, max_depth: int, min_leaf: int) -> Tree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[int] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        ys = y[rows]
        value[node] = _majority(ys)
        if depth >= max_depth or ys.min() == ys.max():
            continue
        f, thr, _ = kernels.best_split(X[rows], ys, min_leaf)
        if f < 0:
            continue
        mask = X[rows, f] <= thr
        feature[node], threshold[node] = int(f), float(thr)
        left[node], right[node] = new_node(), new_node()
        stack.append((right[node], rows[~mask], depth + 1))
        stack.append((left[node], rows[mask], depth + 1))

    return Tree(
        np.array(feature, dtype=np.intp),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.intp),
        np.array(right, dtype=np.intp),
        np.array(value, dtype=np.int64),
    )


@dataclass(frozen=True)
class FeatureEncoder:
    """Numeric columns pass through; categorical columns become one indicator per training label."""

    numeric: tuple[str, ...]
    categorical: dict[str, tuple[str, ...]] = field(default_factory=dict)

    @classmethod
    def fit(cls, features: dict[str, np.ndarray], kinds: dict[str, str]) -> "FeatureEncoder":
        numeric = tuple(n for n in features if kinds[n] == "numeric")
        categorical = {n: tuple(sorted(set(features[n].tolist()))) for n in features if kinds[n] == "categorical"}
        return cls(numeric, categorical)

    @property
    def columns(self) -> tuple[str, ...]:
        return self.numeric + tuple(self.categorical)

    @property
    def width(self) -> int:
        return len(self.numeric) + sum(len(v) for v in self.categorical.values())

    def transform(self, features: dict[str, np.ndarray]) -> np.ndarray:
        missing = [c for c in self.columns if c not in features]
        if missing:
            raise SchemaMismatch(f"features missing columns {missing}")
        lengths = {len(features[c]) for c in self.columns}
        if len(lengths) > 1:
            raise LengthMismatch("feature columns have different lengths")
        n = lengths.pop() if lengths else 0
        X = np.zeros((n, self.width), dtype=np.float64)
        j = 0
        for c in self.numeric:
            X[:, j] = np.asarray(features[c], dtype=np.float64)
            j += 1
        for c, labels in self.categorical.items():
            # labels unseen in training stay all-zero
            lut = {label: k for k, label in enumerate(labels)}
            codes = np.array([lut.get(v, -1) for v in features[c].tolist()], dtype=np.intp)
            hit = codes >= 0
            X[np.flatnonzero(hit), j + codes[hit]] = 1.0
            j += len(labels)
        return X


@dataclass(frozen=True)
class TrainedModel:
    trees: tuple[Tree, ...]
    tree_seeds: tuple[int, ...]
    encoder: FeatureEncoder
    params: TreeParams
    seed: int
    source: str = "T"

    def predict_proba(self, features: dict[str, np.ndarray]) -> np.ndarray:
        return predict_proba(self, features)


def tree_seeds(seed: int, n_trees: int) -> tuple[int, ...]:
    """Independent per-tree seeds spawned from the master seed (schedule-independent)."""
    children = np.random.SeedSequence(int(seed)).spawn(n_trees)
    return tuple(int(c.generate_state(2, dtype=np.uint64)[0]) for c in children)


def train_bagged_trees(
    features: dict[str, np.ndarray],
    labels,
    kinds: dict[str, str],
    params: TreeParams = TreeParams(),
    seed: int = 0,
    source: str = "T",
) -> TrainedModel:
    """Fit ``params.n_trees`` Gini trees, each on a bootstrap resample of the training rows.

    Args:
        features: Column name to values; categorical columns hold strings.
        labels: 0/1 targets.
        kinds: Column name to ``"numeric"`` or ``"categorical"``.
        params: Ensemble size and tree limits.
        seed: Master seed; tree ``t`` uses its own spawned stream.
        source: Tag recording which dataset trained the model.

    Raises:
        EmptyInput: fewer than two rows.
        SingleClassTraining: only one class present in ``labels``.
    """
    y = np.asarray(labels, dtype=np.int64)
    if y.size < 2:
        raise EmptyInput(f"need at least 2 training rows, got {y.size}")
    if y.min() == y.max():
        raise SingleClassTraining(f"training labels for {source} contain a single class")
    encoder = FeatureEncoder.fit(features, kinds)
    X = encoder.transform(features)
    if X.shape[0] != y.size:
        raise LengthMismatch("features and labels differ in length")
    seeds = tree_seeds(seed, params.n_trees)
    trees = []
    for s in seeds:
        rng = np.random.default_rng(s)
        idx = rng.integers(0, y.size, size=y.size)
        trees.append(fit_tree(X[idx], y[idx], params.max_depth, params.min_leaf))
    return TrainedModel(tuple(trees), seeds, encoder, params, int(seed), source)


def predict_proba(model: TrainedModel, features: dict[str, np.ndarray]) -> np.ndarray:
    """Fraction of trees voting for the positive class, per row."""
    X = model.encoder.transform(features)
    votes = np.zeros(X.shape[0], dtype=np.int64)
    for tree in model.trees:
        votes += tree.predict(X)
    return votes / len(model.trees)
