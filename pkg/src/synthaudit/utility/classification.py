"""Train-on-T/H/S, test-on-E classification harness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from ..data import ColumnKind, ColumnSchema, Dataset, TableSchema
from ..errors import ConfigError, DataError, LengthMismatch
from ..preprocess import _group_codes
from .trees import TrainedModel, TreeParams, predict_proba, train_bagged_trees

SOURCES = ("train", "holdout", "synthetic")
SOURCE_TAGS = {"train": "T", "holdout": "H", "synthetic": "S"}


@dataclass(frozen=True)
class ClassificationTask:
    """Binary target ``threshold_column > threshold`` predicted from ``features``.

    With ``entity_columns`` set, rows are first collapsed to one row per entity
    (categorical features keep their first value, numeric features are averaged), e.g.
    one row per household-week with the mean unit price.
    """

    features: tuple[str, ...]
    threshold_column: str = "basket_size"
    threshold: float = 10.0
    label: str = "label"
    entity_columns: tuple[str, ...] = ()
    positive_label: str = "positive"

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "entity_columns", tuple(self.entity_columns))
        if not self.features:
            raise ConfigError("classification task needs at least one feature")

    @classmethod
    def from_dict(cls, doc: dict) -> "ClassificationTask":
        try:
            return cls(
                features=tuple(doc["features"]),
                threshold_column=doc.get("threshold_column", "basket_size"),
                threshold=float(doc.get("threshold", 10.0)),
                label=doc.get("label", "label"),
                entity_columns=tuple(doc.get("entity_columns", ())),
                positive_label=doc.get("positive_label", "positive"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed task document: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "threshold_column": self.threshold_column,
            "threshold": self.threshold,
            "label": self.label,
            "entity_columns": list(self.entity_columns),
            "positive_label": self.positive_label,
        }


def make_labels(dataset: Dataset, task: ClassificationTask) -> Dataset:
    """Append a 0/1 numeric label column, positive iff the threshold column strictly exceeds the threshold."""
    values = dataset.column(dataset.schema.require(task.threshold_column, ColumnKind.NUMERIC).name)
    return dataset.with_column(ColumnSchema(task.label, ColumnKind.NUMERIC), (values > task.threshold).astype(np.float64))


def assemble(dataset: Dataset, task: ClassificationTask) -> Dataset:
    """Reduce ``dataset`` to the task's entity rows and attach labels."""
    schema = dataset.schema
    for c in task.features + task.entity_columns:
        schema.require(c)
    schema.require(task.threshold_column, ColumnKind.NUMERIC)
    cols = list(dict.fromkeys(task.entity_columns + task.features + (task.threshold_column,)))
    if not task.entity_columns:
        return make_labels(dataset.select(cols), task)

    codes, n_groups = _group_codes(dataset, task.entity_columns)
    _, first_row = np.unique(codes, return_index=True)
    counts = np.bincount(codes, minlength=n_groups).astype(np.float64)
    out = {}
    for c in cols:
        values = dataset.column(c)
        if schema.kind_of(c) is ColumnKind.NUMERIC and c not in task.entity_columns:
            out[c] = np.bincount(codes, weights=values, minlength=n_groups) / counts
        else:
            out[c] = values[first_row]
    return make_labels(Dataset(TableSchema(tuple(schema[c] for c in cols)), out), task)


def _features(dataset: Dataset, task: ClassificationTask) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    feats = {c: dataset.column(c) for c in task.features}
    kinds = {c: dataset.schema.kind_of(c).value for c in task.features}
    return feats, kinds


@dataclass(frozen=True)
class ClassificationMetrics:
    accuracy: float
    f1: float
    roc_auc: float | None
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    tn: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1": self.f1,
            "roc_auc": self.roc_auc,
            "precision": self.precision,
            "recall": self.recall,
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ClassificationMetrics":
        c = doc["confusion"]
        return cls(doc["accuracy"], doc["f1"], doc["roc_auc"], doc["precision"], doc["recall"], c["tp"], c["fp"], c["fn"], c["tn"])


def roc_auc_score(y_true, scores) -> float | None:
    """Mann-Whitney AUC with half credit for ties; ``None`` when only one class is present."""
    y = np.asarray(y_true, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(s, method="average")
    u = float(ranks[y == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def classification_metrics(y_true, scores, threshold: float = 0.5) -> ClassificationMetrics:
    """Confusion-matrix metrics at ``score >= threshold`` plus rank-based ROC AUC.

    Precision (recall) is 0 when nothing is predicted (actually) positive.
    ``roc_auc`` is ``None`` when ``y_true`` holds a single class.
    """
    y = np.asarray(y_true, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape:
        raise LengthMismatch(f"y_true has {y.size} entries, scores has {s.size}")
    if y.size == 0:
        raise DataError("no observations to score")
    pred = s >= threshold
    truth = y == 1
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    fn = int(np.sum(~pred & truth))
    tn = int(np.sum(~pred & ~truth))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ClassificationMetrics(
        accuracy=(tp + tn) / y.size,
        f1=f1,
        roc_auc=roc_auc_score(y, s),
        precision=precision,
        recall=recall,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
    )


@dataclass
class UtilityReport:
    rows: dict[str, ClassificationMetrics | None]
    errors: dict[str, str] = field(default_factory=dict)
    eval_rows: int = 0
    eval_positive_rate: float = 0.0
    warnings: list[str] = field(default_factory=list)

    @property
    def eval_majority_rate(self) -> float:
        return max(self.eval_positive_rate, 1.0 - self.eval_positive_rate)

    def to_dict(self) -> dict:
        return {
            "rows": {k: (v.to_dict() if v is not None else None) for k, v in self.rows.items()},
            "errors": dict(self.errors),
            "eval_rows": self.eval_rows,
            "eval_positive_rate": self.eval_positive_rate,
            "eval_majority_rate": self.eval_majority_rate,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "UtilityReport":
        return cls(
            rows={k: (ClassificationMetrics.from_dict(v) if v is not None else None) for k, v in doc["rows"].items()},
            errors=dict(doc["errors"]),
            eval_rows=doc["eval_rows"],
            eval_positive_rate=doc["eval_positive_rate"],
            warnings=list(doc["warnings"]),
        )


def utility_report(
    train: Dataset,
    holdout: Dataset | None,
    synthetic: Dataset | None,
    eval: Dataset,
    task: ClassificationTask,
    params: TreeParams = TreeParams(),
    seed: int = 0,
) -> UtilityReport:
    """Fit the same learner on each training source and score all of them on ``eval``.

    A source whose data cannot train a model (e.g. a single class) gets a ``None`` row
    and an entry in ``errors``; the remaining rows are still computed.
    """
    e = assemble(eval, task)
    e_feats, _ = _features(e, task)
    y_eval = e.column(task.label).astype(np.int64)
    report = UtilityReport(rows={}, eval_rows=e.row_count, eval_positive_rate=float(y_eval.mean()) if y_eval.size else 0.0)
    if y_eval.size and y_eval.min() == y_eval.max():
        report.warnings.append("eval labels contain a single class; roc_auc undefined")

    for name, ds in zip(SOURCES, (train, holdout, synthetic)):
        if ds is None:
            continue
        try:
            d = assemble(ds, task)
            feats, kinds = _features(d, task)
            model: TrainedModel = train_bagged_trees(
                feats, d.column(task.label), kinds, params, seed, SOURCE_TAGS[name]
            )
            report.rows[name] = classification_metrics(y_eval, predict_proba(model, e_feats))
        except DataError as exc:
            report.rows[name] = None
            report.errors[name] = f"{type(exc).__name__}: {exc}"
    return report
