"""Machine-learning utility: classification harness and product association analysis."""

from .associations import (
    Basket,
    BasketColumns,
    FrequentItemsets,
    RuleMetrics,
    apriori_frequent_itemsets,
    association_report,
    association_rules,
    build_baskets,
)
from .classification import (
    ClassificationMetrics,
    ClassificationTask,
    UtilityReport,
    assemble,
    classification_metrics,
    make_labels,
    roc_auc_score,
    utility_report,
)
from .trees import TrainedModel, TreeParams, predict_proba, train_bagged_trees

__all__ = [
    "Basket",
    "BasketColumns",
    "ClassificationMetrics",
    "ClassificationTask",
    "FrequentItemsets",
    "RuleMetrics",
    "TrainedModel",
    "TreeParams",
    "UtilityReport",
    "apriori_frequent_itemsets",
    "assemble",
    "association_report",
    "association_rules",
    "build_baskets",
    "classification_metrics",
    "make_labels",
    "predict_proba",
    "roc_auc_score",
    "train_bagged_trees",
    "utility_report",
]
