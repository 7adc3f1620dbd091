"""Marginal and joint distribution similarity between a reference table and a candidate table."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data import CategoryIndex, Dataset, require_same_schema
from .errors import (
    ColumnOrderMismatch,
    ConfigError,
    DataError,
    DegenerateColumnWarning,
    EmptyInput,
    IndexMismatch,
    LengthMismatch,
    ShapeMismatch,
)
from .preprocess import DerivedFeatureSpec, derived_values

DEFAULT_BINS = 50


def _as_sample(x, what: str = "sample") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyInput(f"{what} is empty")
    return arr


def wasserstein_1d(x, y) -> float:
    """1-Wasserstein distance between two empirical distributions on the real line.

    Computed as the area between the two empirical CDFs, which works for unequal sample
    sizes and reduces to the mean absolute difference of sorted samples when sizes match.
    """
    x = np.sort(_as_sample(x, "x"))
    y = np.sort(_as_sample(y, "y"))
    support = np.concatenate([x, y])
    support.sort(kind="mergesort")
    widths = np.diff(support)
    # empirical CDFs on each interval [support[i], support[i+1])
    cdf_x = np.searchsorted(x, support[:-1], side="right") / x.size
    cdf_y = np.searchsorted(y, support[:-1], side="right") / y.size
    return float(np.sum(np.abs(cdf_x - cdf_y) * widths))


def _normalized_counts(p, q, index: CategoryIndex | None) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, Mapping) or isinstance(q, Mapping):
        if not (isinstance(p, Mapping) and isinstance(q, Mapping)):
            raise IndexMismatch("p and q must both be mappings or both be vectors")
        if index is None:
            index = CategoryIndex.from_values("", p.keys(), q.keys())
        lut = index.lookup
        vecs = []
        for counts in (p, q):
            v = np.zeros(len(index), dtype=np.float64)
            for label, c in counts.items():
                if label not in lut:
                    raise IndexMismatch(f"label {label!r} is not in the category index")
                v[lut[label]] += c
            vecs.append(v)
        pv, qv = vecs
    else:
        pv = np.asarray(p, dtype=np.float64)
        qv = np.asarray(q, dtype=np.float64)
        if pv.shape != qv.shape or (index is not None and pv.size != len(index)):
            raise IndexMismatch("count vectors do not match the category index")
    if (pv < 0).any() or (qv < 0).any():
        raise DataError("counts must be non-negative")
    if pv.sum() <= 0 or qv.sum() <= 0:
        raise EmptyInput("count vectors must have a positive total")
    return pv / pv.sum(), qv / qv.sum()


def _kl_base2(a: np.ndarray, m: np.ndarray) -> float:
    nz = a > 0
    return float(np.sum(a[nz] * np.log2(a[nz] / m[nz])))


def jensen_shannon_distance(p, q, index: CategoryIndex | None = None) -> float:
    """Square root of the base-2 Jensen-Shannon divergence between two label distributions.

    ``p`` and ``q`` are either ``{label: count}`` mappings or count vectors laid out by
    ``index``. Labels missing from one side have probability zero there.
    """
    pn, qn = _normalized_counts(p, q, index)
    m = 0.5 * (pn + qn)
    jsd = 0.5 * (_kl_base2(pn, m) + _kl_base2(qn, m))
    return float(min(1.0, math.sqrt(max(jsd, 0.0))))


def js_distance_columns(a, b) -> float:
    """Jensen-Shannon distance between the label frequencies of two categorical vectors."""
    index = CategoryIndex.from_values("", a, b)
    return jensen_shannon_distance(index.counts(a), index.counts(b), index)


def _paired(x, y, min_len: int):
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise LengthMismatch(f"lengths differ: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < min_len:
        raise EmptyInput(f"need at least {min_len} observations, got {x.shape[0]}")
    return x, y


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return None
    xc = x - x.mean()
    yc = y - y.mean()
    r = float(np.dot(xc, yc) / math.sqrt(float(np.dot(xc, xc)) * float(np.dot(yc, yc))))
    return max(-1.0, min(1.0, r))


def pearson_corr(x, y) -> float:
    """Product-moment correlation; 0.0 (with a :class:`DegenerateColumnWarning`) if either input is constant."""
    x, y = _paired(x, y, 2)
    r = _pearson(x.astype(np.float64), y.astype(np.float64))
    if r is None:
        warnings.warn("pearson_corr: constant input, correlation defined as 0", DegenerateColumnWarning, stacklevel=2)
        return 0.0
    return r


def _codes(values) -> tuple[np.ndarray, int]:
    _, codes = np.unique(np.asarray(values, dtype=object), return_inverse=True)
    return codes.ravel().astype(np.int64), int(codes.max()) + 1 if codes.size else 0


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def _theils_u_codes(xc: np.ndarray, kx: int, yc: np.ndarray, ky: int) -> float | None:
    n = xc.size
    x_counts = np.bincount(xc, minlength=kx)
    if np.count_nonzero(x_counts) <= 1:
        return None
    h_x = _entropy(x_counts, n)
    joint, joint_counts = np.unique(xc * ky + yc, return_counts=True)
    y_counts = np.bincount(yc, minlength=ky)
    p_xy = joint_counts / n
    p_y = y_counts[joint % ky] / n
    h_x_given_y = float(-np.sum(p_xy * np.log(p_xy / p_y)))
    u = (h_x - h_x_given_y) / h_x
    return max(0.0, min(1.0, u))


def theils_u(x, y) -> float:
    """Uncertainty coefficient U(x | y): the fraction of x's entropy explained by knowing y.

    Asymmetric. A constant ``x`` is perfectly predictable and scores 1.0 (with a warning).
    """
    x, y = _paired(x, y, 1)
    xc, kx = _codes(x)
    yc, ky = _codes(y)
    u = _theils_u_codes(xc, kx, yc, ky)
    if u is None:
        warnings.warn("theils_u: constant x, U defined as 1", DegenerateColumnWarning, stacklevel=2)
        return 1.0
    return u


def _correlation_ratio_codes(codes: np.ndarray, k: int, values: np.ndarray) -> float | None:
    if np.ptp(values) == 0:
        return None
    counts = np.bincount(codes, minlength=k)
    sums = np.bincount(codes, weights=values, minlength=k)
    mean = values.mean()
    present = counts > 0
    group_means = sums[present] / counts[present]
    between = float(np.sum(counts[present] * (group_means - mean) ** 2))
    total = float(np.sum((values - mean) ** 2))
    return max(0.0, min(1.0, math.sqrt(between / total)))


def correlation_ratio(categories, values) -> float:
    """Correlation ratio (eta) of a numeric variable grouped by a categorical one.

    0.0 (with a warning) when ``values`` is constant.
    """
    categories, values = _paired(categories, values, 1)
    codes, k = _codes(categories)
    eta = _correlation_ratio_codes(codes, k, values.astype(np.float64))
    if eta is None:
        warnings.warn("correlation_ratio: constant values, eta defined as 0", DegenerateColumnWarning, stacklevel=2)
        return 0.0
    return eta


@dataclass(frozen=True)
class AssociationMatrices:
    """Pairwise association structure of one table.

    ``cat_cat[i, j]`` is U(cat_cols[i] | cat_cols[j]); ``num_cat`` has one row per
    categorical column and one column per numeric column.
    """

    num_cols: tuple[str, ...]
    cat_cols: tuple[str, ...]
    num_num: np.ndarray
    cat_cat: np.ndarray
    num_cat: np.ndarray
    degenerate: tuple[str, ...] = ()


def association_matrices(dataset: Dataset) -> AssociationMatrices:
    num_cols = dataset.schema.numeric()
    cat_cols = dataset.schema.categorical()
    p, k = len(num_cols), len(cat_cols)
    if dataset.row_count < 1 or (p and dataset.row_count < 2):
        raise EmptyInput("association matrices need at least two rows")
    nums = [dataset.column(c) for c in num_cols]
    cats = [_codes(dataset.column(c)) for c in cat_cols]
    degenerate = [c for c, v in zip(num_cols, nums) if np.ptp(v) == 0]
    degenerate += [c for c, (_, kc) in zip(cat_cols, cats) if kc <= 1]

    num_num = np.eye(p)
    for i in range(p):
        for j in range(i + 1, p):
            r = _pearson(nums[i], nums[j])
            num_num[i, j] = num_num[j, i] = 0.0 if r is None else r

    cat_cat = np.ones((k, k))
    for i in range(k):
        for j in range(k):
            if i != j:
                u = _theils_u_codes(cats[i][0], cats[i][1], cats[j][0], cats[j][1])
                cat_cat[i, j] = 1.0 if u is None else u

    num_cat = np.zeros((k, p))
    for i in range(k):
        for j in range(p):
            eta = _correlation_ratio_codes(cats[i][0], cats[i][1], nums[j])
            num_cat[i, j] = 0.0 if eta is None else eta

    return AssociationMatrices(tuple(num_cols), tuple(cat_cols), num_num, cat_cat, num_cat, tuple(degenerate))


def matrix_l2_distance(a, b, *, labels_a: Sequence | None = None, labels_b: Sequence | None = None) -> float:
    """Euclidean norm of the element-wise difference of two flattened matrices."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"matrix shapes differ: {a.shape} vs {b.shape}")
    if labels_a is not None and labels_b is not None and tuple(labels_a) != tuple(labels_b):
        raise ColumnOrderMismatch(f"column orderings differ: {labels_a} vs {labels_b}")
    diff = (a - b).ravel()
    return float(math.sqrt(float(np.dot(diff, diff))))


def joint_distances(ref: AssociationMatrices, other: AssociationMatrices) -> dict[str, float | None]:
    def dist(name: str, la, lb) -> float | None:
        a, b = getattr(ref, name), getattr(other, name)
        if a.size == 0:
            return None
        return matrix_l2_distance(a, b, labels_a=la(ref), labels_b=lb(other))

    return {
        "num_num": dist("num_num", lambda m: m.num_cols, lambda m: m.num_cols),
        "cat_cat": dist("cat_cat", lambda m: m.cat_cols, lambda m: m.cat_cols),
        "num_cat": dist("num_cat", lambda m: (m.cat_cols, m.num_cols), lambda m: (m.cat_cols, m.num_cols)),
    }


def _mean(values: Mapping[str, float]) -> float | None:
    if not values:
        return None
    # fixed summation order (schema order) for bit-determinism
    total = 0.0
    for v in values.values():
        total += v
    return total / len(values)


@dataclass
class FidelityReport:
    numeric_wd: dict[str, float]
    categorical_js: dict[str, float]
    derived_wd: dict[str, float]
    num_mean: float | None
    cat_mean: float | None
    derived_mean: float | None
    joint: dict[str, float | None]
    degenerate: list[str] = field(default_factory=list)
    wd_scaling: str = "raw"

    def to_dict(self) -> dict:
        return {
            "marginal": {
                "num_mean": self.num_mean,
                "cat_mean": self.cat_mean,
                "derived_mean": self.derived_mean,
                "numeric_wd": dict(self.numeric_wd),
                "categorical_js": dict(self.categorical_js),
                "derived_wd": dict(self.derived_wd),
                "wd_scaling": self.wd_scaling,
            },
            "joint": dict(self.joint),
            "degenerate": list(self.degenerate),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FidelityReport":
        m = doc["marginal"]
        return cls(
            numeric_wd=dict(m["numeric_wd"]),
            categorical_js=dict(m["categorical_js"]),
            derived_wd=dict(m["derived_wd"]),
            num_mean=m["num_mean"],
            cat_mean=m["cat_mean"],
            derived_mean=m["derived_mean"],
            joint=dict(doc["joint"]),
            degenerate=list(doc["degenerate"]),
            wd_scaling=m["wd_scaling"],
        )


def _minmax(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi <= lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def fidelity_report(
    train: Dataset,
    other: Dataset,
    derived: Sequence[DerivedFeatureSpec] = (),
    *,
    wd_scaling: str = "raw",
) -> FidelityReport:
    """Compare ``other`` against ``train`` column by column and through their association matrices.

    Args:
        train: Reference table.
        other: Holdout or synthetic table with the same schema.
        derived: Features recomputed from each table's own primitive columns and compared
            by Wasserstein distance; listed separately from primitive columns.
        wd_scaling: ``"raw"`` (default) compares values as-is; ``"minmax"`` first scales
            both sides by the training column's range so distances are comparable across columns.
    """
    if wd_scaling not in ("raw", "minmax"):
        raise ConfigError(f"wd_scaling must be 'raw' or 'minmax', got {wd_scaling!r}")
    require_same_schema(train, other)

    def wd(name: str, a: np.ndarray, b: np.ndarray) -> float:
        try:
            if wd_scaling == "minmax":
                lo, hi = float(a.min()), float(a.max())
                a, b = _minmax(a, lo, hi), _minmax(b, lo, hi)
            return wasserstein_1d(a, b)
        except DataError as exc:
            raise type(exc)(f"column {name!r}: {exc}") from exc

    numeric_wd = {c: wd(c, train.column(c), other.column(c)) for c in train.schema.numeric()}
    categorical_js = {}
    for c in train.schema.categorical():
        a, b = train.column(c), other.column(c)
        if a.size == 0 or b.size == 0:
            raise EmptyInput(f"column {c!r}: empty sample")
        categorical_js[c] = js_distance_columns(a, b)
    derived_wd = {
        spec.name: wd(spec.name, derived_values(train, spec), derived_values(other, spec)) for spec in derived
    }

    ref = association_matrices(train)
    cand = association_matrices(other)
    degenerate = sorted(set(ref.degenerate) | set(cand.degenerate))
    return FidelityReport(
        numeric_wd=numeric_wd,
        categorical_js=categorical_js,
        derived_wd=derived_wd,
        num_mean=_mean(numeric_wd),
        cat_mean=_mean(categorical_js),
        derived_mean=_mean(derived_wd),
        joint=joint_distances(ref, cand),
        degenerate=degenerate,
        wd_scaling=wd_scaling,
    )


@dataclass(frozen=True)
class HistogramDiff:
    edges: np.ndarray
    train_freq: np.ndarray
    other_freq: np.ndarray

    @property
    def diff(self) -> np.ndarray:
        return self.other_freq - self.train_freq

    def rows(self) -> list[tuple[float, float, float, float, float]]:
        d = self.diff
        return [
            (float(self.edges[i]), float(self.edges[i + 1]), float(self.train_freq[i]), float(self.other_freq[i]), float(d[i]))
            for i in range(len(d))
        ]

    def write_csv(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_edge_lo", "bin_edge_hi", "train_freq", "other_freq", "diff"])
            for row in self.rows():
                w.writerow([repr(v) for v in row])


def _fd_bins(values: np.ndarray, lo: float, hi: float) -> int:
    q75, q25 = np.percentile(values, [75, 25])
    width = 2.0 * (q75 - q25) / values.size ** (1.0 / 3.0)
    if width <= 0:
        return DEFAULT_BINS
    return int(min(1000, max(1, math.ceil((hi - lo) / width))))


def histogram_diff(train_col, other_col, bins: int | str = DEFAULT_BINS) -> HistogramDiff:
    """Normalised histograms of two samples on shared edges, plus their difference.

    ``bins`` is a bin count or ``"fd"`` for the Freedman-Diaconis rule on the training sample.
    """
    a = _as_sample(train_col, "train column")
    b = _as_sample(other_col, "other column")
    lo = float(min(a.min(), b.min()))
    hi = float(max(a.max(), b.max()))
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    if bins == "fd":
        n_bins = _fd_bins(a, lo, hi)
    elif isinstance(bins, (int, np.integer)) and not isinstance(bins, bool) and bins > 0:
        n_bins = int(bins)
    else:
        raise ConfigError(f"bins must be a positive integer or 'fd', got {bins!r}")
    edges = np.linspace(lo, hi, n_bins + 1)
    train_counts, _ = np.histogram(a, bins=edges)
    other_counts, _ = np.histogram(b, bins=edges)
    return HistogramDiff(edges, train_counts / a.size, other_counts / b.size)


def histogram_diffs(train: Dataset, other: Dataset, derived: Sequence[DerivedFeatureSpec] = (), bins: int | str = DEFAULT_BINS) -> dict[str, HistogramDiff]:
    """Histogram differences for every numeric and derived column."""
    out = {c: histogram_diff(train.column(c), other.column(c), bins) for c in train.schema.numeric()}
    for spec in derived:
        out[spec.name] = histogram_diff(derived_values(train, spec), derived_values(other, spec), bins)
    return out
