"""Retail preprocessing steps and the train / holdout / eval split."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .data import ColumnKind, ColumnSchema, Dataset, TableSchema
from .errors import ConfigError, DataError, DivisionByZero, InvalidRatios, NameCollision

CLUSTER_COLUMN = "customer_cluster"
DEFAULT_RATIOS = (0.4, 0.4, 0.2)
DEFAULT_MIN_PRODUCT_COUNT = 20


def _group_codes(dataset: Dataset, cols: Sequence[str]) -> tuple[np.ndarray, int]:
    """Dense group ids numbered in first-appearance order."""
    n = dataset.row_count
    if not cols:
        return np.zeros(n, dtype=np.intp), 1 if n else 0
    keys = list(zip(*(dataset.column(c).tolist() for c in cols)))
    seen: dict = {}
    codes = np.fromiter((seen.setdefault(k, len(seen)) for k in keys), dtype=np.intp, count=n)
    return codes, len(seen)


def filter_positive(transactions: Dataset, qty_col: str = "quantity", sales_col: str = "sales_value") -> Dataset:
    """Drop rows whose quantity or sales value is not strictly positive."""
    for c in (qty_col, sales_col):
        transactions.schema.require(c, ColumnKind.NUMERIC)
    mask = (transactions.column(qty_col) > 0) & (transactions.column(sales_col) > 0)
    return transactions.filter(mask)


def remove_infrequent_products(transactions: Dataset, product_col: str = "product_id", min_count: int = DEFAULT_MIN_PRODUCT_COUNT) -> Dataset:
    """Keep only rows whose product occurs at least ``min_count`` times."""
    transactions.schema.require(product_col, ColumnKind.CATEGORICAL)
    if min_count < 1:
        raise ConfigError("min_count must be a positive integer")
    codes, n_groups = _group_codes(transactions, [product_col])
    freq = np.bincount(codes, minlength=n_groups)
    return transactions.filter(freq[codes] >= min_count)


def aggregate_weekly(
    transactions: Dataset,
    key_cols: Sequence[str] = ("household_id", "product_id", "week"),
    sum_cols: Sequence[str] | None = None,
    first_cols: Sequence[str] | None = None,
) -> Dataset:
    """Collapse rows sharing a key tuple into one row.

    ``sum_cols`` are summed (default: every numeric non-key column), ``first_cols`` keep
    the first value in input order (default: every remaining column). Output rows appear
    in first-appearance order of their key.
    """
    schema = transactions.schema
    for c in key_cols:
        schema.require(c)
    if sum_cols is None:
        sum_cols = [c for c in schema.numeric() if c not in key_cols]
    for c in sum_cols:
        schema.require(c, ColumnKind.NUMERIC)
    if first_cols is None:
        first_cols = [c for c in schema.names if c not in key_cols and c not in sum_cols]
    for c in first_cols:
        schema.require(c)

    codes, n_groups = _group_codes(transactions, key_cols)
    # group ids are dense and first-appearance ordered, so this is each group's first row
    _, first_row = np.unique(codes, return_index=True)

    out_names = [c for c in schema.names if c in key_cols or c in sum_cols or c in first_cols]
    columns = {}
    for name in out_names:
        if name in sum_cols:
            # np.add.at accumulates in row order, so totals are order-deterministic
            totals = np.zeros(n_groups, dtype=np.float64)
            np.add.at(totals, codes, transactions.column(name))
            columns[name] = totals
        else:
            columns[name] = transactions.column(name)[first_row]
    return Dataset(schema.select(out_names), columns)


def cluster_customers(transactions: Dataset, demographic_cols: Sequence[str], out_col: str = CLUSTER_COLUMN) -> Dataset:
    """Label every row with its exact demographic tuple, e.g. ``age=35-44|household_size=2``."""
    for c in demographic_cols:
        transactions.schema.require(c, ColumnKind.CATEGORICAL)
    cols = [transactions.column(c).tolist() for c in demographic_cols]
    labels = ["|".join(f"{name}={v}" for name, v in zip(demographic_cols, vals)) for vals in zip(*cols)]
    return transactions.with_column(ColumnSchema(out_col, ColumnKind.CATEGORICAL), labels)


@dataclass(frozen=True)
class DerivedFeatureSpec:
    """A numeric column computed from existing ones.

    ``op`` is one of ``unit_price`` (``sales / qty``), ``basket_size`` (group total of
    ``qty`` over ``group_cols``), ``ratio`` (``a / b``) or ``difference`` (``a - b``).
    """

    name: str
    op: str
    a: str | None = None
    b: str | None = None
    group_cols: tuple[str, ...] = field(default_factory=tuple)

    OPS = ("unit_price", "basket_size", "ratio", "difference")

    def __post_init__(self) -> None:
        if self.op not in self.OPS:
            raise ConfigError(f"unknown derived feature op {self.op!r}; expected one of {self.OPS}")
        object.__setattr__(self, "group_cols", tuple(self.group_cols))
        if self.a is None or (self.op != "basket_size" and self.b is None):
            raise ConfigError(f"derived feature {self.name!r} is missing operand columns")
        if self.op == "basket_size" and not self.group_cols:
            raise ConfigError(f"basket_size feature {self.name!r} needs group_cols")

    @classmethod
    def unit_price(cls, sales_col: str = "sales_value", qty_col: str = "quantity", name: str = "unit_price") -> "DerivedFeatureSpec":
        return cls(name, "unit_price", sales_col, qty_col)

    @classmethod
    def basket_size(cls, group_cols: Sequence[str] = ("household_id", "week"), qty_col: str = "quantity", name: str = "basket_size") -> "DerivedFeatureSpec":
        return cls(name, "basket_size", qty_col, None, tuple(group_cols))

    @classmethod
    def from_dict(cls, doc: dict) -> "DerivedFeatureSpec":
        try:
            op = doc["op"]
            name = doc["name"]
            if op == "unit_price":
                return cls.unit_price(doc.get("sales_col", "sales_value"), doc.get("qty_col", "quantity"), name)
            if op == "basket_size":
                return cls.basket_size(doc["group_cols"], doc.get("qty_col", "quantity"), name)
            return cls(name, op, doc["a"], doc["b"])
        except KeyError as exc:
            raise ConfigError(f"derived feature missing key {exc}") from exc

    def to_dict(self) -> dict:
        if self.op == "unit_price":
            return {"name": self.name, "op": self.op, "sales_col": self.a, "qty_col": self.b}
        if self.op == "basket_size":
            return {"name": self.name, "op": self.op, "group_cols": list(self.group_cols), "qty_col": self.a}
        return {"name": self.name, "op": self.op, "a": self.a, "b": self.b}


def derived_values(dataset: Dataset, spec: DerivedFeatureSpec) -> np.ndarray:
    """Compute the values of ``spec`` on ``dataset`` without attaching them."""
    schema = dataset.schema
    if spec.op == "basket_size":
        qty = schema.require(spec.a, ColumnKind.NUMERIC).name
        for c in spec.group_cols:
            schema.require(c)
        codes, n_groups = _group_codes(dataset, spec.group_cols)
        totals = np.zeros(n_groups, dtype=np.float64)
        np.add.at(totals, codes, dataset.column(qty))
        return totals[codes]
    a = dataset.column(schema.require(spec.a, ColumnKind.NUMERIC).name)
    b = dataset.column(schema.require(spec.b, ColumnKind.NUMERIC).name)
    if spec.op == "difference":
        return a - b
    zero = np.flatnonzero(b == 0)
    if zero.size:
        raise DivisionByZero(f"{spec.name}: column {spec.b!r} is zero at rows {zero[:5].tolist()}")
    return a / b


def derive(dataset: Dataset, spec: DerivedFeatureSpec) -> Dataset:
    """Append the numeric column described by ``spec``."""
    if spec.name in dataset.schema:
        raise NameCollision(f"derived column {spec.name!r} already exists")
    return dataset.with_column(ColumnSchema(spec.name, ColumnKind.NUMERIC), derived_values(dataset, spec))


def derive_all(dataset: Dataset, specs: Iterable[DerivedFeatureSpec]) -> Dataset:
    for spec in specs:
        dataset = derive(dataset, spec)
    return dataset


def join_left(left: Dataset, right: Dataset, on: str, how: str = "inner") -> Dataset:
    """Many-to-one join: attach ``right``'s columns to ``left`` rows by key ``on``.

    Duplicate keys in ``right`` keep their first row. With ``how="inner"`` unmatched
    left rows are dropped; ``how="left"`` requires every key to match.
    """
    left.schema.require(on)
    right.schema.require(on)
    lookup: dict = {}
    for i, k in enumerate(right.column(on).tolist()):
        lookup.setdefault(k, i)
    idx = np.array([lookup.get(k, -1) for k in left.column(on).tolist()], dtype=np.intp)
    if how == "left" and (idx < 0).any():
        raise DataError(f"{on}: {int((idx < 0).sum())} keys have no match")
    keep = np.flatnonzero(idx >= 0)
    extra = [c for c in right.schema.columns if c.name != on]
    for c in extra:
        if c.name in left.schema:
            raise NameCollision(f"join would duplicate column {c.name!r}")
    schema = TableSchema(left.schema.columns + tuple(extra))
    cols = {n: left.column(n)[keep] for n in left.names}
    for c in extra:
        cols[c.name] = right.column(c.name)[idx[keep]]
    return Dataset(schema, cols)


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    seed: int = 0
    group_by: str | None = None

    def __post_init__(self) -> None:
        ratios = tuple(float(r) for r in self.ratios)
        if len(ratios) != 3 or any(not math.isfinite(r) or r < 0 for r in ratios):
            raise InvalidRatios(f"ratios must be three non-negative numbers, got {self.ratios}")
        if abs(sum(ratios) - 1.0) > 1e-12:
            raise InvalidRatios(f"ratios must sum to 1, got {sum(ratios)!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidRatios("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "ratios", ratios)


@dataclass(frozen=True)
class SplitBundle:
    train: Dataset
    holdout: Dataset
    eval: Dataset

    def parts(self) -> dict[str, Dataset]:
        return {"train": self.train, "holdout": self.holdout, "eval": self.eval}


def target_sizes(n: int, ratios: Sequence[float]) -> list[int]:
    """``floor(ratio * n)`` per part, then leftover rows one at a time to T, H, E (skipping zero ratios)."""
    sizes = [math.floor(r * n) for r in ratios]
    order = [i for i, r in enumerate(ratios) if r > 0]
    k = 0
    while sum(sizes) < n:
        sizes[order[k % len(order)]] += 1
        k += 1
    return sizes


def split(dataset: Dataset, spec: SplitSpec = SplitSpec()) -> SplitBundle:
    """Random three-way partition. Each part keeps the input's row order."""
    n = dataset.row_count
    if n < 3 and all(r > 0 for r in spec.ratios):
        raise InvalidRatios(f"need at least 3 rows for three non-empty parts, got {n}")
    rng = np.random.default_rng(int(spec.seed))
    sizes = target_sizes(n, spec.ratios)
    assignment = np.empty(n, dtype=np.intp)

    if spec.group_by is None:
        perm = rng.permutation(n)
        bounds = np.cumsum([0] + sizes)
        for part in range(3):
            assignment[perm[bounds[part]:bounds[part + 1]]] = part
    else:
        dataset.schema.require(spec.group_by)
        codes, n_groups = _group_codes(dataset, [spec.group_by])
        group_sizes = np.bincount(codes, minlength=n_groups)
        group_part = np.empty(n_groups, dtype=np.intp)
        filled = [0, 0, 0]
        last = max(i for i, r in enumerate(spec.ratios) if r > 0)
        for g in rng.permutation(n_groups):
            part = next((p for p in range(3) if filled[p] < sizes[p]), last)
            group_part[g] = part
            filled[part] += int(group_sizes[g])
        assignment = group_part[codes]

    return SplitBundle(*(dataset.take(np.flatnonzero(assignment == p)) for p in range(3)))
