"""Typed columnar datasets: schema, CSV ingestion/serialization, validation and category alignment."""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    EmptyFile,
    KindMismatch,
    MissingColumn,
    MissingValue,
    NameCollision,
    SchemaMismatch,
    TypeParseError,
    UnknownColumn,
    ValidationFailure,
)

MISSING_LABEL = "__missing__"

# Plain decimal / scientific notation only; rejects "nan", "inf", "1_000" and locale separators.
_NUMBER_RE = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


class ColumnKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class FillPolicy(str, Enum):
    """How ingestion treats blank cells. ``REJECT`` raises; ``FILL`` imputes median / ``__missing__``."""

    REJECT = "reject"
    FILL = "fill"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: ColumnKind
    alias: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ColumnKind(self.kind))

    def to_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind.value}
        if self.alias is not None:
            out["alias"] = self.alias
        return out


@dataclass(frozen=True)
class TableSchema:
    """Ordered column declarations. Column order here is the canonical order everywhere."""

    columns: tuple[ColumnSchema, ...]
    _by_name: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        cols = tuple(self.columns)
        object.__setattr__(self, "columns", cols)
        names = [c.name for c in cols]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ConfigError(f"duplicate column names in schema: {dupes}")
        aliases = [c.alias for c in cols if c.alias is not None]
        dupes = sorted({a for a in aliases if aliases.count(a) > 1})
        if dupes:
            raise ConfigError(f"duplicate aliases in schema: {dupes}")
        object.__setattr__(self, "_by_name", {c.name: c for c in cols})

    @classmethod
    def of(cls, *pairs: tuple[str, str]) -> "TableSchema":
        """Shorthand: ``TableSchema.of(("qty", "numeric"), ("age", "categorical"))``."""
        return cls(tuple(ColumnSchema(n, ColumnKind(k)) for n, k in pairs))

    @classmethod
    def from_dict(cls, doc: Mapping) -> "TableSchema":
        try:
            cols = tuple(
                ColumnSchema(c["name"], ColumnKind(c["kind"]), c.get("alias")) for c in doc["columns"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed schema document: {exc}") from exc
        return cls(cols)

    def to_dict(self) -> dict:
        return {"columns": [c.to_dict() for c in self.columns]}

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def __contains__(self, name: object) -> bool:
        return name in self._by_name

    def __getitem__(self, name: str) -> ColumnSchema:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownColumn(name) from None

    def __len__(self) -> int:
        return len(self.columns)

    def kind_of(self, name: str) -> ColumnKind:
        return self[name].kind

    def numeric(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns if c.kind is ColumnKind.NUMERIC)

    def categorical(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns if c.kind is ColumnKind.CATEGORICAL)

    def select(self, names: Iterable[str]) -> "TableSchema":
        return TableSchema(tuple(self[n] for n in names))

    def with_column(self, col: ColumnSchema) -> "TableSchema":
        if col.name in self:
            raise NameCollision(f"column {col.name!r} already exists")
        return TableSchema(self.columns + (col,))

    def require(self, name: str, kind: ColumnKind | None = None) -> ColumnSchema:
        col = self[name]
        if kind is not None and col.kind is not kind:
            raise KindMismatch(name, kind.value, col.kind.value)
        return col


def load_schema(path: str | Path) -> TableSchema:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return TableSchema.from_dict(doc)


def _as_column(kind: ColumnKind, values) -> np.ndarray:
    if kind is ColumnKind.NUMERIC:
        arr = np.array(values, dtype=np.float64)
    else:
        arr = np.empty(len(values), dtype=object)
        arr[:] = [v if isinstance(v, str) or v is None else str(v) for v in values]
    arr.setflags(write=False)
    return arr


class Dataset:
    """An immutable, schema-typed table.

    Numeric columns are ``float64`` arrays, categorical columns are object arrays of ``str``.
    All arrays are marked read-only so a dataset can be shared freely.

    Args:
        schema: Column declarations; the dataset's column order follows it.
        columns: Mapping from column name to a sequence of values.
        check: Run :func:`validate` on construction. Pass ``False`` only to build
            deliberately broken datasets (tests) or when the caller already guarantees the invariants.
    """

    __slots__ = ("schema", "_columns", "_row_count")

    def __init__(self, schema: TableSchema, columns: Mapping[str, Sequence], *, check: bool = True) -> None:
        self.schema = schema
        self._columns = {c.name: _as_column(c.kind, columns[c.name]) for c in schema.columns if c.name in columns}
        first = next(iter(self._columns.values()), None)
        self._row_count = 0 if first is None else len(first)
        if check:
            validate(self)

    @property
    def row_count(self) -> int:
        return self._row_count

    def __len__(self) -> int:
        return self._row_count

    @property
    def names(self) -> tuple[str, ...]:
        return self.schema.names

    def column(self, name: str) -> np.ndarray:
        if name not in self.schema:
            raise UnknownColumn(name)
        return self._columns[name]

    __getitem__ = column

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.schema, {n: c[idx] for n, c in self._columns.items()}, check=False)

    def filter(self, mask) -> "Dataset":
        return self.take(np.flatnonzero(np.asarray(mask, dtype=bool)))

    def select(self, names: Iterable[str]) -> "Dataset":
        names = list(names)
        schema = self.schema.select(names)
        return Dataset(schema, {n: self._columns[n] for n in names}, check=False)

    def with_column(self, col: ColumnSchema, values) -> "Dataset":
        schema = self.schema.with_column(col)
        cols = dict(self._columns)
        cols[col.name] = values
        return Dataset(schema, cols)

    def with_schema(self, schema: TableSchema) -> "Dataset":
        """Re-label columns (e.g. attach aliases). Names and kinds must be unchanged."""
        if [(c.name, c.kind) for c in schema.columns] != [(c.name, c.kind) for c in self.schema.columns]:
            raise SchemaMismatch("with_schema may only change aliases")
        return Dataset(schema, self._columns, check=False)

    def to_records(self) -> list[tuple]:
        return list(zip(*(self._columns[n].tolist() for n in self.names)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.schema != other.schema or self.row_count != other.row_count:
            return False
        return all(np.array_equal(self._columns[n], other._columns[n]) for n in self.names)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Dataset(rows={self.row_count}, columns={list(self.names)})"


def validate(dataset: Dataset) -> None:
    """Check every dataset invariant; raise :class:`ValidationFailure` listing all violations."""
    violations: list[str] = []
    cols = dataset._columns
    for c in dataset.schema.columns:
        if c.name not in cols:
            violations.append(f"column {c.name!r} declared but absent")
            continue
        arr = cols[c.name]
        if arr.ndim != 1:
            violations.append(f"column {c.name!r} is not one-dimensional")
            continue
        if len(arr) != dataset.row_count:
            violations.append(f"column {c.name!r} has length {len(arr)}, expected {dataset.row_count}")
        if c.kind is ColumnKind.NUMERIC:
            if arr.dtype != np.float64:
                violations.append(f"numeric column {c.name!r} has dtype {arr.dtype}")
            else:
                bad = np.flatnonzero(~np.isfinite(arr))
                if bad.size:
                    violations.append(f"numeric column {c.name!r} has non-finite values at rows {bad[:5].tolist()}")
        else:
            bad = [i for i, v in enumerate(arr) if not isinstance(v, str)]
            if bad:
                violations.append(f"categorical column {c.name!r} has missing/non-string cells at rows {bad[:5]}")
    if violations:
        raise ValidationFailure(violations)


def _read_rows(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        raise EmptyFile(f"{path}: file is empty")
    reader = csv.reader(io.StringIO(text))
    header = [h.strip() for h in next(reader)]
    rows = [r for r in reader if r]
    return header, rows


def read_header(path: str | Path) -> list[str]:
    return _read_rows(path)[0]


def load_csv(
    path: str | Path,
    schema: TableSchema,
    fill_policy: FillPolicy | str | None = None,
) -> Dataset:
    """Read a UTF-8 CSV with a header row into a :class:`Dataset`.

    Header order is irrelevant; the schema's order wins. Columns present in the file but
    absent from the schema are ignored.

    Raises:
        EmptyFile: no header row.
        MissingColumn: a schema column is absent from the header.
        TypeParseError: a numeric cell is not a finite decimal number.
        MissingValue: a blank cell and no fill policy.
    """
    policy = FillPolicy(fill_policy) if fill_policy is not None else FillPolicy.REJECT
    header, rows = _read_rows(path)
    positions = {name: i for i, name in enumerate(header)}
    for name in schema.names:
        if name not in positions:
            raise MissingColumn(name, str(path))

    columns: dict[str, list] = {}
    for col in schema.columns:
        j = positions[col.name]
        values: list = []
        missing: list[int] = []
        for i, row in enumerate(rows):
            raw = row[j].strip() if j < len(row) else ""
            # data rows are 1-based after the header, as a spreadsheet would show them
            lineno = i + 1
            if raw == "":
                if policy is FillPolicy.REJECT:
                    raise MissingValue(lineno, col.name)
                missing.append(i)
                values.append(None)
                continue
            if col.kind is ColumnKind.NUMERIC:
                if not _NUMBER_RE.match(raw):
                    raise TypeParseError(lineno, col.name, raw)
                v = float(raw)
                if not np.isfinite(v):
                    raise TypeParseError(lineno, col.name, raw)
                values.append(v)
            else:
                values.append(raw)
        if missing:
            if col.kind is ColumnKind.NUMERIC:
                present = [v for v in values if v is not None]
                if not present:
                    raise MissingValue(missing[0] + 1, col.name)
                fill = float(np.median(present))
            else:
                fill = MISSING_LABEL
            for i in missing:
                values[i] = fill
        columns[col.name] = values
    return Dataset(schema, columns)


def _format_cell(kind: ColumnKind, value) -> str:
    if kind is ColumnKind.NUMERIC:
        return repr(float(value))
    return value


def to_csv_text(dataset: Dataset) -> str:
    """Canonical CSV text: schema column order, ``\\n`` line endings, shortest round-trip floats."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset.names)
    kinds = [c.kind for c in dataset.schema.columns]
    cols = [dataset.column(n).tolist() for n in dataset.names]
    for row in zip(*cols):
        writer.writerow([_format_cell(k, v) for k, v in zip(kinds, row)])
    return buf.getvalue()


def write_csv(dataset: Dataset, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(to_csv_text(dataset))


@dataclass(frozen=True)
class CategoryIndex:
    """Sorted union of labels for one categorical column across two datasets."""

    column: str
    labels: tuple[str, ...]

    @property
    def lookup(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def codes(self, values) -> np.ndarray:
        lut = self.lookup
        return np.fromiter((lut[v] for v in values), dtype=np.intp, count=len(values))

    def counts(self, values) -> np.ndarray:
        return np.bincount(self.codes(values), minlength=len(self.labels)).astype(np.float64)

    @classmethod
    def from_values(cls, column: str, *value_sets: Iterable[str]) -> "CategoryIndex":
        union: set[str] = set()
        for vs in value_sets:
            union.update(vs)
        return cls(column, tuple(sorted(union)))


def align_categories(a: Dataset, b: Dataset, column: str) -> CategoryIndex:
    """Common label index for ``column`` over both datasets, lexicographically ordered."""
    for ds in (a, b):
        ds.schema.require(column, ColumnKind.CATEGORICAL)
    return CategoryIndex.from_values(column, a.column(column), b.column(column))


def require_same_schema(a: Dataset, b: Dataset) -> None:
    left = [(c.name, c.kind) for c in a.schema.columns]
    right = [(c.name, c.kind) for c in b.schema.columns]
    if left != right:
        raise SchemaMismatch(f"schemas differ: {left} vs {right}")


def fingerprint(dataset: Dataset) -> dict:
    """Row count plus 64-bit FNV-1a over the canonical CSV bytes."""
    from .kernels import fnv1a_64

    digest = fnv1a_64(to_csv_text(dataset).encode("utf-8"))
    return {"rows": dataset.row_count, "fnv1a64": f"{digest:016x}"}
