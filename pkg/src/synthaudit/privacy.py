"""Distance to Closest Record and Closest Cluster Ratio over mixed-type records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .data import Dataset, require_same_schema
from .errors import EmptyReference, SchemaMismatch


@dataclass(frozen=True)
class DistanceConfig:
    """Per-column scaling for the mixed L1 distance, fitted on the training table.

    Numeric values are min-max scaled by the training bounds and clamped to [0, 1];
    categorical columns cost 1 on mismatch. Columns with zero training range contribute
    nothing and are listed in ``zero_range``.
    """

    numeric: tuple[str, ...]
    categorical: tuple[str, ...]
    bounds: Mapping[str, tuple[float, float]]
    zero_range: tuple[str, ...] = ()

    @classmethod
    def fit(cls, train: Dataset) -> "DistanceConfig":
        numeric = train.schema.numeric()
        if train.row_count == 0:
            raise EmptyReference("cannot fit distance bounds on an empty table")
        bounds = {c: (float(train.column(c).min()), float(train.column(c).max())) for c in numeric}
        zero = tuple(c for c in numeric if bounds[c][1] <= bounds[c][0])
        return cls(numeric, train.schema.categorical(), bounds, zero)

    @property
    def columns(self) -> tuple[str, ...]:
        return self.numeric + self.categorical

    def scale(self, column: str, values):
        lo, hi = self.bounds[column]
        if hi <= lo:
            return np.zeros_like(np.asarray(values, dtype=np.float64))
        return np.clip((np.asarray(values, dtype=np.float64) - lo) / (hi - lo), 0.0, 1.0)

    def check(self, dataset: Dataset) -> None:
        if set(dataset.schema.numeric()) != set(self.numeric) or set(dataset.schema.categorical()) != set(self.categorical):
            raise SchemaMismatch("dataset columns do not match the distance configuration")

    def to_dict(self) -> dict:
        return {
            "bounds": {c: list(self.bounds[c]) for c in self.numeric},
            "categorical": list(self.categorical),
            "zero_range": list(self.zero_range),
        }


def _scalar_scale(config: DistanceConfig, column: str, value: float) -> float:
    lo, hi = config.bounds[column]
    if hi <= lo:
        return 0.0
    return min(1.0, max(0.0, (float(value) - lo) / (hi - lo)))


def mixed_l1_distance(a: Mapping | Sequence, b: Mapping | Sequence, config: DistanceConfig) -> float:
    """Distance between two records: scaled numeric absolute differences plus categorical mismatches.

    Records are mappings keyed by column name, or sequences ordered as
    ``config.numeric + config.categorical``.
    """
    cols = config.columns

    def as_map(rec) -> Mapping:
        if isinstance(rec, Mapping):
            missing = [c for c in cols if c not in rec]
            if missing:
                raise SchemaMismatch(f"record lacks columns {missing}")
            return rec
        if len(rec) != len(cols):
            raise SchemaMismatch(f"record has {len(rec)} fields, expected {len(cols)}")
        return dict(zip(cols, rec))

    ra, rb = as_map(a), as_map(b)
    acc = 0.0
    for c in config.numeric:
        acc = acc + abs(_scalar_scale(config, c, ra[c]) - _scalar_scale(config, c, rb[c]))
    for c in config.categorical:
        if ra[c] != rb[c]:
            acc = acc + 1.0
    return acc


def encode(config: DistanceConfig, *datasets: Dataset) -> list[tuple[np.ndarray, np.ndarray]]:
    """Scaled numeric matrix and shared categorical code matrix for each dataset."""
    for ds in datasets:
        config.check(ds)
    luts: dict[str, dict[str, int]] = {c: {} for c in config.categorical}
    out = []
    for ds in datasets:
        num = np.empty((ds.row_count, len(config.numeric)), dtype=np.float64)
        for j, c in enumerate(config.numeric):
            num[:, j] = config.scale(c, ds.column(c))
        cat = np.empty((ds.row_count, len(config.categorical)), dtype=np.int64)
        for j, c in enumerate(config.categorical):
            lut = luts[c]
            cat[:, j] = [lut.setdefault(v, len(lut)) for v in ds.column(c).tolist()]
        out.append((num, cat))
    return out


@dataclass(frozen=True)
class DCRResult:
    distances: np.ndarray
    median: float
    p05: float


def _summarize(d: np.ndarray) -> DCRResult:
    if d.size == 0:
        return DCRResult(d, 0.0, 0.0)
    return DCRResult(d, float(np.median(d)), float(np.percentile(d, 5)))


def dcr(query: Dataset, reference: Dataset, config: DistanceConfig) -> DCRResult:
    """Distance from every query record to its nearest reference record, with median and 5th percentile."""
    require_same_schema(query, reference)
    if reference.row_count == 0:
        raise EmptyReference("reference table is empty")
    (qn, qc), (rn, rc) = encode(config, query, reference)
    return _summarize(kernels.nearest_l1(qn, qc, rn, rc))


def ccr(synthetic: Dataset, train: Dataset, holdout: Dataset, config: DistanceConfig) -> float:
    """Share of synthetic records at least as close to ``train`` as to ``holdout`` (ties count as train)."""
    require_same_schema(synthetic, train)
    require_same_schema(synthetic, holdout)
    if train.row_count == 0 or holdout.row_count == 0:
        raise EmptyReference("train and holdout must both be non-empty")
    if synthetic.row_count == 0:
        return 0.0
    (sn, sc), (tn, tc), (hn, hc) = encode(config, synthetic, train, holdout)
    to_train = kernels.nearest_l1(sn, sc, tn, tc)
    to_holdout = kernels.nearest_l1(sn, sc, hn, hc)
    return float(np.mean(to_train <= to_holdout))


@dataclass
class PrivacyReport:
    dcr_raw_median: float
    dcr_holdout_baseline: float
    dcr_normalized: float | None
    dcr_p05: float
    holdout_dcr_p05: float
    ccr: float
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dcr_raw_median": self.dcr_raw_median,
            "dcr_holdout_baseline": self.dcr_holdout_baseline,
            "dcr_normalized": self.dcr_normalized,
            "dcr_p05": self.dcr_p05,
            "holdout_dcr_p05": self.holdout_dcr_p05,
            "ccr": self.ccr,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PrivacyReport":
        return cls(**doc)


def privacy_report(synthetic: Dataset, train: Dataset, holdout: Dataset, config: DistanceConfig | None = None) -> PrivacyReport:
    """DCR of synthetic->train, normalised by the holdout->train median, plus CCR.

    ``config`` defaults to bounds fitted on ``train``.
    """
    config = config or DistanceConfig.fit(train)
    require_same_schema(synthetic, train)
    require_same_schema(holdout, train)
    if train.row_count == 0 or holdout.row_count == 0:
        raise EmptyReference("train and holdout must both be non-empty")
    (sn, sc), (tn, tc), (hn, hc) = encode(config, synthetic, train, holdout)
    s_to_t = _summarize(kernels.nearest_l1(sn, sc, tn, tc))
    h_to_t = _summarize(kernels.nearest_l1(hn, hc, tn, tc))
    s_to_h = kernels.nearest_l1(sn, sc, hn, hc)
    warnings = [f"column {c!r} has zero range in train and contributes no distance" for c in config.zero_range]
    if h_to_t.median > 0:
        normalized = s_to_t.median / h_to_t.median
    else:
        normalized = None
        warnings.append("holdout->train median DCR is 0; normalized DCR undefined")
    ratio = float(np.mean(s_to_t.distances <= s_to_h)) if synthetic.row_count else 0.0
    return PrivacyReport(
        dcr_raw_median=s_to_t.median,
        dcr_holdout_baseline=h_to_t.median,
        dcr_normalized=normalized,
        dcr_p05=s_to_t.p05,
        holdout_dcr_p05=h_to_t.p05,
        ccr=ratio,
        warnings=warnings,
    )
