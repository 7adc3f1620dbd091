"""Known-answer synthesizers used as evaluation fixtures.

``copy`` memorises the training table, ``noisy-copy`` perturbs it slightly,
``independent`` keeps every marginal but destroys all dependence, and ``copula``
keeps marginals plus the numeric rank-correlation structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .data import Dataset
from .errors import EmptyInput, InvalidSpec

METHODS = ("copy", "noisy-copy", "independent", "copula")


@dataclass(frozen=True)
class SynthesizerSpec:
    method: str
    seed: int = 0
    rows: int | None = None
    noise_scale: float = 0.05

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise InvalidSpec(f"unknown synthesizer {self.method!r}; expected one of {METHODS}")
        if not self.noise_scale >= 0:
            raise InvalidSpec("noise_scale must be non-negative")
        if self.rows is not None and self.rows < 1:
            raise InvalidSpec("output row count must be at least 1")


def _resample_rows(rng: np.random.Generator, n_train: int, n_out: int) -> np.ndarray:
    if n_out == n_train:
        return np.arange(n_train)
    return rng.integers(0, n_train, size=n_out)


def _independent_column(rng: np.random.Generator, values: np.ndarray, n_out: int) -> np.ndarray:
    return values[rng.integers(0, values.size, size=n_out)]


def _normal_scores(values: np.ndarray) -> np.ndarray:
    # average ranks for ties, mapped to standard-normal quantiles
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    _, start, counts = np.unique(sorted_vals, return_index=True, return_counts=True)
    avg = start + (counts + 1) / 2.0
    ranks[order] = np.repeat(avg, counts)
    return ndtri((ranks - 0.5) / values.size)


def _nearest_correlation(c: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(c)
    w = np.clip(w, 1e-10, None)
    fixed = (v * w) @ v.T
    d = np.sqrt(np.diag(fixed))
    return fixed / np.outer(d, d)


def synthesize(train: Dataset, spec: SynthesizerSpec) -> Dataset:
    """Generate a synthetic table from ``train`` according to ``spec`` (deterministic per seed)."""
    n = train.row_count
    if n == 0:
        raise EmptyInput("cannot synthesize from an empty table")
    n_out = spec.rows or n
    rng = np.random.default_rng(int(spec.seed))
    num_cols = train.schema.numeric()
    cat_cols = train.schema.categorical()
    out: dict[str, np.ndarray] = {}

    if spec.method in ("copy", "noisy-copy"):
        idx = _resample_rows(rng, n, n_out)
        for c in train.names:
            out[c] = train.column(c)[idx]
        if spec.method == "noisy-copy" and spec.noise_scale > 0:
            for c in num_cols:
                col = train.column(c)
                half = spec.noise_scale * float(col.max() - col.min())
                out[c] = out[c] + rng.uniform(-half, half, size=n_out)
            for c in cat_cols:
                labels = np.array(sorted(set(train.column(c).tolist())), dtype=object)
                vals = out[c].copy()
                if labels.size > 1:
                    flip = np.flatnonzero(rng.random(n_out) < spec.noise_scale)
                    lut = {label: i for i, label in enumerate(labels)}
                    for i in flip:
                        # uniform over the other labels: skip the current one
                        k = rng.integers(0, labels.size - 1)
                        cur = lut[vals[i]]
                        vals[i] = labels[k + (k >= cur)]
                out[c] = vals
    elif spec.method == "independent":
        for c in train.names:
            out[c] = _independent_column(rng, train.column(c), n_out)
    else:
        if len(num_cols) < 2:
            raise InvalidSpec("copula synthesizer needs at least two numeric columns")
        scores = np.column_stack([_normal_scores(train.column(c)) for c in num_cols])
        with np.errstate(invalid="ignore", divide="ignore"):
            raw = np.corrcoef(scores, rowvar=False)
        # constant columns have undefined correlation; treat them as independent
        raw = np.nan_to_num(raw, nan=0.0)
        np.fill_diagonal(raw, 1.0)
        corr = _nearest_correlation(raw)
        z = rng.standard_normal((n_out, len(num_cols))) @ np.linalg.cholesky(corr).T
        u = ndtr(z)
        for j, c in enumerate(num_cols):
            out[c] = np.quantile(train.column(c), u[:, j], method="linear")
        for c in cat_cols:
            out[c] = _independent_column(rng, train.column(c), n_out)

    return Dataset(train.schema, out)
