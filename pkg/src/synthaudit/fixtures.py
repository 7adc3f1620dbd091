"""Seeded synthetic "real" tables with planted structure, for tests, benchmarks and demos."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from .data import Dataset, TableSchema
from .utility.classification import ClassificationTask

MIXED_SCHEMA = TableSchema.of(
    ("x1", "numeric"),
    ("x2", "numeric"),
    ("x3", "numeric"),
    ("x4", "numeric"),
    ("c1", "categorical"),
    ("c2", "categorical"),
    ("c3", "categorical"),
)

# x4 > 5 is the target; x1, x3 and the categoricals carry signal
MIXED_TASK = ClassificationTask(features=("x1", "x3", "c1", "c2"), threshold_column="x4", threshold=5.0)


def mixed_table(n: int = 3000, seed: int = 7) -> Dataset:
    """Four bounded numeric and three categorical columns.

    Planted structure: Pearson(x1, x2) ~ 0.7 through a Gaussian copula with uniform
    marginals; x3 shifts with c1; c2 depends on c1; c3 is a noisy bucketing of x3;
    x4 depends on x1 and c1.
    """
    rng = np.random.default_rng(seed)
    c1 = rng.choice(np.array(["a", "b", "c"], dtype=object), size=n, p=[0.5, 0.3, 0.2])
    # normal-scale correlation giving Pearson 0.7 between the uniform marginals
    rho = 2.0 * np.sin(0.7 * np.pi / 6.0)
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + np.sqrt(1.0 - rho**2) * rng.standard_normal(n)
    shift = np.select([c1 == "a", c1 == "b"], [0.0, 3.0], 6.0)
    x1 = 100.0 * ndtr(z1)
    x2 = 20.0 + 30.0 * ndtr(z2)
    x3 = 10.0 * rng.beta(2.0, 2.0, n) + shift
    x4 = np.round(2.0 + 6.0 * ndtr(z1) + 2.0 * (c1 == "c") + rng.uniform(-1.5, 1.5, n), 1)

    c2 = np.where(
        rng.random(n) < 0.8,
        np.select([c1 == "a", c1 == "b"], ["u", "v"], "w"),
        rng.choice(np.array(["u", "v", "w"]), size=n),
    ).astype(object)
    c3 = np.where(x3 < 6.0, "lo", "hi").astype(object)
    noise = rng.random(n) < 0.1
    c3[noise] = rng.choice(np.array(["lo", "hi", "mid"], dtype=object), size=int(noise.sum()))

    return Dataset(MIXED_SCHEMA, {"x1": x1, "x2": x2, "x3": x3, "x4": x4, "c1": c1, "c2": c2, "c3": c3})


RETAIL_SCHEMA = TableSchema.of(
    ("household_id", "categorical"),
    ("week", "categorical"),
    ("product_id", "categorical"),
    ("age", "categorical"),
    ("household_size", "categorical"),
    ("quantity", "numeric"),
    ("sales_value", "numeric"),
)

RETAIL_TASK = ClassificationTask(
    features=("age", "household_size", "unit_price"),
    threshold_column="basket_size",
    threshold=10.0,
    entity_columns=("household_id", "week"),
)


def retail_transactions(n_households: int = 120, n_weeks: int = 8, n_products: int = 25, seed: int = 11) -> Dataset:
    """Weekly household purchases with two planted product affinities (P00 -> P01, P02 -> P03)."""
    rng = np.random.default_rng(seed)
    ages = np.array(["19-24", "25-34", "35-44", "45-54", "55-64", "65+"], dtype=object)
    sizes = np.array(["1", "2", "3", "4", "5+"], dtype=object)
    prices = np.round(rng.uniform(0.5, 6.0, n_products), 2)
    popularity = rng.dirichlet(np.full(n_products, 0.8))
    rows: dict[str, list] = {c: [] for c in RETAIL_SCHEMA.names}
    for h in range(n_households):
        age = ages[rng.integers(ages.size)]
        size_idx = rng.integers(sizes.size)
        for w in range(n_weeks):
            if rng.random() < 0.25:
                continue
            k = 1 + rng.poisson(1.0 + 0.8 * size_idx)
            basket = set(rng.choice(n_products, size=min(k, n_products), replace=False, p=popularity).tolist())
            for a, b in ((0, 1), (2, 3)):
                if a in basket and rng.random() < 0.7:
                    basket.add(b)
            for p in sorted(basket):
                qty = 1 + rng.poisson(0.5 + 0.4 * size_idx)
                rows["household_id"].append(f"H{h:04d}")
                rows["week"].append(f"W{w + 1:02d}")
                rows["product_id"].append(f"P{p:02d}")
                rows["age"].append(age)
                rows["household_size"].append(sizes[size_idx])
                rows["quantity"].append(float(qty))
                rows["sales_value"].append(round(qty * prices[p] * rng.uniform(0.85, 1.0), 2))
    return Dataset(RETAIL_SCHEMA, rows)
