"""Market-basket analysis: baskets, Apriori frequent itemsets, and confidence / lift / conviction rules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from ..data import Dataset
from ..errors import EmptyInput, InvalidSupport, MissingSubsetSupport


@dataclass(frozen=True)
class Basket:
    key: tuple[str, ...]
    items: frozenset[str]


def build_baskets(
    transactions: Dataset,
    household_col: str = "household_id",
    week_col: str = "week",
    product_col: str = "product_id",
) -> list[Basket]:
    """One basket per (household, week), holding the distinct products bought; first-appearance order."""
    cols = [transactions.column(c).tolist() for c in (household_col, week_col, product_col)]
    groups: dict[tuple, set] = {}
    for h, w, p in zip(*cols):
        groups.setdefault((str(h), str(w)), set()).add(str(p))
    return [Basket(k, frozenset(v)) for k, v in groups.items()]


@dataclass(frozen=True)
class FrequentItemsets:
    """Itemset -> number of baskets containing it, for every itemset meeting ``min_support``."""

    counts: Mapping[tuple[str, ...], int]
    n_baskets: int
    min_support: float

    def support(self, items: Iterable[str]) -> float:
        return self.counts[tuple(sorted(items))] / self.n_baskets

    def supports(self) -> dict[tuple[str, ...], float]:
        return {k: c / self.n_baskets for k, c in self.counts.items()}

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, items) -> bool:
        return tuple(sorted(items)) in self.counts


def apriori_frequent_itemsets(baskets: Sequence[Basket] | Sequence[Iterable[str]], min_support: float, max_len: int | None = None) -> FrequentItemsets:
    """Level-wise Apriori.

    Candidates of size k+1 join two frequent k-itemsets sharing their first k-1 items and
    are dropped unless every k-subset is frequent. Support counting intersects per-item
    basket bitsets (Python ints), so a candidate costs one AND and one popcount.
    """
    if not 0 < min_support <= 1:
        raise InvalidSupport(f"min_support must be in (0, 1], got {min_support}")
    sets = [b.items if isinstance(b, Basket) else frozenset(b) for b in baskets]
    n = len(sets)
    if n == 0:
        raise EmptyInput("no baskets")
    min_count = math.ceil(min_support * n - 1e-9)

    tids: dict[str, int] = {}
    for i, items in enumerate(sets):
        bit = 1 << i
        for item in items:
            tids[item] = tids.get(item, 0) | bit

    level = {}
    for item in sorted(tids):
        c = tids[item].bit_count()
        if c >= min_count:
            level[(item,)] = tids[item]
    counts: dict[tuple[str, ...], int] = {k: v.bit_count() for k, v in level.items()}

    k = 1
    while level and (max_len is None or k < max_len):
        keys = sorted(level)
        nxt: dict[tuple[str, ...], int] = {}
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                if a[:-1] != b[:-1]:
                    break
                cand = a + (b[-1],)
                if any(cand[:j] + cand[j + 1:] not in level for j in range(len(cand) - 2)):
                    continue
                tid = level[a] & tids[b[-1]]
                c = tid.bit_count()
                if c >= min_count:
                    nxt[cand] = tid
                    counts[cand] = c
        level = nxt
        k += 1
    return FrequentItemsets(dict(sorted(counts.items(), key=lambda kv: (len(kv[0]), kv[0]))), n, min_support)


@dataclass(frozen=True)
class RuleMetrics:
    antecedent: tuple[str, ...]
    consequent: tuple[str, ...]
    count_a: int
    count_b: int
    count_ab: int
    n_baskets: int
    is_top: bool = False

    @property
    def support_a(self) -> float:
        return self.count_a / self.n_baskets

    @property
    def support_b(self) -> float:
        return self.count_b / self.n_baskets

    @property
    def support_ab(self) -> float:
        return self.count_ab / self.n_baskets

    @property
    def confidence(self) -> float:
        return self.count_ab / self.count_a

    @property
    def lift(self) -> float:
        # P(A&B) / (P(A) P(B)) from integer counts: a single rounding
        return (self.count_ab * self.n_baskets) / (self.count_a * self.count_b)

    @property
    def conviction(self) -> float:
        if self.count_ab == self.count_a:
            # B in every basket: A and B are independent, so conviction is 1 rather than 0/0
            return math.inf if self.count_b < self.n_baskets else 1.0
        return (self.count_a * (self.n_baskets - self.count_b)) / (self.n_baskets * (self.count_a - self.count_ab))

    def to_dict(self) -> dict:
        conv = self.conviction
        return {
            "antecedent": list(self.antecedent),
            "consequent": list(self.consequent),
            "support_a": self.support_a,
            "support_b": self.support_b,
            "support_ab": self.support_ab,
            "confidence": self.confidence,
            "lift": self.lift,
            "conviction": "inf" if math.isinf(conv) else conv,
            "counts": {"a": self.count_a, "b": self.count_b, "ab": self.count_ab, "baskets": self.n_baskets},
        }


def _rank_key(rule: RuleMetrics):
    return (-rule.lift, -rule.confidence, rule.antecedent, rule.consequent)


def association_rules(itemsets: FrequentItemsets, min_confidence: float = 0.1, pairwise_only: bool = True) -> list[RuleMetrics]:
    """Rules A -> B from frequent itemsets, best lift first; the first rule is flagged ``is_top``.

    With ``pairwise_only`` (default) only single-item antecedent and consequent are formed.
    """
    counts = itemsets.counts
    n = itemsets.n_baskets
    rules = []
    for items, c_ab in counts.items():
        if len(items) < 2 or (pairwise_only and len(items) != 2):
            continue
        for r in range(1, len(items)):
            for ante in combinations(items, r):
                cons = tuple(i for i in items if i not in ante)
                try:
                    c_a, c_b = counts[ante], counts[cons]
                except KeyError as exc:
                    raise MissingSubsetSupport(f"support of {exc.args[0]} is missing") from None
                if c_ab / c_a >= min_confidence:
                    rules.append(RuleMetrics(ante, cons, c_a, c_b, c_ab, n))
    rules.sort(key=_rank_key)
    if rules:
        first = rules[0]
        rules[0] = RuleMetrics(first.antecedent, first.consequent, first.count_a, first.count_b, first.count_ab, n, True)
    return rules


@dataclass(frozen=True)
class BasketColumns:
    household: str = "household_id"
    week: str = "week"
    product: str = "product_id"

    @classmethod
    def from_dict(cls, doc: dict) -> "BasketColumns":
        return cls(doc.get("household", "household_id"), doc.get("week", "week"), doc.get("product", "product_id"))

    def to_dict(self) -> dict:
        return {"household": self.household, "week": self.week, "product": self.product}


def association_report(
    datasets: Mapping[str, Dataset],
    columns: BasketColumns = BasketColumns(),
    min_support: float = 0.01,
    min_confidence: float = 0.1,
    pairwise_only: bool = True,
) -> dict[str, dict]:
    """Top rule (by lift) per dataset; ``{"found": False}`` where no rule clears the thresholds."""
    out = {}
    for name, ds in datasets.items():
        baskets = build_baskets(ds, columns.household, columns.week, columns.product)
        itemsets = apriori_frequent_itemsets(baskets, min_support, max_len=2 if pairwise_only else None)
        rules = association_rules(itemsets, min_confidence, pairwise_only)
        entry = {"baskets": len(baskets), "rules": len(rules), "found": bool(rules)}
        if rules:
            entry["top_rule"] = rules[0].to_dict()
        out[name] = entry
    return out
