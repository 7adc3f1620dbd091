"""End-to-end evaluation: run every stage, assemble one report, serialise and render it."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from . import __version__
from .data import Dataset, TableSchema, fingerprint
from .errors import ConfigError, SynthAuditError
from .fidelity import DEFAULT_BINS, fidelity_report
from .preprocess import DerivedFeatureSpec
from .privacy import privacy_report
from .utility.associations import BasketColumns, association_report
from .utility.classification import ClassificationTask, utility_report
from .utility.trees import TreeParams

SPEC_VERSION = "1"
STAGES = ("fidelity", "utility", "associations", "privacy")


@dataclass(frozen=True)
class EvalConfig:
    """Everything besides the four tables that determines a report."""

    seed: int = 0
    task: ClassificationTask | None = None
    tree_params: TreeParams = TreeParams()
    baskets: BasketColumns | None = None
    min_support: float = 0.01
    min_confidence: float = 0.1
    derived: tuple[DerivedFeatureSpec, ...] = ()
    wd_scaling: str = "raw"
    histogram_bins: int = DEFAULT_BINS
    synthetic_name: str = "synthetic"

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "EvalConfig":
        known = {
            "seed", "task", "tree_params", "baskets", "min_support", "min_confidence",
            "derived", "wd_scaling", "histogram_bins", "synthetic_name",
        }
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            return cls(
                seed=int(doc.get("seed", 0)),
                task=ClassificationTask.from_dict(doc["task"]) if doc.get("task") else None,
                tree_params=TreeParams(**doc.get("tree_params", {})),
                baskets=BasketColumns.from_dict(doc["baskets"]) if doc.get("baskets") else None,
                min_support=float(doc.get("min_support", 0.01)),
                min_confidence=float(doc.get("min_confidence", 0.1)),
                derived=tuple(DerivedFeatureSpec.from_dict(d) for d in doc.get("derived", [])),
                wd_scaling=doc.get("wd_scaling", "raw"),
                histogram_bins=int(doc.get("histogram_bins", DEFAULT_BINS)),
                synthetic_name=str(doc.get("synthetic_name", "synthetic")),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed evaluation config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "task": self.task.to_dict() if self.task else None,
            "tree_params": self.tree_params.to_dict(),
            "baskets": self.baskets.to_dict() if self.baskets else None,
            "min_support": self.min_support,
            "min_confidence": self.min_confidence,
            "derived": [d.to_dict() for d in self.derived],
            "wd_scaling": self.wd_scaling,
            "histogram_bins": self.histogram_bins,
            "synthetic_name": self.synthetic_name,
        }


@dataclass
class EvaluationReport:
    """JSON-shaped report. ``stages[name]`` holds ``status`` (ok / skipped / failed) and ``result`` or ``error``."""

    metadata: dict
    stages: dict
    warnings: list[str] = field(default_factory=list)
    spec_version: str = SPEC_VERSION

    @property
    def partial(self) -> bool:
        return any(s["status"] == "failed" for s in self.stages.values())

    def to_dict(self) -> dict:
        return {
            "spec_version": self.spec_version,
            "metadata": self.metadata,
            "stages": self.stages,
            "warnings": self.warnings,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "EvaluationReport":
        return cls(
            metadata=doc["metadata"],
            stages=doc["stages"],
            warnings=list(doc.get("warnings", [])),
            spec_version=doc.get("spec_version", SPEC_VERSION),
        )


def render_json(report: EvaluationReport) -> str:
    # allow_nan=False: the only non-finite value allowed is the string "inf"
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def parse_json(text: str) -> EvaluationReport:
    return EvaluationReport.from_dict(json.loads(text))


def _run(stages: dict, warnings: list[str], name: str, fn, skip_reason: str | None = None) -> None:
    if skip_reason:
        stages[name] = {"status": "skipped", "reason": skip_reason}
        return
    try:
        stages[name] = {"status": "ok", "result": fn()}
    except SynthAuditError as exc:
        stages[name] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
        warnings.append(f"{name} stage failed: {exc}")


def evaluate_all(
    train: Dataset,
    holdout: Dataset | None,
    eval: Dataset | None,
    synthetic: Dataset,
    config: EvalConfig = EvalConfig(),
    schema: TableSchema | None = None,
) -> EvaluationReport:
    """Run fidelity, utility, association and privacy stages and join the results.

    Missing inputs skip the stages that need them; a stage that raises is marked
    ``failed`` and the others still run.
    """
    sname = config.synthetic_name
    stages: dict = {}
    warnings: list[str] = []
    datasets = {"train": train, "holdout": holdout, "eval": eval, sname: synthetic}

    def fidelity():
        out = {}
        for name, ds in (("holdout", holdout), (sname, synthetic)):
            if ds is None:
                continue
            rep = fidelity_report(train, ds, config.derived, wd_scaling=config.wd_scaling)
            for col in rep.degenerate:
                warnings.append(f"fidelity[{name}]: column {col!r} is degenerate (zero variance or single label)")
            out[name] = rep.to_dict()
        return out

    def utility():
        rep = utility_report(train, holdout, synthetic, eval, config.task, config.tree_params, config.seed)
        for src, msg in rep.errors.items():
            warnings.append(f"utility[{src}]: {msg}")
        warnings.extend(f"utility: {w}" for w in rep.warnings)
        doc = rep.to_dict()
        # rename the synthetic row to the configured source name
        if "synthetic" in doc["rows"] and sname != "synthetic":
            doc["rows"][sname] = doc["rows"].pop("synthetic")
        return doc

    def associations():
        named = {k: v for k, v in (("train", train), ("holdout", holdout), (sname, synthetic)) if v is not None}
        return association_report(named, config.baskets, config.min_support, config.min_confidence)

    def privacy():
        rep = privacy_report(synthetic, train, holdout)
        warnings.extend(f"privacy: {w}" for w in rep.warnings)
        return rep.to_dict()

    _run(stages, warnings, "fidelity", fidelity)
    _run(
        stages,
        warnings,
        "utility",
        utility,
        None if (eval is not None and config.task is not None) else "needs an eval table and a task",
    )
    _run(stages, warnings, "associations", associations, None if config.baskets is not None else "no basket columns configured")
    _run(stages, warnings, "privacy", privacy, None if holdout is not None else "needs a holdout table")

    metadata = {
        "tool": "synthaudit",
        "tool_version": __version__,
        "datasets": {k: fingerprint(v) for k, v in datasets.items() if v is not None},
        "seeds": {"utility": config.seed},
        "config": config.to_dict(),
        "schema": (schema or train.schema).to_dict(),
    }
    return EvaluationReport(metadata=metadata, stages=stages, warnings=warnings)


# ---------------------------------------------------------------- markdown

def fmt(value) -> str:
    """Number formatting shared by the markdown renderer and its tests."""
    if value is None:
        return "-"
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if math.isinf(value):
        return "inf"
    return f"{value:.4f}"


def _table(header: list[str], rows: list[list[str]]) -> list[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    out += ["| " + " | ".join(r) + " |" for r in rows]
    return out


def _highlight(rows: list[list], cols: range, better: str | list[str]) -> list[list[str]]:
    """Format cells, bolding the best numeric value per column (``better`` is ``min`` or ``max``)."""
    formatted = [[fmt(v) if not isinstance(v, str) else v for v in r] for r in rows]
    for j in cols:
        rule = better if isinstance(better, str) else better[j - cols.start]
        vals = [(i, r[j]) for i, r in enumerate(rows) if isinstance(r[j], (int, float)) and not isinstance(r[j], bool) and r[j] is not None]
        if len(vals) < 2:
            continue
        key = (lambda t: t[1]) if rule == "min" else (lambda t: -t[1])
        best = key(min(vals, key=key))
        for i, v in vals:
            if key((i, v)) == best:
                formatted[i][j] = f"**{formatted[i][j]}**"
    return formatted


def _highlight_rows(rows: list[list], better: str) -> list[list[str]]:
    """Like ``_highlight`` but compares across each row (first cell is the row label)."""
    width = len(rows[0])
    columns = [[r[j] for r in rows] for j in range(1, width)]
    done = _highlight([["x"] + c for c in columns], range(1, len(rows) + 1), better) if columns else []
    return [[r[0]] + [done[j][i + 1] for j in range(width - 1)] for i, r in enumerate(rows)]


def _label(name: str, schema: TableSchema | None, use_aliases: bool) -> str:
    if use_aliases and schema is not None and name in schema and schema[name].alias:
        return f"{schema[name].alias} ({name})"
    return name


def _stage_note(stage: dict) -> list[str]:
    if stage["status"] == "skipped":
        return [f"_Skipped: {stage['reason']}._", ""]
    return [f"_Failed: {stage['error']}_", ""]


def _pretty(name: str) -> str:
    return name[:1].upper() + name[1:]


def render_markdown(report: EvaluationReport, use_aliases: bool = False) -> str:
    """Human-readable tables: fidelity, classification utility, associations, privacy, then warnings."""
    schema = None
    if report.metadata.get("schema"):
        schema = TableSchema.from_dict(report.metadata["schema"])
    lines = ["# Synthetic data evaluation", ""]
    ds_rows = [[name, fmt(fp["rows"]), fp["fnv1a64"]] for name, fp in report.metadata.get("datasets", {}).items()]
    if ds_rows:
        lines += _table(["Dataset", "Rows", "FNV-1a"], ds_rows) + [""]

    st = report.stages.get("fidelity", {"status": "skipped", "reason": "not run"})
    lines += ["## Fidelity", ""]
    if st["status"] != "ok":
        lines += _stage_note(st)
    else:
        res = st["result"]
        rows = []
        for name, r in res.items():
            j = r["joint"]
            m = r["marginal"]
            rows.append([_pretty(name), m["num_mean"], m["cat_mean"], j["num_num"], j["cat_cat"], j["num_cat"]])
        lines += _table(["Source", "Num (WD)", "Cat (JS)", "Num-Num", "Cat-Cat", "Num-Cat"], _highlight(rows, range(1, 6), "min"))
        lines.append("")
        sources = list(res)
        for key, title in (("numeric_wd", "Wasserstein distance per numeric column"),
                           ("categorical_js", "Jensen-Shannon distance per categorical column"),
                           ("derived_wd", "Wasserstein distance per derived feature")):
            cols = list(next(iter(res.values()))["marginal"][key])
            if not cols:
                continue
            detail = [[_label(c, schema, use_aliases)] + [res[s]["marginal"][key][c] for s in sources] for c in cols]
            lines += [f"{title}:", ""]
            lines += _table(["Column"] + [_pretty(s) for s in sources], _highlight_rows(detail, "min"))
            lines.append("")
        means = [[_pretty(s), res[s]["marginal"]["derived_mean"]] for s in sources if res[s]["marginal"]["derived_mean"] is not None]
        if means:
            lines += _table(["Source", "Derived mean WD"], _highlight(means, range(1, 2), "min")) + [""]
        lines += [f"Wasserstein scaling: {next(iter(res.values()))['marginal']['wd_scaling']}.", ""]

    st = report.stages.get("utility", {"status": "skipped", "reason": "not run"})
    lines += ["## Classification utility", ""]
    if st["status"] != "ok":
        lines += _stage_note(st)
    else:
        res = st["result"]
        rows, confusion = [], []
        for name, m in res["rows"].items():
            if m is None:
                rows.append([_pretty(name), "failed", "failed", "failed", "failed", "failed"])
                continue
            rows.append([_pretty(name), m["accuracy"], m["f1"], m["roc_auc"], m["precision"], m["recall"]])
            c = m["confusion"]
            confusion.append([_pretty(name), fmt(c["tp"]), fmt(c["fp"]), fmt(c["fn"]), fmt(c["tn"])])
        lines += _table(["Trained on", "Accuracy", "F1", "ROC", "Precision", "Recall"], _highlight(rows, range(1, 6), "max"))
        lines.append("")
        if confusion:
            lines += _table(["Trained on", "TP", "FP", "FN", "TN"], confusion) + [""]
        lines += [
            f"Evaluated on {fmt(res['eval_rows'])} rows; positive rate {fmt(res['eval_positive_rate'])}, "
            f"majority-class rate {fmt(res['eval_majority_rate'])}.",
            "",
        ]

    st = report.stages.get("associations", {"status": "skipped", "reason": "not run"})
    lines += ["## Product associations", ""]
    if st["status"] != "ok":
        lines += _stage_note(st)
    else:
        res = st["result"]
        names = list(res)
        header = ["Metric"] + [_pretty(n) for n in names]

        def cell(n: str, key: str):
            entry = res[n]
            return entry["top_rule"][key] if entry["found"] else "none found"

        def rule_text(n: str) -> str:
            if not res[n]["found"]:
                return "none found"
            r = res[n]["top_rule"]
            return f"{', '.join(r['antecedent'])} -> {', '.join(r['consequent'])}"

        rows = [["Rule"] + [rule_text(n) for n in names]]
        for key, label in (("confidence", "Confidence"), ("lift", "Lift"), ("conviction", "Conviction"),
                           ("support_a", "P(A)"), ("support_b", "P(B)"), ("support_ab", "P(A and B)")):
            rows.append([label] + [fmt(cell(n, key)) for n in names])
        for key, label in (("a", "Baskets with A"), ("b", "Baskets with B"), ("ab", "Baskets with A and B")):
            rows.append([label] + [fmt(res[n]["top_rule"]["counts"][key]) if res[n]["found"] else "-" for n in names])
        rows.append(["Baskets"] + [fmt(res[n]["baskets"]) for n in names])
        rows.append(["Rules found"] + [fmt(res[n]["rules"]) for n in names])
        lines += _table(header, rows) + [""]

    st = report.stages.get("privacy", {"status": "skipped", "reason": "not run"})
    lines += ["## Privacy", ""]
    if st["status"] != "ok":
        lines += _stage_note(st)
    else:
        r = st["result"]
        rows = [["Holdout", 1.0, "-"], [_pretty(report.metadata["config"]["synthetic_name"]), r["dcr_normalized"], r["ccr"]]]
        formatted = _highlight([row[:2] for row in rows], range(1, 2), "max")
        lines += _table(["Source", "DCR (normalized)", "CCR"], [f + [fmt(row[2])] for f, row in zip(formatted, rows)])
        lines.append("")
        lines += _table(
            ["Statistic", "Value"],
            [
                ["Synthetic->train DCR median", fmt(r["dcr_raw_median"])],
                ["Synthetic->train DCR 5th percentile", fmt(r["dcr_p05"])],
                ["Holdout->train DCR median", fmt(r["dcr_holdout_baseline"])],
                ["Holdout->train DCR 5th percentile", fmt(r["holdout_dcr_p05"])],
            ],
        )
        lines.append("")

    if report.warnings:
        lines += ["## Warnings", ""] + [f"- {w}" for w in report.warnings] + [""]
    return "\n".join(lines)
