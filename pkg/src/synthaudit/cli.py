"""Command-line entry point: ``synthaudit <command> ...``.

Exit codes: 0 success, 1 validation/config error, 2 I/O error, 3 partial report.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .baselines import METHODS, SynthesizerSpec, synthesize
from .data import ColumnKind, ColumnSchema, Dataset, TableSchema, load_csv, load_schema, read_header, write_csv
from .errors import ConfigError, DataError, SynthAuditError
from .fidelity import DEFAULT_BINS, fidelity_report, histogram_diffs
from .preprocess import (
    DEFAULT_MIN_PRODUCT_COUNT,
    DerivedFeatureSpec,
    SplitSpec,
    aggregate_weekly,
    cluster_customers,
    derive_all,
    filter_positive,
    join_left,
    remove_infrequent_products,
    split,
)
from .privacy import privacy_report
from .report import EvalConfig, evaluate_all, render_json, render_markdown
from .utility.associations import BasketColumns, association_report
from .utility.classification import ClassificationTask, utility_report
from .utility.trees import TreeParams

log = logging.getLogger("synthaudit")

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_PARTIAL = 0, 1, 2, 3


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc


def _write_json(doc, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _load_partial(path: str, schema: TableSchema) -> Dataset:
    """Load the schema columns that are present in this file's header."""
    header = set(read_header(path))
    return load_csv(path, TableSchema(tuple(c for c in schema.columns if c.name in header)))


def _derived(path: str | None) -> list[DerivedFeatureSpec]:
    if not path:
        return []
    doc = _read_json(path)
    items = doc["derived"] if isinstance(doc, dict) else doc
    return [DerivedFeatureSpec.from_dict(d) for d in items]


def cmd_preprocess(args) -> int:
    schema = load_schema(args.schema)
    tx = _load_partial(args.transactions, schema)
    log.info("loaded %d transactions", tx.row_count)
    tx = filter_positive(tx, args.qty_col, args.sales_col)
    tx = remove_infrequent_products(tx, args.product_col, args.min_product_count)
    tx = aggregate_weekly(tx, (args.household_col, args.product_col, args.week_col))
    if args.products:
        tx = join_left(tx, _load_partial(args.products, schema), args.product_col)
    demographic_cols: list[str] = []
    if args.demographics:
        demo = _load_partial(args.demographics, schema)
        demographic_cols = [c for c in demo.schema.categorical() if c != args.household_col]
        tx = join_left(tx, demo, args.household_col)
    if demographic_cols:
        tx = cluster_customers(tx, demographic_cols)
    tx = derive_all(
        tx,
        [
            DerivedFeatureSpec.unit_price(args.sales_col, args.qty_col),
            DerivedFeatureSpec.basket_size((args.household_col, args.week_col), args.qty_col),
        ],
    )
    write_csv(tx, args.out)
    if args.schema_out:
        _write_json(tx.schema.to_dict(), args.schema_out)
    log.info("wrote %d rows to %s", tx.row_count, args.out)
    return EXIT_OK


def _ratios(text: str) -> tuple[float, float, float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios must be three comma-separated numbers")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def cmd_split(args) -> int:
    schema = load_schema(args.schema)
    data = load_csv(args.input, schema, args.fill)
    bundle = split(data, SplitSpec(args.ratios, args.seed, args.group_by))
    out = Path(args.out_dir)
    for name, part in bundle.parts().items():
        write_csv(part, out / f"{name}.csv")
    log.info("split %d rows into %s", data.row_count, {k: v.row_count for k, v in bundle.parts().items()})
    return EXIT_OK


def cmd_fidelity(args) -> int:
    schema = load_schema(args.schema)
    train = load_csv(args.train, schema, args.fill)
    other = load_csv(args.other, schema, args.fill)
    derived = _derived(args.derived)
    report = fidelity_report(train, other, derived, wd_scaling=args.wd_scaling)
    _write_json(report.to_dict(), args.out)
    if args.plots_dir:
        bins = args.bins if args.bins == "fd" else int(args.bins)
        for name, hist in histogram_diffs(train, other, derived, bins).items():
            hist.write_csv(Path(args.plots_dir) / f"{name}.csv")
    return EXIT_OK


def _tree_params(args) -> TreeParams:
    return TreeParams(args.n_trees, args.max_depth, args.min_leaf)


def cmd_utility(args) -> int:
    schema = load_schema(args.schema)
    load = lambda p: load_csv(p, schema, args.fill) if p else None  # noqa: E731
    task = ClassificationTask.from_dict(_read_json(args.task))
    report = utility_report(
        load(args.train), load(args.holdout), load(args.synthetic), load(args.eval), task, _tree_params(args), args.seed
    )
    _write_json(report.to_dict(), args.out)
    return EXIT_PARTIAL if report.errors else EXIT_OK


def _named_paths(text: str) -> dict[str, str]:
    out = {}
    for item in text.split(","):
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise argparse.ArgumentTypeError(f"expected name=path, got {item!r}")
        out[name.strip()] = path.strip()
    return out


def cmd_associations(args) -> int:
    cols = BasketColumns(args.household_col, args.week_col, args.product_col)
    if args.schema:
        schema = load_schema(args.schema).select([cols.household, cols.week, cols.product])
    else:
        schema = TableSchema(tuple(ColumnSchema(c, ColumnKind.CATEGORICAL) for c in (cols.household, cols.week, cols.product)))
    datasets = {name: load_csv(path, schema, args.fill) for name, path in args.datasets.items()}
    report = association_report(datasets, cols, args.min_support, args.min_confidence, not args.multi_item_rules)
    _write_json(report, args.out)
    return EXIT_OK


def cmd_privacy(args) -> int:
    schema = load_schema(args.schema)
    train, holdout, synthetic = (load_csv(p, schema, args.fill) for p in (args.train, args.holdout, args.synthetic))
    _write_json(privacy_report(synthetic, train, holdout).to_dict(), args.out)
    return EXIT_OK


def cmd_baseline(args) -> int:
    schema = load_schema(args.schema)
    train = load_csv(args.train, schema, args.fill)
    spec = SynthesizerSpec(args.method, args.seed, args.rows, args.noise_scale)
    write_csv(synthesize(train, spec), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    schema = load_schema(args.schema)
    load = lambda p: load_csv(p, schema, args.fill) if p else None  # noqa: E731
    config = EvalConfig.from_dict(_read_json(args.config)) if args.config else EvalConfig()
    train, holdout, eval_, synthetic = (load(p) for p in (args.train, args.holdout, args.eval, args.synthetic))
    report = evaluate_all(train, holdout, eval_, synthetic, config, schema)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(render_json(report), encoding="utf-8")
    if args.markdown:
        Path(args.markdown).parent.mkdir(parents=True, exist_ok=True)
        Path(args.markdown).write_text(render_markdown(report, use_aliases=args.aliases), encoding="utf-8")
    if args.plots_dir:
        for name, ds in (("holdout", holdout), (config.synthetic_name, synthetic)):
            if ds is None:
                continue
            for col, hist in histogram_diffs(train, ds, config.derived, config.histogram_bins).items():
                hist.write_csv(Path(args.plots_dir) / name / f"{col}.csv")
    return EXIT_PARTIAL if report.partial else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synthaudit", description="Evaluate synthetic tabular data against real train/holdout data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fill: bool = True):
        if fill:
            p.add_argument("--fill", action="store_const", const="fill", default=None,
                           help="impute blank cells (numeric median, categorical __missing__) instead of failing")
        return p

    p = common(sub.add_parser("preprocess", help="filter, aggregate weekly, join and derive features"), fill=False)
    p.add_argument("--transactions", required=True)
    p.add_argument("--demographics")
    p.add_argument("--products")
    p.add_argument("--schema", required=True)
    p.add_argument("--min-product-count", type=int, default=DEFAULT_MIN_PRODUCT_COUNT)
    p.add_argument("--out", required=True)
    p.add_argument("--schema-out", help="write the merged table's schema here")
    p.add_argument("--household-col", default="household_id")
    p.add_argument("--product-col", default="product_id")
    p.add_argument("--week-col", default="week")
    p.add_argument("--qty-col", default="quantity")
    p.add_argument("--sales-col", default="sales_value")
    p.set_defaults(func=cmd_preprocess)

    p = common(sub.add_parser("split", help="train / holdout / eval split"))
    p.add_argument("--input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--ratios", type=_ratios, default=(0.4, 0.4, 0.2))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--group-by")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = common(sub.add_parser("fidelity", help="marginal and joint distribution distances"))
    p.add_argument("--train", required=True)
    p.add_argument("--other", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--derived")
    p.add_argument("--wd-scaling", choices=("raw", "minmax"), default="raw")
    p.add_argument("--out", required=True)
    p.add_argument("--plots-dir")
    p.add_argument("--bins", default=str(DEFAULT_BINS), help="bin count or 'fd'")
    p.set_defaults(func=cmd_fidelity)

    def tree_flags(p):
        p.add_argument("--n-trees", type=int, default=25)
        p.add_argument("--max-depth", type=int, default=8)
        p.add_argument("--min-leaf", type=int, default=5)

    p = common(sub.add_parser("utility", help="train on T/H/S, evaluate on E"))
    for name in ("train", "eval"):
        p.add_argument(f"--{name}", required=True)
    p.add_argument("--holdout")
    p.add_argument("--synthetic")
    p.add_argument("--schema", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    tree_flags(p)
    p.set_defaults(func=cmd_utility)

    p = common(sub.add_parser("associations", help="top association rule per dataset"))
    p.add_argument("--datasets", type=_named_paths, required=True, help="name=path,name=path,...")
    p.add_argument("--schema")
    p.add_argument("--min-support", type=float, default=0.01)
    p.add_argument("--min-confidence", type=float, default=0.1)
    p.add_argument("--household-col", default="household_id")
    p.add_argument("--week-col", default="week")
    p.add_argument("--product-col", default="product_id")
    p.add_argument("--multi-item-rules", action="store_true", help="also form rules with several items per side")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_associations)

    p = common(sub.add_parser("privacy", help="DCR and CCR"))
    for name in ("train", "holdout", "synthetic", "schema", "out"):
        p.add_argument(f"--{name}", required=True)
    p.set_defaults(func=cmd_privacy)

    p = common(sub.add_parser("baseline", help="generate a fixture synthetic table"))
    p.add_argument("--method", choices=[m for m in METHODS if m != "copula"] + ["copula"], required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-scale", type=float, default=0.05)
    p.add_argument("--rows", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = common(sub.add_parser("evaluate", help="full fidelity / utility / privacy report"))
    p.add_argument("--train", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--holdout")
    p.add_argument("--eval")
    p.add_argument("--schema", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--markdown")
    p.add_argument("--plots-dir", help="write per-column histogram differences (CSV) here")
    p.add_argument("--aliases", action="store_true", help="label columns by their schema alias in markdown")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (DataError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SynthAuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
