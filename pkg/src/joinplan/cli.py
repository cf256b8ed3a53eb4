"""Command-line entry point.

Subcommands:

* ``plan``: print the join order for a query against a catalog.
* ``rewrite``: print the rewritten SQL (plus session prologue).
* ``compare``: run all planners over a small dataset and tabulate
  analytical costs and equivalence checks.
* ``bench``: time original vs rewritten forms on a live database.
* ``extract-catalog``: build a catalog file from a live database.

Exit status: 0 on success, 2 for input problems (bad files, malformed
SQL, unknown tables), 3 for environment problems (connections).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import BenchConfig, extract_catalog, resolve_url, run_bench
from .catalog import load_catalog
from .costlab import (
    OPTIMAL_BOUND_DEFAULT,
    ROW_LIMIT_DEFAULT,
    compare_orders,
    load_dataset,
)
from .errors import BenchError, JoinPlanError
from .planner import size_order, split_order
from .rewriter import (
    GENERIC,
    LEFTDEEP,
    POSTGRES_COMPATIBLE,
    SUBQUERY,
    rewrite_leftdeep,
    rewrite_subquery,
)
from .sqlfront import build_join_graph, parse_query

ALGOS = ("split", "size-asc", "size-desc")


def _read_sql(path: str) -> str:
    return Path(path).read_text().strip().rstrip(";").strip()


def _load_inputs(args):
    cat = load_catalog(args.schema)
    q = parse_query(_read_sql(args.query), cat)
    g = build_join_graph(q, cat, transitive=args.transitive)
    return cat, q, g


def _make_order(g, algo: str, avoid_cartesian: bool):
    if algo == "split":
        return split_order(g)
    direction = "ascending" if algo == "size-asc" else "descending"
    return size_order(g, direction, avoid_cartesian=avoid_cartesian)


def _cmd_plan(args) -> int:
    _cat, _q, g = _load_inputs(args)
    order = _make_order(g, args.algo, args.avoid_cartesian)
    if args.json:
        print(order.to_json())
    else:
        print(order.report())
    return 0


def _cmd_rewrite(args) -> int:
    _cat, q, g = _load_inputs(args)
    order = _make_order(g, args.algo, args.avoid_cartesian)
    fn = rewrite_subquery if args.mode == SUBQUERY else rewrite_leftdeep
    rewritten = fn(q, order, target=args.target)
    if args.json:
        print(json.dumps({
            "mode": rewritten.mode,
            "prologue": list(rewritten.prologue),
            "sql": rewritten.sql,
            "warnings": list(rewritten.warnings),
        }, indent=2))
        return 0
    for stmt in rewritten.prologue:
        print(f"{stmt};")
    print(f"{rewritten.sql};")
    for warning in rewritten.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def _cmd_compare(args) -> int:
    _cat, q, g = _load_inputs(args)
    tables = load_dataset(args.data)
    rows = compare_orders(tables, q, g, bound=args.bound, row_limit=args.row_limit)
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    header = f"{'algorithm':<10} {'cost':>10} {'subquery':>9} {'leftdeep':>9}  sequence"
    print(header)
    print("-" * len(header))
    for row in rows:
        if row["skipped"]:
            print(f"{row['algorithm']:<10} {'skipped':>10} {'':>9} {'':>9}  ({row['error']})")
            continue
        cost = "-" if row["analytical_cost"] is None else str(row["analytical_cost"])
        sub = _tick(row["equivalent_subquery"])
        left = _tick(row["equivalent_leftdeep"])
        seq = " ".join(row["sequence"] or [])
        print(f"{row['algorithm']:<10} {cost:>10} {sub:>9} {left:>9}  {seq}")
        if row["error"]:
            print(f"{'':<10} error: {row['error']}")
        for warning in row["warnings"]:
            print(f"{'':<10} warning: {warning}")
    return 0


def _tick(value) -> str:
    if value is None:
        return "-"
    return "yes" if value else "NO"


def _cmd_bench(args) -> int:
    cat = load_catalog(args.schema)
    queries = {}
    for path in sorted(Path(args.queries).glob("*.sql")):
        queries[path.stem] = path.read_text().strip().rstrip(";").strip()
    if not queries:
        raise JoinPlanError(f"no .sql files under {args.queries}")
    config = BenchConfig(
        url=resolve_url(args.url),
        runs=args.runs,
        modes=tuple(args.modes.split(",")),
        timeout=args.timeout,
    )
    report = run_bench(config, cat, queries)
    tsv = report.to_tsv()
    if args.out:
        Path(args.out).write_text(tsv)
        print(f"wrote {args.out}")
    else:
        print(tsv, end="")
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def _cmd_extract_catalog(args) -> int:
    cat, warnings = extract_catalog(resolve_url(args.url))
    text = cat.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def _add_common(sub) -> None:
    sub.add_argument("--schema", required=True, help="catalog JSON file")
    sub.add_argument("--query", required=True, help="SQL file")
    sub.add_argument("--algo", choices=ALGOS, default="split")
    sub.add_argument("--avoid-cartesian", action="store_true",
                     help="size orders only: keep each step joined to the prefix")
    sub.add_argument("--transitive", action="store_true",
                     help="close join equality classes before planning")
    sub.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="joinplan",
        description="Statistics-free join ordering: plan, rewrite, check, and time queries.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    plan = commands.add_parser("plan", help="print the join order for a query")
    _add_common(plan)
    plan.set_defaults(func=_cmd_plan)

    rewrite = commands.add_parser("rewrite", help="print rewritten SQL and prologue")
    _add_common(rewrite)
    rewrite.add_argument("--mode", choices=(SUBQUERY, LEFTDEEP), default=SUBQUERY)
    rewrite.add_argument("--target", choices=(POSTGRES_COMPATIBLE, GENERIC),
                         default=POSTGRES_COMPATIBLE)
    rewrite.set_defaults(func=_cmd_rewrite)

    compare = commands.add_parser(
        "compare", help="cost and equivalence table over a small dataset"
    )
    _add_common(compare)
    compare.add_argument("--data", required=True, help="directory of <table>.csv files")
    compare.add_argument("--bound", type=int, default=OPTIMAL_BOUND_DEFAULT,
                         help="max tables for the exhaustive-optimal search")
    compare.add_argument("--row-limit", type=int, default=ROW_LIMIT_DEFAULT)
    compare.set_defaults(func=_cmd_compare)

    bench = commands.add_parser("bench", help="time queries on a live database")
    bench.add_argument("--schema", required=True, help="catalog JSON file")
    bench.add_argument("--queries", required=True, help="directory of .sql files")
    bench.add_argument("--url", help="database URL (defaults to $DB_URL)")
    bench.add_argument("--runs", type=int, default=5)
    bench.add_argument("--modes", default="original,subquery",
                       help="comma list from: original,subquery,leftdeep,size-desc")
    bench.add_argument("--timeout", type=float, default=None, help="per-query seconds")
    bench.add_argument("--out", help="write the TSV report here instead of stdout")
    bench.set_defaults(func=_cmd_bench)

    extract = commands.add_parser(
        "extract-catalog", help="build a catalog file from a live database"
    )
    extract.add_argument("--url", help="database URL (defaults to $DB_URL)")
    extract.add_argument("--out", help="write the catalog here instead of stdout")
    extract.set_defaults(func=_cmd_extract_catalog)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (JoinPlanError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
