#!/usr/bin/env python3
"""Measure end-to-end planning overhead: parse, graph construction,
ordering, and both rewrites, reported per stage and in total.

Runs the bundled 7-table query plus synthetic key/foreign-key chains
of increasing length, and prints median / p95 / max wall time over
--reps repetitions of each.

    python3 scripts/measure_overhead.py --reps 100 --chains 10,20,40
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from importlib import resources
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from joinplan.catalog import Catalog, ForeignKeyDef, TableDef, load_catalog
from joinplan.planner import split_order
from joinplan.rewriter import rewrite_leftdeep, rewrite_subquery
from joinplan.sqlfront import build_join_graph, parse_query

STAGES = ("parse", "graph", "order", "subquery", "leftdeep", "total")


def chain_problem(n_tables: int):
    """Linear chain: t1.prev_id -> t0.id, t2.prev_id -> t1.id, ..."""
    defs = [TableDef("t0", 50, ("id", "v"), frozenset({("id",)}))]
    fks = []
    for i in range(1, n_tables):
        defs.append(TableDef(f"t{i}", 50 + i * 137, ("id", "prev_id", "v"),
                             frozenset({("id",)})))
        fks.append(ForeignKeyDef(f"t{i}", ("prev_id",), f"t{i-1}", ("id",)))
    sql = ("SELECT MIN(t0.v) AS low FROM "
           + ", ".join(f"t{i}" for i in range(n_tables))
           + " WHERE "
           + " AND ".join(f"t{i}.prev_id = t{i-1}.id"
                          for i in range(1, n_tables)))
    return Catalog.build(defs, fks), sql


def bundled_problem():
    data = resources.files("joinplan") / "data"
    cat = load_catalog(str(data / "imdb_job_catalog.json"))
    sql = (data / "queries" / "18a.sql").read_text(encoding="utf-8")
    return cat, sql


def time_pipeline(cat, sql, reps: int) -> dict[str, list[float]]:
    samples: dict[str, list[float]] = {s: [] for s in STAGES}
    for _ in range(reps):
        t0 = time.perf_counter()
        q = parse_query(sql, cat)
        t1 = time.perf_counter()
        g = build_join_graph(q, cat)
        t2 = time.perf_counter()
        order = split_order(g)
        t3 = time.perf_counter()
        rewrite_subquery(q, order)
        t4 = time.perf_counter()
        rewrite_leftdeep(q, order)
        t5 = time.perf_counter()
        for stage, span in zip(STAGES, (t1 - t0, t2 - t1, t3 - t2,
                                        t4 - t3, t5 - t4, t5 - t0)):
            samples[stage].append(span)
    return samples


def report(label: str, samples: dict[str, list[float]]) -> None:
    print(f"\n{label}")
    print(f"  {'stage':<10} {'median':>9} {'p95':>9} {'max':>9}")
    for stage in STAGES:
        values = sorted(samples[stage])
        median = statistics.median(values)
        p95 = values[min(len(values) - 1, int(len(values) * 0.95))]
        print(f"  {stage:<10} {median * 1000:>7.3f}ms {p95 * 1000:>7.3f}ms "
              f"{values[-1] * 1000:>7.3f}ms")


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--chains", default="10,20,30",
                   help="comma-separated chain lengths (tables per query)")
    args = p.parse_args(argv)

    cat, sql = bundled_problem()
    report(f"bundled 7-table query ({args.reps} reps)",
           time_pipeline(cat, sql, args.reps))
    for n in (int(part) for part in args.chains.split(",") if part):
        cat, sql = chain_problem(n)
        report(f"chain of {n} tables / {n - 1} join predicates "
               f"({args.reps} reps)", time_pipeline(cat, sql, args.reps))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
