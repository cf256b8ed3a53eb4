#!/usr/bin/env python3
"""Corpus experiment: generate random instances, plan them with every
algorithm, execute each order, and report equivalence plus cost ratios.

For each instance the script checks that both rewritten forms return
the reference result, then compares the analytical cost (sum of
intermediate cardinalities) of each heuristic against the exhaustive
optimum. Output is one TSV row per (instance, algorithm).

    python3 scripts/run_corpus.py --count 30 --tables 5 --out corpus.tsv
"""

from __future__ import annotations

import argparse
import statistics
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from joinplan.costlab import compare_orders
from joinplan.datagen import generate_instance
from joinplan.errors import JoinPlanError
from joinplan.sqlfront import build_join_graph, parse_query

COLUMNS = ("seed", "algorithm", "cost", "optimal_ratio",
           "equivalent_subquery", "equivalent_leftdeep", "sequence")


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=25, help="instances to generate")
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--tables", type=int, default=None,
                   help="tables per instance (default: random 3-6)")
    p.add_argument("--max-rows", type=int, default=40)
    p.add_argument("--bound", type=int, default=10,
                   help="skip exhaustive search above this many tables")
    p.add_argument("--out", type=Path, default=None, help="write TSV here")
    return p.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    lines = ["\t".join(COLUMNS)]
    ratios: dict[str, list[float]] = {}
    failures = 0

    for i in range(args.count):
        seed = args.base_seed + i
        inst = generate_instance(seed, n_tables=args.tables,
                                 max_rows=args.max_rows)
        try:
            q = parse_query(inst.sql, inst.catalog)
            g = build_join_graph(q, inst.catalog)
            rows = compare_orders(inst.tables, q, g, bound=args.bound)
        except JoinPlanError as exc:
            print(f"seed {seed}: {exc}", file=sys.stderr)
            failures += 1
            continue
        by_algo = {r["algorithm"]: r for r in rows}
        optimal = by_algo.get("optimal", {})
        base = optimal.get("analytical_cost")
        for r in rows:
            if r.get("skipped") or r.get("error"):
                continue
            cost = r["analytical_cost"]
            ratio = cost / base if base else float("nan")
            if r["algorithm"] != "optimal":
                ratios.setdefault(r["algorithm"], []).append(ratio)
            ok_sub = r["equivalent_subquery"]
            ok_flat = r["equivalent_leftdeep"]
            if ok_sub is False or ok_flat is False:
                failures += 1
            lines.append("\t".join(str(v) for v in (
                seed, r["algorithm"], cost, f"{ratio:.3f}",
                ok_sub, ok_flat, " ".join(r["sequence"]),
            )))

    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")

    for algo, values in sorted(ratios.items()):
        print(f"{algo}: median cost ratio vs optimal "
              f"{statistics.median(values):.3f} "
              f"(worst {max(values):.3f}, n={len(values)})", file=sys.stderr)
    if failures:
        print(f"{failures} failure(s)", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
