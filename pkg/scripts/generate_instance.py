#!/usr/bin/env python3
"""Generate a random problem instance and write it to a directory:
catalog.json, query.sql, and data/<table>.csv per table.

The structure (tables, keys, query shape) is driven by --seed; pass
--data-seed to redraw only the row contents for the same problem.

    python3 scripts/generate_instance.py --seed 7 --tables 5 --out inst7/
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from joinplan.datagen import generate_instance


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data-seed", type=int, default=None,
                   help="redraw rows only; structure stays with --seed")
    p.add_argument("--tables", type=int, default=None,
                   help="table count (default: random 3-6)")
    p.add_argument("--min-rows", type=int, default=6)
    p.add_argument("--max-rows", type=int, default=60)
    p.add_argument("--out", type=Path, required=True,
                   help="directory to create/fill")
    args = p.parse_args(argv)

    inst = generate_instance(args.seed, n_tables=args.tables,
                             min_rows=args.min_rows, max_rows=args.max_rows,
                             data_seed=args.data_seed)
    inst.write(args.out)
    total = sum(len(t.rows) for t in inst.tables.values())
    print(f"wrote {args.out}: {len(inst.tables)} tables, {total} rows total")
    print(inst.sql)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
