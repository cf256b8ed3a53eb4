"""Seeded generator of small query-plus-data instances.

Each instance is a fact/dimension schema with concrete rows, a catalog,
and a query in the supported SQL subset. Fact tables join each other on
shared low-cardinality link columns (many-to-many); dimensions hang off
facts through fk -> id joins (one-to-many). Everything derives from one
``random.Random(seed)`` so instances are reproducible; the seed rides
along in the instance and in written reports.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .catalog import Catalog, ForeignKeyDef, TableDef
from .costlab import MiniTable, write_dataset

_CATEGORIES = ("red", "green", "blue", "amber", "teal")
_SYLLABLES = ("ba", "ko", "mi", "ra", "zu", "ta", "len", "ver", "sol", "nix")


@dataclass(frozen=True)
class Instance:
    seed: int
    catalog: Catalog
    tables: dict[str, MiniTable]
    sql: str
    data_seed: int | None = None

    def write(self, directory) -> None:
        """Lay out catalog.json, query.sql, and data/<table>.csv files."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "catalog.json").write_text(self.catalog.to_json() + "\n")
        (directory / "query.sql").write_text(self.sql + "\n")
        write_dataset(directory / "data", self.tables)


def _word(rng: random.Random) -> str:
    return "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(1, 3)))


def _maybe_null(rng: random.Random, value, p: float = 0.12):
    return None if rng.random() < p else value


def generate_instance(seed: int, n_tables: int | None = None,
                      min_rows: int = 6, max_rows: int = 60,
                      data_seed: int | None = None) -> Instance:
    """Build one random instance.

    ``n_tables`` counts query aliases (2..6 when unset); a dimension
    may be aliased twice, in which case the alias count exceeds the
    table count. With a single fact table the query has no many-to-many
    join at all, which exercises the planner's seed path.

    ``data_seed`` reseeds the cell values only: instances built from the
    same ``seed`` but different ``data_seed`` share catalog and query
    text while disagreeing on rows, so one query can be checked against
    several datasets.
    """
    rng = random.Random(seed)
    rng_data = random.Random(f"rows:{seed if data_seed is None else data_seed}")
    n = n_tables if n_tables is not None else rng.randint(2, 6)
    if n < 2:
        raise ValueError("instances need at least 2 aliases")

    n_facts = 1 if n == 2 and rng.random() < 0.5 else rng.randint(1, min(3, n - 1))
    n_dim_aliases = n - n_facts
    link_domain = rng.randint(2, 6)

    # Dimension aliases first, so facts know their fk columns. A later
    # dim alias may reuse an earlier dim's table (duplicate instance).
    dims: list[dict] = []
    for i in range(n_dim_aliases):
        if dims and rng.random() < 0.25:
            twin = rng.choice(dims)
            dims.append({"alias": f"d{i}", "table": twin["table"], "rows": twin["rows"]})
        else:
            dims.append({
                "alias": f"d{i}",
                "table": f"dim{len({d['table'] for d in dims})}",
                "rows": rng.randint(min_rows, max_rows),
            })
        dims[-1]["fact"] = rng.randrange(n_facts)

    fact_rows = [rng.randint(min_rows, max_rows) for _ in range(n_facts)]
    fk_cols: dict[int, list[tuple[str, dict]]] = {i: [] for i in range(n_facts)}
    for dim in dims:
        owner = dim["fact"]
        fk_cols[owner].append((f"fk{len(fk_cols[owner])}", dim))

    tables: dict[str, MiniTable] = {}
    defs: list[TableDef] = []
    fks: list[ForeignKeyDef] = []

    seen_dim_tables: set[str] = set()
    for dim in dims:
        if dim["table"] in seen_dim_tables:
            continue
        seen_dim_tables.add(dim["table"])
        columns = ("id", "category", "val", "name", "note")
        rows = []
        for i in range(dim["rows"]):
            rows.append((
                i,
                rng_data.choice(_CATEGORIES),
                rng_data.randint(0, 40),
                _word(rng_data),
                _maybe_null(rng_data, _word(rng_data)),
            ))
        tables[dim["table"]] = MiniTable(dim["table"], columns, tuple(rows))
        defs.append(TableDef(dim["table"], len(rows), columns, frozenset({("id",)})))

    for f in range(n_facts):
        name = f"fact{f}"
        fk_names = [col for col, _dim in fk_cols[f]]
        columns = ("id", "link", *fk_names, "val", "tag")
        skew = rng_data.uniform(1.0, 2.5)
        rows = []
        for i in range(fact_rows[f]):
            row = [i, rng_data.randrange(link_domain)]
            for _col, dim in fk_cols[f]:
                ref = int(dim["rows"] * (rng_data.random() ** skew))
                if rng_data.random() < 0.05:
                    ref += dim["rows"]  # dangling: joins nothing
                row.append(_maybe_null(rng_data, ref, p=0.06))
            row.append(rng_data.randint(0, 40))
            row.append(rng_data.choice(_CATEGORIES))
            rows.append(tuple(row))
        tables[name] = MiniTable(name, columns, tuple(rows))
        defs.append(TableDef(name, len(rows), columns, frozenset({("id",)})))
        for col, dim in fk_cols[f]:
            fks.append(ForeignKeyDef(name, (col,), dim["table"], ("id",)))

    catalog = Catalog.build(defs, fks)

    from_items = []
    for f in range(n_facts):
        from_items.append(f"fact{f} AS f{f}")
    for dim in dims:
        from_items.append(f"{dim['table']} AS {dim['alias']}")

    joins = []
    for f in range(1, n_facts):
        other = rng.randrange(f)
        joins.append(f"f{f}.link = f{other}.link")
    for f in range(n_facts):
        for col, dim in fk_cols[f]:
            joins.append(f"f{f}.{col} = {dim['alias']}.id")

    alias_cols = {f"f{f}": ("val", "tag") for f in range(n_facts)}
    alias_cols.update({d["alias"]: ("category", "val", "name", "note") for d in dims})
    aliases = sorted(alias_cols)

    selections = []
    for _ in range(rng.randint(0, 3)):
        alias = rng.choice(aliases)
        selections.append(_random_selection(rng, alias, alias_cols[alias]))
    if len(aliases) >= 2 and rng.random() < 0.25:
        a, b = rng.sample(aliases, 2)
        op = rng.choice(("<", "<=", ">", "<>"))
        selections.append(f"{a}.val {op} {b}.val")

    output = _random_output(rng, aliases, alias_cols)
    where = " AND ".join(joins + selections)
    sql = f"SELECT {output} FROM {', '.join(from_items)}"
    if where:
        sql += f" WHERE {where}"
    return Instance(seed=seed, catalog=catalog, tables=tables, sql=sql,
                    data_seed=data_seed)


def _random_selection(rng: random.Random, alias: str, columns) -> str:
    kind = rng.randrange(7)
    if kind == 0:
        return f"{alias}.val {rng.choice(('<', '<=', '>', '>='))} {rng.randint(5, 35)}"
    if kind == 1 and "category" in columns:
        picks = rng.sample(_CATEGORIES, rng.randint(1, 3))
        inner = ", ".join(f"'{p}'" for p in picks)
        neg = "NOT IN" if rng.random() < 0.2 else "IN"
        return f"{alias}.category {neg} ({inner})"
    if kind == 2 and "name" in columns:
        syl = rng.choice(_SYLLABLES)
        pattern = rng.choice((f"%{syl}%", f"{syl}%", f"%{syl}"))
        return f"{alias}.name LIKE '{pattern}'"
    if kind == 3:
        low = rng.randint(0, 20)
        return f"{alias}.val BETWEEN {low} AND {low + rng.randint(3, 20)}"
    if kind == 4 and "note" in columns:
        return f"{alias}.note IS {'NOT ' if rng.random() < 0.5 else ''}NULL"
    if kind == 5 and "category" in columns:
        return (
            f"({alias}.val < {rng.randint(10, 30)} "
            f"OR {alias}.category = '{rng.choice(_CATEGORIES)}')"
        )
    if "tag" in columns:
        return f"{alias}.tag = '{rng.choice(_CATEGORIES)}'"
    return f"{alias}.category = '{rng.choice(_CATEGORIES)}'"


def _random_output(rng: random.Random, aliases, alias_cols) -> str:
    roll = rng.random()
    if roll < 0.4:
        picks = rng.sample(aliases, min(len(aliases), rng.randint(1, 2)))
        return ", ".join(
            f"MIN({a}.val) AS min_{i}" for i, a in enumerate(picks)
        )
    if roll < 0.55:
        return "COUNT(*) AS n_rows"
    picks = []
    for _ in range(rng.randint(1, 3)):
        alias = rng.choice(aliases)
        col = rng.choice([c for c in alias_cols[alias] if c != "note"])
        picks.append(f"{alias}.{col}")
    return ", ".join(dict.fromkeys(picks))


def generate_corpus(count: int, base_seed: int = 0, **kwargs) -> list[Instance]:
    return [generate_instance(base_seed + i, **kwargs) for i in range(count)]
