"""Shared test utilities: synthetic graphs, invariant checks, DB loading."""

from __future__ import annotations

import sqlalchemy
from sqlalchemy import text

from joinplan.catalog import Catalog, ForeignKeyDef, TableDef
from joinplan.costlab import MiniTable
from joinplan.datagen import Instance
from joinplan.planner import (
    FK_CANDIDATE,
    FK_HEAD,
    INSERTED_DISCONNECT,
    SEED,
    validate_order,
)
from joinplan.sqlast import ColumnRef
from joinplan.sqlfront import (
    MANY_TO_MANY,
    ONE_TO_MANY,
    JoinGraph,
    JoinPredicate,
    TableInstance,
)

GOLDEN_SEQUENCE = ("mi_idx", "it2", "t", "mi", "it1", "ci", "n")
GOLDEN_PLAN_TEXT = """\
algorithm: split
sequence: mi_idx it2 t mi it1 ci n
partitions:
  1: mi_idx it2 t
  2: mi it1
  3: ci n
provenance:
  mi_idx: fk_head
  it2: fk_candidate
  t: fk_candidate
  mi: fk_head
  it1: fk_candidate
  ci: fk_head
  n: fk_candidate
"""
GOLDEN_PARTITIONS = (("mi_idx", "it2", "t"), ("mi", "it1"), ("ci", "n"))
GOLDEN_PROVENANCE = {
    "mi_idx": "fk_head",
    "it2": "fk_candidate",
    "t": "fk_candidate",
    "mi": "fk_head",
    "it1": "fk_candidate",
    "ci": "fk_head",
    "n": "fk_candidate",
}


def make_graph(sizes: dict[str, int], edges) -> JoinGraph:
    """Graph from an {alias: size} map and (left, right, kind) triples."""
    instances = [TableInstance(a, a, n, ("x",)) for a, n in sizes.items()]
    preds = []
    for a, b, kind in edges:
        key_side = "none" if kind == MANY_TO_MANY else "right"
        preds.append(
            JoinPredicate(ColumnRef(a, "x"), ColumnRef(b, "x"), kind, key_side)
        )
    return JoinGraph.build(instances, preds)


def random_graph_spec(rng, n_min: int = 2, n_max: int = 14):
    """Spec of a random connected graph: ({alias: size}, edge triples)."""
    n = rng.randint(n_min, n_max)
    names = [f"t{i:02d}" for i in range(n)]
    sizes = {a: rng.randint(1, 1_000_000) for a in names}

    def kind():
        return MANY_TO_MANY if rng.random() < 0.4 else ONE_TO_MANY

    edges = [(names[i], names[rng.randrange(i)], kind()) for i in range(1, n)]
    for _ in range(rng.randint(0, n)):
        i, j = rng.sample(range(n), 2)
        edges.append((names[i], names[j], kind()))
    return sizes, edges


def shuffled_graph(rng, sizes: dict[str, int], edges) -> JoinGraph:
    """The same graph presented in a different vertex and edge order."""
    items = list(sizes.items())
    rng.shuffle(items)
    flipped = []
    for a, b, kind in edges:
        if rng.random() < 0.5:
            a, b = b, a
        flipped.append((a, b, kind))
    rng.shuffle(flipped)
    return make_graph(dict(items), flipped)


def check_split_invariants(g, order) -> None:
    """Structural guarantees every split order must satisfy."""
    # Permutation of the vertices, partitions concatenating to the sequence.
    assert sorted(order.sequence) == sorted(g.sizes)
    flat = [a for p in order.partitions for a in p.members]
    assert flat == list(order.sequence)

    # Cartesian steps and the disconnect tag name exactly the same positions.
    disconnect_positions = [
        pos for pos, alias in enumerate(order.sequence)
        if order.provenance[alias] == INSERTED_DISCONNECT
    ]
    assert validate_order(g, order) == disconnect_positions
    assert len(order.warnings) == len(disconnect_positions)

    nm = g.nm_aliases
    sizes = g.sizes
    for part in order.partitions:
        assert part.head == part.members[0]
        assert order.provenance[part.head] in (FK_HEAD, SEED)
        cand_sizes = [
            sizes[a] for a in part.members if order.provenance[a] == FK_CANDIDATE
        ]
        assert cand_sizes == sorted(cand_sizes)

    heads = {a for a, tag in order.provenance.items() if tag == FK_HEAD}
    assert heads <= nm
    for alias in nm:
        assert order.provenance[alias] in (FK_HEAD, INSERTED_DISCONNECT)
    expected_first = FK_HEAD if nm else SEED
    assert order.provenance[order.sequence[0]] == expected_first
    if g.connected:
        assert disconnect_positions == []
        assert heads == nm


def bridged_graph_edges():
    """Two many-to-many components whose only link is a two-hop chain.

    a-b and c-d are many-to-many; the path b-x-e-c is one-to-many. With
    e and x small, placing a, b pulls in x as a follower, after which no
    many-to-many table joins the prefix and e must be spliced in early.
    """
    return [
        ("a", "b", MANY_TO_MANY),
        ("b", "x", ONE_TO_MANY),
        ("x", "e", ONE_TO_MANY),
        ("e", "c", ONE_TO_MANY),
        ("c", "d", MANY_TO_MANY),
    ]


def rename_tables(inst: Instance, prefix: str) -> Instance:
    """Instance with every base table renamed; aliases and data unchanged."""
    cat = inst.catalog
    defs = [
        TableDef(prefix + t.name, t.row_count, t.columns, t.unique_keys)
        for t in cat.tables.values()
    ]
    fks = [
        ForeignKeyDef(prefix + fk.from_table, fk.from_columns,
                      prefix + fk.to_table, fk.to_columns)
        for fk in cat.foreign_keys
    ]
    tables = {
        prefix + name: MiniTable(prefix + name, t.columns, t.rows)
        for name, t in inst.tables.items()
    }
    sql = inst.sql
    for name in sorted(inst.tables, key=len, reverse=True):
        sql = sql.replace(f"FROM {name} AS", f"FROM {prefix}{name} AS")
        sql = sql.replace(f", {name} AS", f", {prefix}{name} AS")
    return Instance(seed=inst.seed, catalog=Catalog.build(defs, fks),
                    tables=tables, sql=sql, data_seed=inst.data_seed)


def load_into_database(url: str, tables) -> None:
    """Create and fill one SQL table per MiniTable (generic DDL)."""
    engine = sqlalchemy.create_engine(url)
    with engine.begin() as conn:
        for table in tables.values():
            cols = ", ".join(f'"{c}"' for c in table.columns)
            conn.execute(text(f'CREATE TABLE "{table.name}" ({cols})'))
            slots = ", ".join(f":p{i}" for i in range(len(table.columns)))
            stmt = text(f'INSERT INTO "{table.name}" VALUES ({slots})')
            for row in table.rows:
                conn.execute(stmt, {f"p{i}": v for i, v in enumerate(row)})
    engine.dispose()


def drop_from_database(url: str, tables) -> None:
    engine = sqlalchemy.create_engine(url)
    with engine.begin() as conn:
        for name in tables:
            conn.execute(text(f'DROP TABLE IF EXISTS "{name}"'))
    engine.dispose()
