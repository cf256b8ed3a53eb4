"""Query model and join graph construction.

``parse_query`` turns SQL text into a validated QueryModel: table
instances, equi-join predicates (classified one-to-many or many-to-many
from the catalog's unique keys), remaining selection predicates, and the
output list. ``build_join_graph`` assembles the graph the planner
consumes, optionally closing join equality classes transitively.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from . import sqlast
from .catalog import Catalog, is_key_column
from .errors import QueryError
from .sqlast import Column, ColumnRef, Comparison, Expr, SelectStatement, Star
from .sqlparser import parse_select

ONE_TO_MANY = "one_to_many"
MANY_TO_MANY = "many_to_many"


@dataclass(frozen=True)
class TableInstance:
    """One aliased occurrence of a base table in a query."""

    alias: str
    base_table: str
    size: int
    columns: tuple[str, ...]


@dataclass(frozen=True)
class JoinPredicate:
    """Equality between columns of two distinct instances.

    ``kind`` is one_to_many when exactly one endpoint column is a
    single-column unique key of its base table (that endpoint is
    ``key_side``), many_to_many when neither is. Key-to-key joins are
    degenerate one-to-many and take key_side = "left" so planning stays
    deterministic. ``implied`` marks edges added by transitive closure.
    """

    left: ColumnRef
    right: ColumnRef
    kind: str
    key_side: str  # "left" | "right" | "none"
    implied: bool = False

    def aliases(self) -> frozenset[str]:
        return frozenset((self.left.alias, self.right.alias))

    def render(self, resolve=None) -> str:
        expr = Comparison("=", Column(*self.left), Column(*self.right))
        return expr.render(resolve) if resolve else expr.render()

    def touches(self, alias: str) -> ColumnRef | None:
        if self.left.alias == alias:
            return self.left
        if self.right.alias == alias:
            return self.right
        return None


@dataclass(frozen=True)
class SelectionPredicate:
    """Non-join conjunct, kept as text plus its parsed form."""

    text: str
    aliases: frozenset[str]
    expr: Expr


@dataclass(frozen=True)
class OutputExpr:
    """SELECT-list entry, source text preserved verbatim."""

    text: str
    name: str | None
    aliases: frozenset[str]
    expr: Expr


@dataclass(frozen=True)
class QueryModel:
    instances: tuple[TableInstance, ...]
    joins: tuple[JoinPredicate, ...]
    selections: tuple[SelectionPredicate, ...]
    output: tuple[OutputExpr, ...]

    def aliases(self) -> list[str]:
        return [inst.alias for inst in self.instances]

    def instance(self, alias: str) -> TableInstance:
        for inst in self.instances:
            if inst.alias == alias:
                return inst
        raise QueryError(f"unknown alias {alias!r}")


def classify_join(cat: Catalog, left_table: str, left_col: str, right_table: str, right_col: str):
    """Classify an equi-join edge from catalog key constraints.

    Returns (kind, key_side). Purely a function of the declared unique
    keys, so conjunct order in the query can never change the result.
    """
    left_key = is_key_column(cat, left_table, left_col)
    right_key = is_key_column(cat, right_table, right_col)
    if left_key:
        return ONE_TO_MANY, "left"
    if right_key:
        return ONE_TO_MANY, "right"
    return MANY_TO_MANY, "none"


def _check_column(cat: Catalog, instances: dict[str, TableInstance], ref: ColumnRef) -> None:
    if ref.alias not in instances:
        raise QueryError(f"unknown alias {ref.alias!r}")
    inst = instances[ref.alias]
    if ref.column not in inst.columns:
        raise QueryError(f"unknown column {ref.alias}.{ref.column} (table {inst.base_table})")


def parse_query(sql: str, cat: Catalog) -> QueryModel:
    """Parse a SELECT in the input subset and validate it against the catalog.

    WHERE conjuncts of the form ``a.x = b.y`` with distinct aliases
    become join predicates (duplicates kept: parallel edges are legal);
    every other conjunct becomes a selection bound to its alias set.
    """
    stmt = parse_select(sql, extended=False)
    return model_from_statement(stmt, cat)


def model_from_statement(stmt: SelectStatement, cat: Catalog) -> QueryModel:
    instances: dict[str, TableInstance] = {}
    for item in stmt.from_items():
        table = cat.tables.get(item.table)
        if table is None:
            raise QueryError(f"unknown table {item.table!r}")
        if item.alias in instances:
            raise QueryError(f"duplicate alias {item.alias!r}")
        instances[item.alias] = TableInstance(
            alias=item.alias,
            base_table=table.name,
            size=table.row_count,
            columns=table.columns,
        )

    joins: list[JoinPredicate] = []
    selections: list[SelectionPredicate] = []
    conjuncts = sqlast.flatten_conjuncts(stmt.where) if stmt.where is not None else []
    for conjunct in conjuncts:
        for ref in sqlast.referenced_columns(conjunct):
            _check_column(cat, instances, ref)
        if (
            isinstance(conjunct, Comparison)
            and conjunct.op == "="
            and isinstance(conjunct.left, Column)
            and isinstance(conjunct.right, Column)
            and conjunct.left.alias != conjunct.right.alias
        ):
            left = ColumnRef(conjunct.left.alias, conjunct.left.column)
            right = ColumnRef(conjunct.right.alias, conjunct.right.column)
            kind, key_side = classify_join(
                cat,
                instances[left.alias].base_table, left.column,
                instances[right.alias].base_table, right.column,
            )
            joins.append(JoinPredicate(left, right, kind, key_side))
        else:
            aliases = sqlast.referenced_aliases(conjunct)
            if not aliases:
                raise QueryError("predicate references no table alias")
            selections.append(
                SelectionPredicate(conjunct.render(), frozenset(aliases), conjunct)
            )

    output: list[OutputExpr] = []
    for item in stmt.items:
        if isinstance(item.expr, Star):
            aliases = frozenset(instances)
        else:
            refs = sqlast.referenced_columns(item.expr)
            for ref in refs:
                _check_column(cat, instances, ref)
            aliases = frozenset(ref.alias for ref in refs)
        output.append(OutputExpr(item.text, item.name, aliases, item.expr))

    return QueryModel(
        instances=tuple(instances.values()),
        joins=tuple(joins),
        selections=tuple(selections),
        output=tuple(output),
    )


def render_query(q: QueryModel) -> str:
    """Render the model back to SQL in the input subset.

    Join conjuncts come first (in model order), then selections, so
    re-parsing the result reproduces the model structurally.
    """
    items = []
    for out in q.output:
        items.append(f"{out.text} AS {out.name}" if out.name else out.text)
    from_items = []
    for inst in q.instances:
        if inst.alias == inst.base_table:
            from_items.append(inst.base_table)
        else:
            from_items.append(f"{inst.base_table} AS {inst.alias}")
    sql = f"SELECT {', '.join(items)} FROM {', '.join(from_items)}"
    conjuncts = [j.render() for j in q.joins] + [s.text for s in q.selections]
    if conjuncts:
        sql += " WHERE " + " AND ".join(conjuncts)
    return sql


@dataclass(frozen=True)
class JoinGraph:
    """Join graph: vertices are table instances, edges classified equi-joins.

    ``sizes``, ``adjacency``, and ``nm_aliases`` are the complete
    planning surface; the planner reads nothing beyond them.
    """

    vertices: dict[str, TableInstance]
    edges: tuple[JoinPredicate, ...]
    adjacency: dict[str, frozenset[str]]
    connected: bool
    components: tuple[frozenset[str], ...]

    @property
    def sizes(self) -> dict[str, int]:
        return {alias: inst.size for alias, inst in self.vertices.items()}

    @property
    def nm_aliases(self) -> frozenset[str]:
        out = set()
        for edge in self.edges:
            if edge.kind == MANY_TO_MANY:
                out.update(edge.aliases())
        return frozenset(out)

    @classmethod
    def build(cls, instances, edges) -> "JoinGraph":
        vertices = {inst.alias: inst for inst in instances}
        adjacency: dict[str, set[str]] = {alias: set() for alias in vertices}
        for edge in edges:
            if edge.left.alias not in vertices or edge.right.alias not in vertices:
                raise QueryError(f"join edge endpoint outside the query: {edge.render()}")
            adjacency[edge.left.alias].add(edge.right.alias)
            adjacency[edge.right.alias].add(edge.left.alias)
        components = _components(set(vertices), adjacency)
        return cls(
            vertices=vertices,
            edges=tuple(edges),
            adjacency={a: frozenset(n) for a, n in adjacency.items()},
            connected=len(components) <= 1,
            components=tuple(frozenset(c) for c in components),
        )


def _components(aliases: set[str], adjacency: dict[str, set[str]]) -> list[set[str]]:
    seen: set[str] = set()
    components = []
    for start in sorted(aliases):
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in adjacency[node]:
                if nxt not in comp:
                    comp.add(nxt)
                    frontier.append(nxt)
        seen |= comp
        components.append(comp)
    return components


def build_join_graph(q: QueryModel, cat: Catalog, transitive: bool = False) -> JoinGraph:
    """Build the annotated join graph for a query.

    With ``transitive`` set, join columns are grouped into equality
    classes and missing edges between class members are added as implied
    joins, each classified from the catalog like a written one.
    Disconnected graphs are legal; connectivity is recorded, not enforced.
    """
    edges = list(q.joins)
    if transitive:
        edges.extend(_transitive_edges(q, cat))
    return JoinGraph.build(q.instances, edges)


def _transitive_edges(q: QueryModel, cat: Catalog) -> list[JoinPredicate]:
    parent: dict[ColumnRef, ColumnRef] = {}

    def find(x: ColumnRef) -> ColumnRef:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for join in q.joins:
        ra, rb = find(join.left), find(join.right)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    existing = {frozenset((j.left, j.right)) for j in q.joins}
    classes: dict[ColumnRef, list[ColumnRef]] = {}
    for ref in list(parent):
        classes.setdefault(find(ref), []).append(ref)

    base = {inst.alias: inst.base_table for inst in q.instances}
    implied = []
    for members in classes.values():
        for a, b in combinations(sorted(members), 2):
            if a.alias == b.alias or frozenset((a, b)) in existing:
                continue
            kind, key_side = classify_join(cat, base[a.alias], a.column, base[b.alias], b.column)
            implied.append(JoinPredicate(a, b, kind, key_side, implied=True))
    return implied
