"""Render a join order as executable SQL.

Two forms are produced. The subquery form nests one derived table per
partition: the first partition is the innermost block and each later
partition wraps the previous block, importing the columns it still
needs under stable ``<alias>_<column>`` names. The flat form is a
single left-deep JOIN chain in sequence order. Both come with a
prologue of session settings that stop the target engine from
reordering what we emit.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import sqlast
from .errors import RewriteError
from .planner import INSERTED_DISCONNECT, JoinOrder
from .sqlast import ColumnRef, Expr, Star
from .sqlfront import QueryModel

SUBQUERY = "subquery"
LEFTDEEP = "leftdeep"

POSTGRES_COMPATIBLE = "postgres-compatible"
GENERIC = "generic"

_SETTINGS = {
    POSTGRES_COMPATIBLE: (
        "SET from_collapse_limit = 1",
        "SET join_collapse_limit = 1",
    ),
    GENERIC: (),
}


def render_settings(target: str) -> list[str]:
    """Session statements that pin the written join order on the target.

    The postgres-compatible profile caps both collapse limits at 1 so
    the engine keeps the FROM order and never flattens the derived
    tables. The generic profile assumes nothing and emits no settings.
    """
    try:
        return list(_SETTINGS[target])
    except KeyError:
        raise RewriteError(
            f"unknown engine profile {target!r}; expected one of {sorted(_SETTINGS)}"
        ) from None


@dataclass(frozen=True)
class RewrittenQuery:
    mode: str
    sql: str
    exported_column_map: dict[int, dict[ColumnRef, str]]
    prologue: tuple[str, ...]
    warnings: tuple[str, ...] = ()

    def statements(self) -> list[str]:
        return [*self.prologue, self.sql]


def _check_match(q: QueryModel, o: JoinOrder) -> None:
    if set(o.sequence) != set(q.aliases()):
        raise RewriteError(
            "order does not cover the query: "
            f"order has {sorted(o.sequence)}, query has {sorted(q.aliases())}"
        )


def _table_sql(q: QueryModel, alias: str) -> str:
    inst = q.instance(alias)
    if inst.alias == inst.base_table:
        return inst.base_table
    return f"{inst.base_table} AS {inst.alias}"


def _expanded_outputs(q: QueryModel) -> list[tuple[Expr, str | None]]:
    """Output list with ``*`` expanded to one column per table, FROM order."""
    out: list[tuple[Expr, str | None]] = []
    for item in q.output:
        if isinstance(item.expr, Star):
            for inst in q.instances:
                for col in inst.columns:
                    out.append((sqlast.Column(inst.alias, col), None))
        else:
            out.append((item.expr, item.name))
    return out


def rewrite_subquery(q: QueryModel, o: JoinOrder, target: str = POSTGRES_COMPATIBLE) -> RewrittenQuery:
    """Nest one derived table per partition, first partition innermost.

    Every join predicate and selection lands at the first level where
    all its tables are present; columns a later level still needs are
    exported upward as ``<alias>_<column>``. The outermost level carries
    the original SELECT list with references resolved through the
    rename map.
    """
    _check_match(q, o)
    prologue = tuple(render_settings(target))
    k = len(o.partitions)
    level_of = {}
    for i, part in enumerate(o.partitions, start=1):
        for alias in part.members:
            level_of[alias] = i

    def pred_level(aliases) -> int:
        return max(level_of[a] for a in aliases)

    joins = [(j, pred_level(j.aliases())) for j in q.joins]
    selections = [(s, pred_level(s.aliases)) for s in q.selections]
    outputs = _expanded_outputs(q)

    # Last level at which each column is referenced. Outputs count as
    # level k so their columns flow all the way up.
    last_use: dict[ColumnRef, int] = {}

    def note_use(expr: Expr, level: int) -> None:
        for ref in sqlast.referenced_columns(expr):
            last_use[ref] = max(last_use.get(ref, 0), level)

    for join, level in joins:
        note_use(sqlast.Comparison("=", sqlast.Column(*join.left), sqlast.Column(*join.right)), level)
    for sel, level in selections:
        note_use(sel.expr, level)
    for expr, _name in outputs:
        note_use(expr, k)

    rename = {ref: f"{ref.alias}_{ref.column}" for ref in last_use}
    exports: dict[int, list[ColumnRef]] = {}
    for i in range(1, k):
        level_exports = sorted(
            ref for ref in last_use
            if level_of[ref.alias] <= i < last_use[ref]
        )
        seen: dict[str, ColumnRef] = {}
        for ref in level_exports:
            name = rename[ref]
            if name in seen:
                raise RewriteError(
                    f"renamed column {name!r} is ambiguous: produced by both "
                    f"{seen[name].alias}.{seen[name].column} and {ref.alias}.{ref.column}"
                )
            seen[name] = ref
        exports[i] = level_exports

    def resolver(level: int):
        def resolve(alias: str, column: str) -> str:
            if level_of[alias] == level:
                return f"{alias}.{column}"
            return f"sq{level - 1}.{rename[ColumnRef(alias, column)]}"
        return resolve

    sql = ""
    for i in range(1, k + 1):
        resolve = resolver(i)
        if i == 1:
            from_items = [_table_sql(q, a) for a in o.partitions[0].members]
        else:
            from_items = [f"({sql}) AS sq{i - 1}"]
            from_items += [_table_sql(q, a) for a in o.partitions[i - 1].members]

        if i < k:
            items = []
            for ref in exports[i]:
                if level_of[ref.alias] == i:
                    items.append(f"{ref.alias}.{ref.column} AS {rename[ref]}")
                else:
                    items.append(f"sq{i - 1}.{rename[ref]}")
            if not items:
                # A later Cartesian partition may need nothing from this
                # block; keep the projection syntactically non-empty.
                items = [f"1 AS keep{i}"]
        else:
            items = []
            for expr, name in outputs:
                text = expr.render(resolve)
                items.append(f"{text} AS {name}" if name else text)

        conjuncts = [j.render(resolve) for j, level in joins if level == i]
        conjuncts += [s.expr.render(resolve) for s, level in selections if level == i]
        sql = f"SELECT {', '.join(items)} FROM {', '.join(from_items)}"
        if conjuncts:
            sql += " WHERE " + " AND ".join(conjuncts)

    export_map = {
        i: {ref: rename[ref] for ref in refs} for i, refs in exports.items()
    }
    return RewrittenQuery(
        mode=SUBQUERY,
        sql=sql,
        exported_column_map=export_map,
        prologue=prologue,
        warnings=o.warnings,
    )


def rewrite_leftdeep(q: QueryModel, o: JoinOrder, target: str = POSTGRES_COMPATIBLE) -> RewrittenQuery:
    """Emit the sequence as one explicit left-deep JOIN chain.

    Each join predicate lands on the ON clause of the latest table it
    mentions. A step with no usable predicate becomes a CROSS JOIN and
    records a warning. Selections keep their original spelling in
    WHERE; nothing is renamed in this form.
    """
    _check_match(q, o)
    prologue = tuple(render_settings(target))
    position = {alias: i for i, alias in enumerate(o.sequence)}
    by_step: dict[int, list[str]] = {i: [] for i in range(len(o.sequence))}
    for join in q.joins:
        step = max(position[join.left.alias], position[join.right.alias])
        by_step[step].append(join.render())

    warnings = list(o.warnings)
    parts = [f"SELECT {_output_sql(q)} FROM {_table_sql(q, o.sequence[0])}"]
    for step, alias in enumerate(o.sequence[1:], start=1):
        conditions = by_step[step]
        if conditions:
            parts.append(f"JOIN {_table_sql(q, alias)} ON " + " AND ".join(conditions))
        else:
            parts.append(f"CROSS JOIN {_table_sql(q, alias)}")
            if o.provenance.get(alias) != INSERTED_DISCONNECT:
                warnings.append(
                    f"no join predicate is available when {alias} enters the chain; "
                    "emitted a CROSS JOIN"
                )
    sql = " ".join(parts)
    selections = [s.text for s in q.selections]
    if selections:
        sql += " WHERE " + " AND ".join(selections)
    return RewrittenQuery(
        mode=LEFTDEEP,
        sql=sql,
        exported_column_map={},
        prologue=prologue,
        warnings=tuple(warnings),
    )


def _output_sql(q: QueryModel) -> str:
    items = []
    for item in q.output:
        items.append(f"{item.text} AS {item.name}" if item.name else item.text)
    return ", ".join(items)
