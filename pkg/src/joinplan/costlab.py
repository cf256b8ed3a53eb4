"""Exact small-scale execution and analytical cost evaluation.

This module is the measurement bench for join orders. It executes a
query over small in-memory tables three different ways so results can
be cross-checked:

* ``execute_order``: left-deep hash joins following a given order,
  recording the cardinality after every step (the analytical cost is
  their sum).
* ``evaluate_reference``: nested-loop evaluation in FROM order with
  each conjunct applied as soon as its tables are bound. Shares no join
  machinery with the hash path.
* ``cartesian_filter_result``: literally materializes the full product
  and filters it; only usable on tiny inputs, kept as the bluntest
  possible oracle.

``optimal_order`` finds the cheapest left-deep sequence by dynamic
programming over vertex subsets (subset cardinalities are order
independent), and ``check_equivalence`` re-parses emitted SQL and
evaluates it innermost-out against the reference result.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from pathlib import Path

from . import planner, sqlast
from .errors import BoundExceeded, ExecutionError, PlanError, RowLimitExceeded
from .rewriter import RewrittenQuery
from .sqlast import (
    And,
    Between,
    Column,
    Comparison,
    DerivedRef,
    Expr,
    FuncCall,
    InList,
    IsNull,
    Like,
    Literal,
    Not,
    Or,
    SelectStatement,
    Star,
    TableRef,
)
from .sqlfront import QueryModel
from .sqlparser import parse_select

ROW_LIMIT_DEFAULT = 10_000_000
OPTIMAL_BOUND_DEFAULT = 10

_AGGREGATES = {"MIN", "MAX", "COUNT", "SUM", "AVG"}


@dataclass(frozen=True)
class MiniTable:
    """In-memory table: rectangular rows of int/float/str/None values."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self) -> None:
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ExecutionError(
                    f"table {self.name}: row width {len(row)} != {width} columns"
                )

    def index(self) -> dict[str, int]:
        return {col: i for i, col in enumerate(self.columns)}


@dataclass(frozen=True)
class CostReport:
    order: planner.JoinOrder
    step_cardinalities: tuple[int, ...]
    analytical_cost: int

    def to_dict(self) -> dict:
        return {
            "algorithm": self.order.algo,
            "sequence": list(self.order.sequence),
            "step_cardinalities": list(self.step_cardinalities),
            "analytical_cost": self.analytical_cost,
        }

    def report(self) -> str:
        return "\n".join(
            [
                f"algorithm: {self.order.algo}",
                "sequence: " + " ".join(self.order.sequence),
                "step_cardinalities: " + " ".join(str(c) for c in self.step_cardinalities),
                f"analytical_cost: {self.analytical_cost}",
            ]
        )


def _make_cost_report(order: planner.JoinOrder, step_cards: list[int]) -> CostReport:
    return CostReport(order, tuple(step_cards), sum(step_cards))


# --- dataset files ---


def _parse_cell(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def load_dataset(directory) -> dict[str, MiniTable]:
    """Read every ``<table>.csv`` under the directory (header row = columns)."""
    directory = Path(directory)
    tables: dict[str, MiniTable] = {}
    paths = sorted(directory.glob("*.csv"))
    if not paths:
        raise ExecutionError(f"no .csv files under {directory}")
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ExecutionError(f"{path} is empty; expected a header row") from None
            rows = tuple(tuple(_parse_cell(c) for c in row) for row in reader)
        tables[path.stem] = MiniTable(path.stem, tuple(header), rows)
    return tables


def write_dataset(directory, tables) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for table in _table_map(tables).values():
        with open(directory / f"{table.name}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow(["" if v is None else v for v in row])


def _table_map(tables) -> dict[str, MiniTable]:
    if isinstance(tables, dict):
        return tables
    return {t.name: t for t in tables}


# --- expression evaluation (three-valued logic) ---


@lru_cache(maxsize=512)
def _like_regex(pattern: str) -> re.Pattern:
    parts = []
    for ch in pattern:
        if ch == "%":
            parts.append(".*")
        elif ch == "_":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts), re.DOTALL)


def _compare(op: str, a, b):
    if a is None or b is None:
        return None
    numeric = (int, float)
    if isinstance(a, numeric) and isinstance(b, numeric):
        pass
    elif isinstance(a, str) and isinstance(b, str):
        pass
    else:
        raise ExecutionError(
            f"cannot compare {type(a).__name__} with {type(b).__name__}"
        )
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ExecutionError(f"unknown comparison operator {op!r}")


def _not3(value):
    return None if value is None else not value


def eval_expr(expr: Expr, lookup):
    """Evaluate a predicate or scalar; None propagates as SQL unknown."""
    if isinstance(expr, Column):
        return lookup(expr.alias, expr.column)
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Comparison):
        return _compare(expr.op, eval_expr(expr.left, lookup), eval_expr(expr.right, lookup))
    if isinstance(expr, InList):
        value = eval_expr(expr.operand, lookup)
        if value is None:
            return None
        saw_null = False
        hit = False
        for item in expr.items:
            if item is None:
                saw_null = True
            elif _compare("=", value, item) is True:
                hit = True
                break
        result = True if hit else (None if saw_null else False)
        return _not3(result) if expr.negated else result
    if isinstance(expr, Between):
        value = eval_expr(expr.operand, lookup)
        low = _compare(">=", value, eval_expr(expr.low, lookup))
        high = _compare("<=", value, eval_expr(expr.high, lookup))
        result = _and3([low, high])
        return _not3(result) if expr.negated else result
    if isinstance(expr, Like):
        value = eval_expr(expr.operand, lookup)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ExecutionError(f"LIKE needs a string operand, got {type(value).__name__}")
        result = _like_regex(expr.pattern).fullmatch(value) is not None
        return not result if expr.negated else result
    if isinstance(expr, IsNull):
        result = eval_expr(expr.operand, lookup) is None
        return not result if expr.negated else result
    if isinstance(expr, And):
        return _and3([eval_expr(i, lookup) for i in expr.items])
    if isinstance(expr, Or):
        return _or3([eval_expr(i, lookup) for i in expr.items])
    if isinstance(expr, Not):
        return _not3(eval_expr(expr.item, lookup))
    raise ExecutionError(f"cannot evaluate expression node {type(expr).__name__}")


def _and3(values):
    if any(v is False for v in values):
        return False
    if any(v is None for v in values):
        return None
    return True


def _or3(values):
    if any(v is True for v in values):
        return True
    if any(v is None for v in values):
        return None
    return False


def passes(expr: Expr, lookup) -> bool:
    return eval_expr(expr, lookup) is True


# --- projection (shared by executor and SQL evaluation) ---


def _aggregate(call: FuncCall, envs, lookup_for):
    name = call.name.upper()
    if name not in _AGGREGATES:
        raise ExecutionError(f"unsupported function {call.name!r}")
    if call.star:
        if name != "COUNT":
            raise ExecutionError(f"{call.name}(*) is not supported")
        return len(envs)
    if len(call.args) != 1:
        raise ExecutionError(f"{call.name} takes exactly one argument")
    values = [eval_expr(call.args[0], lookup_for(env)) for env in envs]
    values = [v for v in values if v is not None]
    if name == "COUNT":
        return len(values)
    if not values:
        return None
    if name == "MIN":
        return min(values)
    if name == "MAX":
        return max(values)
    if name == "SUM":
        return sum(values)
    return sum(values) / len(values)


def project_rows(outputs, envs, lookup_for) -> list[tuple]:
    """Evaluate output expressions over result rows.

    ``outputs`` is a list of expressions; if any is an aggregate call,
    all must be, and a single row is produced (over zero or more input
    rows, as plain SQL does without grouping).
    """
    aggregate_flags = [isinstance(e, FuncCall) for e in outputs]
    if any(aggregate_flags):
        if not all(aggregate_flags):
            raise ExecutionError("output list mixes aggregate and plain expressions")
        return [tuple(_aggregate(e, envs, lookup_for) for e in outputs)]
    return [tuple(eval_expr(e, lookup_for(env)) for e in outputs) for env in envs]


def _output_exprs(q: QueryModel) -> list[Expr]:
    out: list[Expr] = []
    for item in q.output:
        if isinstance(item.expr, Star):
            for inst in q.instances:
                for col in inst.columns:
                    out.append(Column(inst.alias, col))
        else:
            out.append(item.expr)
    return out


# --- left-deep hash-join executor ---


def _base_rows(tables, q: QueryModel, alias: str, selections) -> list[tuple]:
    """Rows of the base table behind ``alias`` after its own selections."""
    inst = q.instance(alias)
    table = tables.get(inst.base_table)
    if table is None:
        raise ExecutionError(f"no loaded table named {inst.base_table!r}")
    for col in inst.columns:
        if col not in table.columns:
            raise ExecutionError(
                f"loaded table {table.name!r} lacks column {col!r} from the catalog"
            )
    col_index = table.index()
    mine = [s for s in selections if s.aliases == frozenset((alias,))]
    rows = list(table.rows)
    if mine:
        kept = []
        for row in rows:
            if all(passes(s.expr, lambda a, c: row[col_index[c]]) for s in mine):
                kept.append(row)
        rows = kept
    # Project down to the catalog's column order for a stable layout.
    order = [col_index[c] for c in inst.columns]
    return [tuple(row[i] for i in order) for row in rows]


def execute_order(tables, q: QueryModel, o: planner.JoinOrder,
                  row_limit: int = ROW_LIMIT_DEFAULT):
    """Run the query left-deep in the order's sequence.

    Selections on a single table are applied before its rows enter any
    join; selections spanning several tables apply at the first step
    where all of them are present, so each recorded cardinality is the
    row count the rewritten query would carry at that point. Returns
    the projected result multiset and the cost report.

    Steps with no usable equality predicate degrade to a product; the
    ``row_limit`` guard aborts runaway intermediates either way.
    """
    tables = _table_map(tables)
    if set(o.sequence) != set(q.aliases()):
        raise ExecutionError("order does not cover the query's aliases")

    position = {alias: i for i, alias in enumerate(o.sequence)}
    join_at: dict[int, list] = {i: [] for i in range(len(o.sequence))}
    for join in q.joins:
        join_at[max(position[join.left.alias], position[join.right.alias])].append(join)
    multi = [s for s in q.selections if len(s.aliases) > 1]
    selections_at: dict[int, list] = {i: [] for i in range(len(o.sequence))}
    for sel in multi:
        selections_at[max(position[a] for a in sel.aliases)].append(sel)

    first = o.sequence[0]
    col_of: dict[tuple[str, str], int] = {}
    for i, col in enumerate(q.instance(first).columns):
        col_of[(first, col)] = i
    current = _base_rows(tables, q, first, q.selections)

    step_cards: list[int] = []
    for step in range(1, len(o.sequence)):
        alias = o.sequence[step]
        inst = q.instance(alias)
        right_rows = _base_rows(tables, q, alias, q.selections)
        right_index = {col: i for i, col in enumerate(inst.columns)}

        probe_keys = []  # flat indexes into the accumulated row
        build_keys = []  # indexes into the incoming table's row
        for join in join_at[step]:
            if join.left.alias == alias:
                mine, other = join.left, join.right
            else:
                mine, other = join.right, join.left
            build_keys.append(right_index[mine.column])
            probe_keys.append(col_of[(other.alias, other.column)])

        if build_keys:
            buckets: dict[tuple, list[tuple]] = {}
            for row in right_rows:
                key = tuple(row[i] for i in build_keys)
                if any(v is None for v in key):
                    continue
                buckets.setdefault(key, []).append(row)
            joined = []
            for left_row in current:
                key = tuple(left_row[i] for i in probe_keys)
                if any(v is None for v in key):
                    continue
                for right_row in buckets.get(key, ()):
                    joined.append(left_row + right_row)
                    if len(joined) > row_limit:
                        raise RowLimitExceeded(
                            f"joining {alias} (step {step}) exceeded {row_limit} rows"
                        )
        else:
            if len(current) * max(len(right_rows), 1) > row_limit:
                raise RowLimitExceeded(
                    f"product with {alias} (step {step}) would exceed {row_limit} rows"
                )
            joined = [l + r for l in current for r in right_rows]

        base = len(col_of)
        for i, col in enumerate(inst.columns):
            col_of[(alias, col)] = base + i

        pending = selections_at[step]
        if pending:
            kept = []
            for row in joined:
                if all(passes(s.expr, lambda a, c: row[col_of[(a, c)]]) for s in pending):
                    kept.append(row)
            joined = kept

        current = joined
        step_cards.append(len(current))

    outputs = _output_exprs(q)
    result = Counter(
        project_rows(outputs, current, lambda env: (lambda a, c: env[col_of[(a, c)]]))
    )
    return result, _make_cost_report(o, step_cards)


# --- nested-loop reference paths (independent of the hash executor) ---


class _YieldGuard:
    def __init__(self, limit: int, what: str) -> None:
        self.limit = limit
        self.count = 0
        self.what = what

    def tick(self) -> None:
        self.count += 1
        if self.count > self.limit:
            raise RowLimitExceeded(f"{self.what} exceeded {self.limit} rows")


def _run_nested(bindings, conjuncts, guard: _YieldGuard):
    """Depth-first product of bindings, filtering at each bind level.

    ``bindings``: list of (alias, column->index map, rows). Every
    conjunct is applied at the first depth where all its aliases are
    bound, so the surviving combinations equal a full product followed
    by a filter. Returns (env list, lookup factory); each env maps
    alias -> row tuple.
    """
    bound: set[str] = set()
    conjuncts_at: list[list] = [[] for _ in bindings]
    depth_of_alias = {alias: i for i, (alias, _idx, _rows) in enumerate(bindings)}
    for conjunct in conjuncts:
        refs = sqlast.referenced_aliases(conjunct)
        unknown = refs - set(depth_of_alias)
        if unknown:
            raise ExecutionError(
                "predicate references unbound tables: " + ", ".join(sorted(unknown))
            )
        depth = max((depth_of_alias[a] for a in refs), default=0)
        conjuncts_at[depth].append(conjunct)

    index_maps = {alias: idx for alias, idx, _rows in bindings}

    def lookup_for(env):
        def lookup(a, c):
            try:
                return env[a][index_maps[a][c]]
            except KeyError:
                raise ExecutionError(f"unknown column {a}.{c}") from None
        return lookup

    out: list[dict] = []

    def recurse(depth: int, env: dict) -> None:
        if depth == len(bindings):
            guard.tick()
            out.append(dict(env))
            return
        alias, _idx, rows = bindings[depth]
        for row in rows:
            env[alias] = row
            if all(passes(c, lookup_for(env)) for c in conjuncts_at[depth]):
                recurse(depth + 1, env)
        env.pop(alias, None)

    recurse(0, {})
    return out, lookup_for


def _query_bindings(tables, q: QueryModel, aliases):
    bindings = []
    for alias in aliases:
        inst = q.instance(alias)
        idx = {col: i for i, col in enumerate(inst.columns)}
        rows = _base_rows(tables, q, alias, q.selections)
        bindings.append((alias, idx, rows))
    return bindings


def _query_conjuncts(q: QueryModel):
    conjuncts: list[Expr] = []
    for join in q.joins:
        conjuncts.append(Comparison("=", Column(*join.left), Column(*join.right)))
    for sel in q.selections:
        if len(sel.aliases) > 1:
            conjuncts.append(sel.expr)
    return conjuncts


def evaluate_reference(tables, q: QueryModel,
                       row_limit: int = ROW_LIMIT_DEFAULT) -> Counter:
    """Nested-loop evaluation in FROM order; the standing result oracle."""
    tables = _table_map(tables)
    guard = _YieldGuard(row_limit, "reference evaluation")
    bindings = _query_bindings(tables, q, q.aliases())
    envs, lookup_for = _run_nested(bindings, _query_conjuncts(q), guard)
    return Counter(project_rows(_output_exprs(q), envs, lookup_for))


def cartesian_filter_result(tables, q: QueryModel,
                            row_limit: int = 2_000_000) -> Counter:
    """Materialize the full product, then filter; tiny inputs only."""
    tables = _table_map(tables)
    col_of: dict[tuple[str, str], int] = {}
    row_lists = []
    for inst in q.instances:
        table = tables.get(inst.base_table)
        if table is None:
            raise ExecutionError(f"no loaded table named {inst.base_table!r}")
        idx = table.index()
        base = len(col_of)
        for i, col in enumerate(inst.columns):
            col_of[(inst.alias, col)] = base + i
        ordered = [idx[c] for c in inst.columns]
        row_lists.append([tuple(r[i] for i in ordered) for r in table.rows])

    total = 1
    for rows in row_lists:
        total *= max(len(rows), 1)
    if total > row_limit:
        raise RowLimitExceeded(f"full product has {total} rows, over {row_limit}")

    conjuncts: list[Expr] = [
        Comparison("=", Column(*j.left), Column(*j.right)) for j in q.joins
    ] + [s.expr for s in q.selections]

    survivors = []
    for combo in product(*row_lists):
        flat = tuple(v for row in combo for v in row)
        lookup = lambda a, c: flat[col_of[(a, c)]]
        if all(passes(conj, lookup) for conj in conjuncts):
            survivors.append(flat)
    return Counter(
        project_rows(
            _output_exprs(q),
            survivors,
            lambda env: (lambda a, c: env[col_of[(a, c)]]),
        )
    )


def reference_step_counts(tables, q: QueryModel, o: planner.JoinOrder,
                          row_limit: int = ROW_LIMIT_DEFAULT) -> list[int]:
    """Per-prefix cardinalities computed by plain nested loops.

    Independent check of the hash executor's step accounting: position
    k (0-based) holds the row count after the order's first k+2 tables
    are joined with every conjunct bound by then.
    """
    tables = _table_map(tables)
    conjuncts = _query_conjuncts(q)
    counts = []
    for k in range(2, len(o.sequence) + 1):
        prefix = list(o.sequence[:k])
        guard = _YieldGuard(row_limit, f"reference prefix {prefix}")
        bindings = _query_bindings(tables, q, prefix)
        scoped = [c for c in conjuncts if sqlast.referenced_aliases(c) <= set(prefix)]
        envs, _ = _run_nested(bindings, scoped, guard)
        counts.append(len(envs))
    return counts


# --- exhaustive optimal oracle ---


def optimal_order(tables, q: QueryModel, cartesian_allowed: bool = False,
                  bound: int = OPTIMAL_BOUND_DEFAULT,
                  row_limit: int = ROW_LIMIT_DEFAULT):
    """Cheapest left-deep order by exact dynamic programming.

    The cardinality of a joined prefix depends only on its vertex set,
    so the search space is subsets rather than permutations. Unless
    ``cartesian_allowed``, only connected subsets come into play. Ties
    on total cost resolve to the lexicographically smallest sequence.
    """
    tables = _table_map(tables)
    aliases = sorted(q.aliases())
    n = len(aliases)
    if n > bound:
        raise BoundExceeded(
            f"{n} tables exceeds the exhaustive-search bound of {bound}"
        )

    adjacency: dict[str, set[str]] = {a: set() for a in aliases}
    for join in q.joins:
        adjacency[join.left.alias].add(join.right.alias)
        adjacency[join.right.alias].add(join.left.alias)

    conjuncts = _query_conjuncts(q)
    index_of = {a: {c: i for i, c in enumerate(q.instance(a).columns)} for a in aliases}
    base_rows = {a: _base_rows(tables, q, a, q.selections) for a in aliases}

    def connected(subset: frozenset) -> bool:
        start = next(iter(subset))
        seen = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in adjacency[node] & subset:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen == subset

    def usable(subset: frozenset) -> bool:
        return cartesian_allowed or connected(subset)

    # Rows per subset, built by extending a one-smaller subset.
    rows_by: dict[frozenset, list[dict]] = {}
    cards: dict[frozenset, int] = {}
    subsets_by_size: dict[int, list[frozenset]] = {1: []}
    for a in aliases:
        s = frozenset((a,))
        rows_by[s] = [{a: row} for row in base_rows[a]]
        cards[s] = len(rows_by[s])
        subsets_by_size[1].append(s)

    def lookup_env(env):
        def lookup(al, col):
            return env[al][index_of[al][col]]
        return lookup

    for size in range(2, n + 1):
        subsets_by_size[size] = []
        seen_here = set()
        for smaller in subsets_by_size[size - 1]:
            for t in aliases:
                if t in smaller:
                    continue
                subset = smaller | {t}
                if subset in seen_here or not usable(subset):
                    continue
                seen_here.add(subset)
                ready = [
                    c for c in conjuncts
                    if t in sqlast.referenced_aliases(c)
                    and sqlast.referenced_aliases(c) <= subset
                ]
                extended = []
                for env in rows_by[smaller]:
                    for row in base_rows[t]:
                        env2 = dict(env)
                        env2[t] = row
                        if all(passes(c, lookup_env(env2)) for c in ready):
                            extended.append(env2)
                            if len(extended) > row_limit:
                                raise RowLimitExceeded(
                                    f"subset {sorted(subset)} exceeded {row_limit} rows"
                                )
                rows_by[subset] = extended
                cards[subset] = len(extended)
                subsets_by_size[size].append(subset)
        # Row sets two sizes down are no longer needed.
        for s in subsets_by_size.get(size - 2, []):
            rows_by.pop(s, None)

    full = frozenset(aliases)
    INF = float("inf")

    # remaining[S] = cheapest cost still to pay after the prefix set S.
    remaining: dict[frozenset, float] = {full: 0}
    for size in range(n - 1, 0, -1):
        for subset in subsets_by_size[size]:
            best = INF
            for t in aliases:
                if t in subset:
                    continue
                if not cartesian_allowed and not (adjacency[t] & subset):
                    continue
                grown = subset | {t}
                if grown not in cards or grown not in remaining:
                    continue
                value = cards[grown] + remaining[grown]
                if value < best:
                    best = value
            if best < INF:
                remaining[subset] = best

    starts = [a for a in aliases if frozenset((a,)) in remaining]
    if not starts:
        raise PlanError(
            "no Cartesian-free left-deep order exists for this query; "
            "rerun with cartesian_allowed"
        )
    best_total = min(remaining[frozenset((a,))] for a in starts)
    first = min(a for a in starts if remaining[frozenset((a,))] == best_total)

    sequence = [first]
    prefix = frozenset((first,))
    step_cards: list[int] = []
    while prefix != full:
        target = remaining[prefix]
        for t in aliases:  # sorted; first hit is the lexicographic winner
            if t in prefix:
                continue
            if not cartesian_allowed and not (adjacency[t] & prefix):
                continue
            grown = prefix | {t}
            if grown in cards and grown in remaining and \
                    cards[grown] + remaining[grown] == target:
                sequence.append(t)
                step_cards.append(cards[grown])
                prefix = grown
                break
        else:
            raise PlanError("internal error: optimal-order reconstruction got stuck")

    provenance = {}
    warnings = []
    placed: set[str] = set()
    for pos, alias in enumerate(sequence):
        if pos == 0:
            provenance[alias] = planner.SEED
        elif adjacency[alias] & placed:
            provenance[alias] = planner.INSERTED_ORPHAN
        else:
            provenance[alias] = planner.INSERTED_DISCONNECT
            warnings.append(
                f"no join connects {alias} to the tables ordered before it; "
                "this step is a Cartesian product"
            )
        placed.add(alias)

    order = planner.JoinOrder(
        sequence=tuple(sequence),
        partitions=(planner.Partition(sequence[0], tuple(sequence)),),
        provenance=provenance,
        warnings=tuple(warnings),
        algo="optimal",
    )
    return order, _make_cost_report(order, step_cards)


# --- evaluation of emitted SQL ---


def eval_select(stmt: SelectStatement, tables, row_limit: int = ROW_LIMIT_DEFAULT,
                context: str = "query"):
    """Evaluate a parsed statement (extended grammar) bottom-up.

    Returns (column names, list of row tuples). Derived tables recurse
    first; their select-item names become the visible columns.
    """
    tables = _table_map(tables)
    bindings = []
    conjuncts: list[Expr] = []

    def bind(item, on_condition=None):
        if isinstance(item, TableRef):
            table = tables.get(item.table)
            if table is None:
                raise ExecutionError(f"in {context}: no loaded table named {item.table!r}")
            idx = table.index()
            rows = list(table.rows)
        elif isinstance(item, DerivedRef):
            names, derived_rows = eval_select(
                stmt=item.select, tables=tables, row_limit=row_limit,
                context=f"derived table {item.alias}",
            )
            idx = {name: i for i, name in enumerate(names)}
            rows = derived_rows
        else:
            raise ExecutionError(f"in {context}: cannot bind {type(item).__name__}")
        if any(alias == item.alias for alias, _i, _r in bindings):
            raise ExecutionError(f"in {context}: duplicate alias {item.alias!r}")
        bindings.append((item.alias, idx, rows))
        bound = {alias for alias, _i, _r in bindings}
        if on_condition is not None:
            refs = sqlast.referenced_aliases(on_condition)
            if not refs <= bound:
                missing = ", ".join(sorted(refs - bound))
                raise ExecutionError(
                    f"in {context}: ON condition references tables not yet joined: {missing}"
                )
            conjuncts.extend(sqlast.flatten_conjuncts(on_condition))

    bind(stmt.first)
    for step in stmt.steps:
        bind(step.item, step.condition)
    if stmt.where is not None:
        conjuncts.extend(sqlast.flatten_conjuncts(stmt.where))

    guard = _YieldGuard(row_limit, f"evaluation of {context}")
    try:
        envs, lookup_for = _run_nested(bindings, conjuncts, guard)
    except ExecutionError as exc:
        raise ExecutionError(f"in {context}: {exc}") from exc

    names: list[str] = []
    exprs: list[Expr] = []
    for item in stmt.items:
        if isinstance(item.expr, Star):
            for alias, idx, _rows in bindings:
                for col in idx:
                    names.append(col)
                    exprs.append(Column(alias, col))
            continue
        if item.name:
            names.append(item.name)
        elif isinstance(item.expr, Column):
            names.append(item.expr.column)
        else:
            raise ExecutionError(
                f"in {context}: select item {item.text!r} needs an AS name"
            )
        exprs.append(item.expr)

    try:
        rows = project_rows(exprs, envs, lookup_for)
    except ExecutionError as exc:
        raise ExecutionError(f"in {context}: {exc}") from exc
    return names, rows


def check_equivalence(tables, q: QueryModel, rewritten: RewrittenQuery,
                      reference: Counter | None = None,
                      row_limit: int = ROW_LIMIT_DEFAULT) -> bool:
    """True iff the emitted SQL returns the query's reference multiset."""
    tables = _table_map(tables)
    if reference is None:
        reference = evaluate_reference(tables, q, row_limit)
    stmt = parse_select(rewritten.sql, extended=True)
    _names, rows = eval_select(stmt, tables, row_limit, context=f"{rewritten.mode} form")
    return Counter(rows) == reference


# --- side-by-side harness for the CLI ---


def compare_orders(tables, q: QueryModel, g, bound: int = OPTIMAL_BOUND_DEFAULT,
                   row_limit: int = ROW_LIMIT_DEFAULT) -> list[dict]:
    """Cost and equivalence summary for each planning algorithm.

    Returns one dict per algorithm with keys: algorithm, sequence,
    analytical_cost, step_cardinalities, equivalent_subquery,
    equivalent_leftdeep, warnings, error, skipped. Executor aborts are
    recorded in the row instead of raising.
    """
    from .rewriter import rewrite_leftdeep, rewrite_subquery

    tables = _table_map(tables)
    reference = evaluate_reference(tables, q, row_limit)

    candidates = [
        ("split", lambda: planner.split_order(g)),
        ("size-asc", lambda: planner.size_order(g, "ascending")),
        ("size-desc", lambda: planner.size_order(g, "descending")),
        ("optimal", lambda: optimal_order(tables, q, bound=bound, row_limit=row_limit)),
    ]

    rows = []
    for label, make in candidates:
        row = {
            "algorithm": label,
            "sequence": None,
            "analytical_cost": None,
            "step_cardinalities": None,
            "equivalent_subquery": None,
            "equivalent_leftdeep": None,
            "warnings": [],
            "error": None,
            "skipped": False,
        }
        try:
            made = make()
        except (BoundExceeded, PlanError) as exc:
            row["skipped"] = True
            row["error"] = str(exc)
            rows.append(row)
            continue
        if label == "optimal":
            order, report = made
        else:
            order = made
            report = None
        row["sequence"] = list(order.sequence)
        row["warnings"] = list(order.warnings)
        try:
            if report is None:
                _result, report = execute_order(tables, q, order, row_limit)
            row["analytical_cost"] = report.analytical_cost
            row["step_cardinalities"] = list(report.step_cardinalities)
            for mode, fn in (("subquery", rewrite_subquery), ("leftdeep", rewrite_leftdeep)):
                rewritten = fn(q, order)
                row[f"equivalent_{mode}"] = check_equivalence(
                    tables, q, rewritten, reference=reference, row_limit=row_limit
                )
        except ExecutionError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows
