"""Syntax tree for the supported SQL subset.

Expression nodes are immutable and hashable so they can sit inside
frozen query-model dataclasses. Rendering accepts an optional column
resolver so the rewriter can substitute renamed references without
touching the tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Union


class ColumnRef(NamedTuple):
    alias: str
    column: str


Resolver = Callable[[str, str], str]


def _default_resolver(alias: str, column: str) -> str:
    return f"{alias}.{column}"


def render_value(value) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return repr(value)


@dataclass(frozen=True)
class Column:
    alias: str
    column: str

    def render(self, resolve: Resolver = _default_resolver) -> str:
        return resolve(self.alias, self.column)


@dataclass(frozen=True)
class Literal:
    value: Union[int, float, str, None]

    def render(self, resolve: Resolver = _default_resolver) -> str:
        return render_value(self.value)


@dataclass(frozen=True)
class Comparison:
    op: str  # one of = <> < <= > >=
    left: Union[Column, Literal]
    right: Union[Column, Literal]

    def render(self, resolve: Resolver = _default_resolver) -> str:
        return f"{self.left.render(resolve)} {self.op} {self.right.render(resolve)}"


@dataclass(frozen=True)
class InList:
    operand: Union[Column, Literal]
    items: tuple
    negated: bool = False

    def render(self, resolve: Resolver = _default_resolver) -> str:
        body = ", ".join(render_value(v) for v in self.items)
        word = "NOT IN" if self.negated else "IN"
        return f"{self.operand.render(resolve)} {word} ({body})"


@dataclass(frozen=True)
class Between:
    operand: Union[Column, Literal]
    low: Union[Column, Literal]
    high: Union[Column, Literal]
    negated: bool = False

    def render(self, resolve: Resolver = _default_resolver) -> str:
        word = "NOT BETWEEN" if self.negated else "BETWEEN"
        return (
            f"{self.operand.render(resolve)} {word} "
            f"{self.low.render(resolve)} AND {self.high.render(resolve)}"
        )


@dataclass(frozen=True)
class Like:
    operand: Union[Column, Literal]
    pattern: str
    negated: bool = False

    def render(self, resolve: Resolver = _default_resolver) -> str:
        word = "NOT LIKE" if self.negated else "LIKE"
        return f"{self.operand.render(resolve)} {word} {render_value(self.pattern)}"


@dataclass(frozen=True)
class IsNull:
    operand: Union[Column, Literal]
    negated: bool = False

    def render(self, resolve: Resolver = _default_resolver) -> str:
        word = "IS NOT NULL" if self.negated else "IS NULL"
        return f"{self.operand.render(resolve)} {word}"


@dataclass(frozen=True)
class And:
    items: tuple

    def render(self, resolve: Resolver = _default_resolver) -> str:
        return "(" + " AND ".join(i.render(resolve) for i in self.items) + ")"


@dataclass(frozen=True)
class Or:
    items: tuple

    def render(self, resolve: Resolver = _default_resolver) -> str:
        return "(" + " OR ".join(i.render(resolve) for i in self.items) + ")"


@dataclass(frozen=True)
class Not:
    item: object

    def render(self, resolve: Resolver = _default_resolver) -> str:
        return f"NOT {self.item.render(resolve)}"


@dataclass(frozen=True)
class Star:
    """Bare ``*`` in a SELECT list."""

    def render(self, resolve: Resolver = _default_resolver) -> str:
        return "*"


@dataclass(frozen=True)
class FuncCall:
    """Aggregate call such as MIN(t.title) or COUNT(*)."""

    name: str
    args: tuple = ()
    star: bool = False

    def render(self, resolve: Resolver = _default_resolver) -> str:
        if self.star:
            return f"{self.name}(*)"
        return f"{self.name}(" + ", ".join(a.render(resolve) for a in self.args) + ")"


Expr = Union[
    Column, Literal, Comparison, InList, Between, Like, IsNull, And, Or, Not, Star, FuncCall
]


def referenced_columns(expr: Expr) -> set[ColumnRef]:
    """All (alias, column) pairs mentioned by the expression. Star yields none."""
    out: set[ColumnRef] = set()
    _walk_columns(expr, out)
    return out


def _walk_columns(expr: Expr, out: set[ColumnRef]) -> None:
    if isinstance(expr, Column):
        out.add(ColumnRef(expr.alias, expr.column))
    elif isinstance(expr, Comparison):
        _walk_columns(expr.left, out)
        _walk_columns(expr.right, out)
    elif isinstance(expr, (InList, Like, IsNull)):
        _walk_columns(expr.operand, out)
    elif isinstance(expr, Between):
        _walk_columns(expr.operand, out)
        _walk_columns(expr.low, out)
        _walk_columns(expr.high, out)
    elif isinstance(expr, (And, Or)):
        for item in expr.items:
            _walk_columns(item, out)
    elif isinstance(expr, Not):
        _walk_columns(expr.item, out)
    elif isinstance(expr, FuncCall):
        for arg in expr.args:
            _walk_columns(arg, out)


def referenced_aliases(expr: Expr) -> set[str]:
    return {ref.alias for ref in referenced_columns(expr)}


def flatten_conjuncts(expr: Expr) -> list[Expr]:
    """Split a WHERE tree into top-level AND conjuncts (nested ANDs included)."""
    if isinstance(expr, And):
        out: list[Expr] = []
        for item in expr.items:
            out.extend(flatten_conjuncts(item))
        return out
    return [expr]


def is_aggregate(expr: Expr) -> bool:
    return isinstance(expr, FuncCall)


# --- statement nodes (parser output) ---


@dataclass(frozen=True)
class TableRef:
    table: str
    alias: str


@dataclass(frozen=True)
class DerivedRef:
    """Subquery in FROM: ``(SELECT ...) AS alias``."""

    select: "SelectStatement"
    alias: str


@dataclass(frozen=True)
class FromStep:
    """One FROM-list entry after the first: comma, JOIN..ON, or CROSS JOIN."""

    kind: str  # "comma" | "join" | "cross"
    item: Union[TableRef, DerivedRef]
    condition: Expr | None = None  # only for kind == "join"


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    name: str | None
    text: str  # verbatim source slice of the expression, without AS clause


@dataclass(frozen=True)
class SelectStatement:
    items: tuple[SelectItem, ...]
    first: Union[TableRef, DerivedRef]
    steps: tuple[FromStep, ...]
    where: Expr | None

    def from_items(self) -> list[Union[TableRef, DerivedRef]]:
        return [self.first] + [s.item for s in self.steps]
