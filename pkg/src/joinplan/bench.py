"""Timing harness against a live database and catalog extraction.

``run_bench`` executes each query in several forms (original text,
subquery rewrite, flat left-deep rewrite, size-descending baseline) on
one connection, strictly sequentially, and reports the median wall
clock of the execution itself over a configurable number of runs.
Planning and rewriting are timed separately so the reported query time
matches what the engine did, not what this package did. Row counts are
compared across forms; a mismatch is a correctness warning, never
silently ignored.

``extract_catalog`` builds a catalog file from a database's own
metadata: per-table COUNT(*), primary key and unique constraints, and
declared foreign keys.
"""

from __future__ import annotations

import os
import statistics
import time
from dataclasses import dataclass, field

import sqlalchemy
from sqlalchemy import text

from .catalog import Catalog, ForeignKeyDef, TableDef
from .errors import BenchError, CatalogError
from .planner import size_order, split_order
from .rewriter import GENERIC, POSTGRES_COMPATIBLE, rewrite_leftdeep, rewrite_subquery
from .sqlfront import build_join_graph, parse_query

MODES = ("original", "subquery", "leftdeep", "size-desc")
DB_URL_VAR = "DB_URL"


@dataclass(frozen=True)
class BenchConfig:
    url: str
    runs: int = 5
    modes: tuple[str, ...] = ("original", "subquery")
    timeout: float | None = None  # seconds, enforced where the engine allows

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise BenchError("runs must be >= 1")
        if not self.modes:
            raise BenchError("at least one mode is required")
        unknown = set(self.modes) - set(MODES)
        if unknown:
            raise BenchError(
                f"unknown mode {sorted(unknown)[0]!r}; choose from {', '.join(MODES)}"
            )


def resolve_url(flag_value: str | None) -> str:
    url = flag_value or os.environ.get(DB_URL_VAR)
    if not url:
        raise BenchError(
            f"no database URL: pass --url or set the {DB_URL_VAR} environment variable"
        )
    return url


@dataclass
class BenchRow:
    query: str
    mode: str
    times_ms: list[float] = field(default_factory=list)
    timeouts: int = 0
    rows: int | None = None
    plan_ms: float | None = None
    error: str | None = None

    @property
    def median_ms(self) -> float | None:
        if len(self.times_ms) < 1:
            return None
        return statistics.median(self.times_ms)


@dataclass
class BenchReport:
    rows: list[BenchRow]
    warnings: list[str]

    _COLUMNS = ("query", "mode", "median_ms", "rows", "timeouts", "plan_ms", "runs_ms", "error")

    def to_tsv(self) -> str:
        lines = ["\t".join(self._COLUMNS)]
        for row in self.rows:
            lines.append("\t".join([
                row.query,
                row.mode,
                "" if row.median_ms is None else f"{row.median_ms:.3f}",
                "" if row.rows is None else str(row.rows),
                str(row.timeouts),
                "" if row.plan_ms is None else f"{row.plan_ms:.3f}",
                ",".join(f"{t:.3f}" for t in row.times_ms),
                row.error or "",
            ]))
        for warning in self.warnings:
            lines.append(f"# warning: {warning}")
        return "\n".join(lines) + "\n"


def _prepare(cat: Catalog, sql: str, mode: str, target: str):
    """Rewrite one query for a mode; returns (prologue, sql, plan_seconds)."""
    if mode == "original":
        return [], sql, 0.0
    started = time.perf_counter()
    q = parse_query(sql, cat)
    g = build_join_graph(q, cat)
    if mode == "size-desc":
        rewritten = rewrite_leftdeep(q, size_order(g, "descending"), target)
    elif mode == "leftdeep":
        rewritten = rewrite_leftdeep(q, split_order(g), target)
    elif mode == "subquery":
        rewritten = rewrite_subquery(q, split_order(g), target)
    else:
        raise BenchError(f"unknown mode {mode!r}")
    return list(rewritten.prologue), rewritten.sql, time.perf_counter() - started


def _is_timeout(exc: Exception) -> bool:
    message = str(exc).lower()
    return "timeout" in message or "canceling statement" in message


def run_bench(config: BenchConfig, cat: Catalog, queries: dict[str, str]) -> BenchReport:
    """Execute every query in every configured mode, runs times each."""
    try:
        engine = sqlalchemy.create_engine(config.url)
        connection = engine.connect()
    except Exception as exc:
        raise BenchError(f"cannot connect to {config.url}: {exc}") from exc

    is_postgres = engine.dialect.name == "postgresql"
    target = POSTGRES_COMPATIBLE if is_postgres else GENERIC
    report = BenchReport(rows=[], warnings=[])
    if not is_postgres:
        report.warnings.append(
            f"dialect {engine.dialect.name!r} has no order-pinning settings; "
            "rewritten forms run without a prologue"
        )

    with connection:
        if config.timeout is not None and is_postgres:
            connection.execute(text(f"SET statement_timeout = {int(config.timeout * 1000)}"))
        for name in sorted(queries):
            counts: dict[str, int] = {}
            for mode in config.modes:
                row = BenchRow(query=name, mode=mode)
                report.rows.append(row)
                try:
                    prologue, sql, plan_s = _prepare(cat, queries[name], mode, target)
                except Exception as exc:
                    row.error = str(exc)
                    continue
                row.plan_ms = plan_s * 1000
                try:
                    for stmt in prologue:
                        connection.execute(text(stmt))
                    if prologue and is_postgres:
                        _verify_settings(connection, report)
                    for _ in range(config.runs):
                        started = time.perf_counter()
                        rows = connection.execute(text(sql)).fetchall()
                        elapsed = (time.perf_counter() - started) * 1000
                        row.times_ms.append(elapsed)
                        row.rows = len(rows)
                except Exception as exc:
                    if _is_timeout(exc):
                        row.timeouts += 1
                        report.warnings.append(f"{name}/{mode}: timed out")
                    else:
                        row.error = str(exc)
                    connection.rollback()
                    continue
                if row.rows is not None:
                    counts[mode] = row.rows
            distinct = set(counts.values())
            if len(distinct) > 1:
                detail = ", ".join(f"{m}={c}" for m, c in sorted(counts.items()))
                report.warnings.append(
                    f"{name}: row counts differ across modes ({detail}); "
                    "results are NOT equivalent"
                )
    return report


def _verify_settings(connection, report: BenchReport) -> None:
    for setting in ("from_collapse_limit", "join_collapse_limit"):
        value = connection.execute(text(f"SHOW {setting}")).scalar()
        if str(value) != "1":
            report.warnings.append(
                f"{setting} is {value!r} after the prologue; the engine may reorder joins"
            )


def extract_catalog(url: str) -> tuple[Catalog, list[str]]:
    """Read table metadata and row counts from a live database.

    Unique keys come from primary-key and unique constraints; foreign
    keys from the schema's declarations. Returns the catalog plus any
    warnings (no foreign keys at all, or constraints that had to be
    skipped because they do not target a declared unique key).
    """
    try:
        engine = sqlalchemy.create_engine(url)
        inspector = sqlalchemy.inspect(engine)
        table_names = inspector.get_table_names()
    except Exception as exc:
        raise BenchError(f"cannot inspect {url}: {exc}") from exc

    warnings: list[str] = []
    defs = []
    raw_fks = []
    with engine.connect() as connection:
        for name in sorted(table_names):
            columns = tuple(col["name"] for col in inspector.get_columns(name))
            keys: set[tuple[str, ...]] = set()
            pk = inspector.get_pk_constraint(name)
            if pk and pk.get("constrained_columns"):
                keys.add(tuple(pk["constrained_columns"]))
            for uc in inspector.get_unique_constraints(name):
                if uc.get("column_names"):
                    keys.add(tuple(uc["column_names"]))
            count = connection.execute(
                text(f'SELECT COUNT(*) FROM "{name}"')
            ).scalar()
            defs.append(TableDef(name, int(count), columns, frozenset(keys)))
            for fk in inspector.get_foreign_keys(name):
                raw_fks.append(ForeignKeyDef(
                    from_table=name,
                    from_columns=tuple(fk["constrained_columns"]),
                    to_table=fk["referred_table"],
                    to_columns=tuple(fk["referred_columns"]),
                ))

    tables = {t.name: t for t in defs}
    kept = []
    for fk in raw_fks:
        try:
            Catalog(tables=tables, foreign_keys=(fk,))
        except CatalogError as exc:
            warnings.append(f"skipped foreign key {fk.describe()}: {exc}")
            continue
        kept.append(fk)
    if not kept:
        warnings.append(
            "no usable foreign keys declared; every join will be classified "
            "many-to-many, which weakens the ordering"
        )
    return Catalog(tables=tables, foreign_keys=tuple(kept)), warnings
