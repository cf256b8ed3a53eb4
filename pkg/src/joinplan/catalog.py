"""Schema catalog: the only planning input besides the query itself.

A catalog holds table names, row counts, column lists, unique keys, and
foreign-key constraints. Nothing else is stored on purpose: the planner
must work from sizes and key constraints alone, so there is no room
here for histograms, distinct counts, or any other statistic.

File format (JSON, strict):

    {
      "tables": [
        {"name": ..., "row_count": ..., "columns": [...],
         "unique_keys": [[col, ...], ...]},
        ...
      ],
      "foreign_keys": [
        {"from_table": ..., "from_columns": [...],
         "to_table": ..., "to_columns": [...]},
        ...
      ]
    }

Unknown fields are rejected so that typos (e.g. ``rowcount``) fail loudly
instead of silently dropping the one numeric signal the planner has.
Row counts are stored in the file rather than fetched live; the
``extract-catalog`` CLI subcommand refreshes them from a database.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import CatalogError


@dataclass(frozen=True)
class TableDef:
    """One base table: identity, size, and key structure."""

    name: str
    row_count: int
    columns: tuple[str, ...]
    unique_keys: frozenset[tuple[str, ...]] = frozenset()

    def __post_init__(self):
        if not self.columns:
            raise CatalogError(f"table {self.name}: column list is empty")
        if len(set(self.columns)) != len(self.columns):
            raise CatalogError(f"table {self.name}: duplicate column name")
        if self.row_count < 0:
            raise CatalogError(f"table {self.name}: negative row_count")
        for key in self.unique_keys:
            for col in key:
                if col not in self.columns:
                    raise CatalogError(
                        f"table {self.name}: unique key column {col!r} is not a declared column"
                    )


@dataclass(frozen=True)
class ForeignKeyDef:
    """Foreign key: from_columns reference a declared unique key of to_table."""

    from_table: str
    from_columns: tuple[str, ...]
    to_table: str
    to_columns: tuple[str, ...]

    def describe(self) -> str:
        return (
            f"{self.from_table}({', '.join(self.from_columns)}) -> "
            f"{self.to_table}({', '.join(self.to_columns)})"
        )


@dataclass(frozen=True)
class Catalog:
    tables: dict[str, TableDef]
    foreign_keys: tuple[ForeignKeyDef, ...] = ()

    def __post_init__(self):
        for fk in self.foreign_keys:
            self._check_fk(fk)

    def _check_fk(self, fk: ForeignKeyDef) -> None:
        for side, table, cols in (
            ("from", fk.from_table, fk.from_columns),
            ("to", fk.to_table, fk.to_columns),
        ):
            if table not in self.tables:
                raise CatalogError(f"foreign key {fk.describe()}: unknown {side}-table {table!r}")
            for col in cols:
                if col not in self.tables[table].columns:
                    raise CatalogError(
                        f"foreign key {fk.describe()}: unknown column {table}.{col}"
                    )
        if len(fk.from_columns) != len(fk.to_columns):
            raise CatalogError(f"foreign key {fk.describe()}: column-list lengths differ")
        if fk.to_columns not in self.tables[fk.to_table].unique_keys:
            raise CatalogError(
                f"foreign key {fk.describe()}: referenced columns are not a declared "
                f"unique key of {fk.to_table}"
            )

    @classmethod
    def build(cls, tables, foreign_keys=()) -> "Catalog":
        by_name: dict[str, TableDef] = {}
        for tdef in tables:
            if tdef.name in by_name:
                raise CatalogError(f"duplicate table name {tdef.name!r}")
            by_name[tdef.name] = tdef
        return cls(tables=by_name, foreign_keys=tuple(foreign_keys))

    def table(self, name: str) -> TableDef:
        try:
            return self.tables[name]
        except KeyError:
            raise CatalogError(f"unknown table {name!r}") from None

    def to_dict(self) -> dict:
        return {
            "tables": [
                {
                    "name": t.name,
                    "row_count": t.row_count,
                    "columns": list(t.columns),
                    "unique_keys": sorted([list(k) for k in t.unique_keys]),
                }
                for t in sorted(self.tables.values(), key=lambda t: t.name)
            ],
            "foreign_keys": [
                {
                    "from_table": fk.from_table,
                    "from_columns": list(fk.from_columns),
                    "to_table": fk.to_table,
                    "to_columns": list(fk.to_columns),
                }
                for fk in self.foreign_keys
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


_TABLE_FIELDS = {"name", "row_count", "columns", "unique_keys"}
_FK_FIELDS = {"from_table", "from_columns", "to_table", "to_columns"}


def _require_fields(obj: dict, allowed: set[str], context: str) -> None:
    if not isinstance(obj, dict):
        raise CatalogError(f"{context}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise CatalogError(f"{context}: unknown field {sorted(unknown)[0]!r}")
    missing = allowed - set(obj)
    if missing:
        raise CatalogError(f"{context}: missing field {sorted(missing)[0]!r}")


def catalog_from_dict(doc: dict) -> Catalog:
    _require_fields(doc, {"tables", "foreign_keys"}, "catalog")
    tables: dict[str, TableDef] = {}
    for raw in doc["tables"]:
        context = f"table {raw.get('name', '?')!r}" if isinstance(raw, dict) else "table entry"
        _require_fields(raw, _TABLE_FIELDS, context)
        if not isinstance(raw["row_count"], int):
            raise CatalogError(f"{context}: row_count must be an integer")
        table = TableDef(
            name=raw["name"],
            row_count=raw["row_count"],
            columns=tuple(raw["columns"]),
            unique_keys=frozenset(tuple(k) for k in raw["unique_keys"]),
        )
        if table.name in tables:
            raise CatalogError(f"duplicate table name {table.name!r}")
        tables[table.name] = table
    fks = []
    for raw in doc["foreign_keys"]:
        _require_fields(raw, _FK_FIELDS, "foreign key entry")
        fks.append(
            ForeignKeyDef(
                from_table=raw["from_table"],
                from_columns=tuple(raw["from_columns"]),
                to_table=raw["to_table"],
                to_columns=tuple(raw["to_columns"]),
            )
        )
    return Catalog(tables=tables, foreign_keys=tuple(fks))


def load_catalog(path: str | Path) -> Catalog:
    """Load and validate a catalog file.

    Raises CatalogError for malformed JSON, unknown/missing fields,
    duplicate tables, or foreign keys that do not resolve.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CatalogError(f"cannot read catalog file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog file {path} is not valid JSON: {exc}") from exc
    return catalog_from_dict(doc)


def is_key_column(cat: Catalog, table: str, column: str) -> bool:
    """True iff the column alone is a unique key of the table.

    A column that is merely part of a multi-column key does not count:
    join values on it need not be unique, so treating it as a key side
    would overstate what a one-to-many join guarantees.
    """
    tdef = cat.table(table)
    if column not in tdef.columns:
        raise CatalogError(f"unknown column {table}.{column}")
    return (column,) in tdef.unique_keys
