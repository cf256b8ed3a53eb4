"""Statistics-free join ordering toolkit.

Plans join orders from table sizes and key constraints alone, rewrites
queries so an engine executes the chosen order, and checks the results
against exact small-scale execution.
"""

from .catalog import Catalog, ForeignKeyDef, TableDef, is_key_column, load_catalog
from .costlab import (
    CostReport,
    MiniTable,
    check_equivalence,
    compare_orders,
    evaluate_reference,
    execute_order,
    load_dataset,
    optimal_order,
    write_dataset,
)
from .datagen import Instance, generate_corpus, generate_instance
from .errors import (
    BenchError,
    BoundExceeded,
    CatalogError,
    ExecutionError,
    JoinPlanError,
    PlanError,
    QueryError,
    RewriteError,
    RowLimitExceeded,
)
from .planner import JoinOrder, Partition, size_order, split_order, validate_order
from .rewriter import (
    RewrittenQuery,
    render_settings,
    rewrite_leftdeep,
    rewrite_subquery,
)
from .sqlfront import JoinGraph, QueryModel, build_join_graph, parse_query

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "ForeignKeyDef",
    "TableDef",
    "is_key_column",
    "load_catalog",
    "CostReport",
    "MiniTable",
    "check_equivalence",
    "compare_orders",
    "evaluate_reference",
    "execute_order",
    "load_dataset",
    "optimal_order",
    "write_dataset",
    "Instance",
    "generate_corpus",
    "generate_instance",
    "BenchError",
    "BoundExceeded",
    "CatalogError",
    "ExecutionError",
    "JoinPlanError",
    "PlanError",
    "QueryError",
    "RewriteError",
    "RowLimitExceeded",
    "JoinOrder",
    "Partition",
    "size_order",
    "split_order",
    "validate_order",
    "RewrittenQuery",
    "render_settings",
    "rewrite_leftdeep",
    "rewrite_subquery",
    "JoinGraph",
    "QueryModel",
    "build_join_graph",
    "parse_query",
]
