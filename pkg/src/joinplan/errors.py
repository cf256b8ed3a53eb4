"""Exception hierarchy shared by all joinplan modules.

The CLI maps these onto exit codes: input problems (catalog, query,
rewrite) exit 2, environment problems (database connectivity) exit 3.
"""

from __future__ import annotations


class JoinPlanError(Exception):
    """Base class for all errors raised by this package."""


class CatalogError(JoinPlanError):
    """Malformed or inconsistent schema catalog."""


class QueryError(JoinPlanError):
    """SQL that cannot be parsed or validated against the catalog.

    ``offset`` is the character offset into the query text where the
    problem was detected, or None when the error is not positional.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"at offset {offset}: {message}"
        super().__init__(message)
        self.offset = offset


class PlanError(JoinPlanError):
    """Invalid planner input, e.g. an order that is not a permutation."""


class RewriteError(JoinPlanError):
    """Order/query mismatch or rename clash during query rewriting."""


class ExecutionError(JoinPlanError):
    """Failure while evaluating a query over in-memory tables."""


class RowLimitExceeded(ExecutionError):
    """An intermediate join result grew past the configured row ceiling."""


class BoundExceeded(JoinPlanError):
    """Instance too large for exhaustive order enumeration."""


class BenchError(JoinPlanError):
    """Database connection or execution failure in the benchmark runner."""
