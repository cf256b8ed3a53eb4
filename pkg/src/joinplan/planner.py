"""Join order construction from table sizes and join types.

``split_order`` is the statistics-free planner: it groups the join graph
around the tables that participate in many-to-many joins, orders those
groups small to large, and fills in one-to-many neighbors by size. The
only inputs read are the graph shape, the join classification, and the
base table row counts. ``size_order`` provides the sort-by-size
baselines, and ``validate_order`` checks any sequence for Cartesian
steps.

Provenance tags per vertex:

* ``fk_head``: starts a group, participates in a many-to-many join.
* ``fk_candidate``: one-to-many neighbor appended right after its head.
* ``inserted_orphan``: spliced after its leftmost placed neighbor.
* ``inserted_disconnect``: appended with no join to the prefix (a
  Cartesian step; always paired with a warning).
* ``seed``: first vertex when no many-to-many joins exist.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import PlanError

FK_HEAD = "fk_head"
FK_CANDIDATE = "fk_candidate"
INSERTED_DISCONNECT = "inserted_disconnect"
INSERTED_ORPHAN = "inserted_orphan"
SEED = "seed"

ALGO_SPLIT = "split"
ALGO_SIZE_ASC = "size-asc"
ALGO_SIZE_DESC = "size-desc"


@dataclass(frozen=True)
class Partition:
    """Contiguous segment of the sequence: a head plus its followers."""

    head: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class JoinOrder:
    sequence: tuple[str, ...]
    partitions: tuple[Partition, ...]
    provenance: dict[str, str]
    warnings: tuple[str, ...] = ()
    algo: str = ALGO_SPLIT

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algo,
            "sequence": list(self.sequence),
            "partitions": [
                {"head": p.head, "members": list(p.members)} for p in self.partitions
            ],
            "provenance": dict(self.provenance),
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def report(self) -> str:
        lines = [f"algorithm: {self.algo}"]
        lines.append("sequence: " + " ".join(self.sequence))
        lines.append("partitions:")
        for i, part in enumerate(self.partitions, start=1):
            lines.append(f"  {i}: " + " ".join(part.members))
        lines.append("provenance:")
        for alias in self.sequence:
            lines.append(f"  {alias}: {self.provenance[alias]}")
        if self.warnings:
            lines.append("warnings:")
            for w in self.warnings:
                lines.append(f"  - {w}")
        return "\n".join(lines)


class _OrderBuilder:
    """Sequence plus a parallel partition id per position.

    Partitions stay contiguous because splices land inside the segment
    of the element they follow, so grouping by id at the end both yields
    the member lists and guarantees their concatenation is the sequence.
    """

    def __init__(self, algo: str) -> None:
        self.algo = algo
        self.seq: list[str] = []
        self.pids: list[int] = []
        self.provenance: dict[str, str] = {}
        self.warnings: list[str] = []
        self._next_pid = 0
        self._anchored: dict[str, int] = {}

    def placed(self, alias: str) -> bool:
        return alias in self.provenance

    def append(self, alias: str, tag: str, new_partition: bool) -> None:
        if new_partition or not self.seq:
            pid = self._next_pid
            self._next_pid += 1
        else:
            pid = self.pids[-1]
        self.seq.append(alias)
        self.pids.append(pid)
        self.provenance[alias] = tag

    def insert_after(self, alias: str, anchor: str, tag: str) -> None:
        # Repeated splices behind one anchor stack in insertion order.
        idx = self.seq.index(anchor) + 1 + self._anchored.get(anchor, 0)
        self._anchored[anchor] = self._anchored.get(anchor, 0) + 1
        self.seq.insert(idx, alias)
        self.pids.insert(idx, self.pids[idx - 1])
        self.provenance[alias] = tag

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    def finish(self) -> JoinOrder:
        partitions = []
        members: list[str] = []
        for pos, alias in enumerate(self.seq):
            if members and self.pids[pos] != self.pids[pos - 1]:
                partitions.append(Partition(members[0], tuple(members)))
                members = []
            members.append(alias)
        if members:
            partitions.append(Partition(members[0], tuple(members)))
        return JoinOrder(
            sequence=tuple(self.seq),
            partitions=tuple(partitions),
            provenance=self.provenance,
            warnings=tuple(self.warnings),
            algo=self.algo,
        )


def _smallest(aliases, sizes: dict[str, int]) -> str | None:
    pool = list(aliases)
    if not pool:
        return None
    return min(pool, key=lambda a: (sizes[a], a))


def _leftmost_neighbor(seq: list[str], neighbors) -> str:
    placed = set(seq) & set(neighbors)
    return min(placed, key=seq.index)


def split_order(g) -> JoinOrder:
    """Order the graph so many-to-many joins run between reduced inputs.

    Tables touching a many-to-many edge become group heads, visited
    small to large with each head's not-yet-placed one-to-many neighbors
    appended behind it in size order. Tables left over (one-to-many
    only) are spliced, smallest first, right after the leftmost placed
    table they join. A head reachable only through unplaced tables
    triggers the same splice rule early to bridge the gap. When nothing
    unplaced joins the prefix at all, the smallest leftover is appended
    at the end and a Cartesian warning is recorded.
    """
    sizes = dict(g.sizes)
    adjacency = {a: frozenset(n) for a, n in g.adjacency.items()}
    nm_aliases = frozenset(g.nm_aliases)
    if not sizes:
        raise PlanError("cannot order an empty join graph")

    builder = _OrderBuilder(ALGO_SPLIT)
    candidates_of = {f: adjacency[f] for f in nm_aliases}

    if not nm_aliases:
        builder.append(_smallest(sizes, sizes), SEED, new_partition=True)

    while any(not builder.placed(f) for f in nm_aliases):
        placed_set = set(builder.seq)
        pool = [f for f in nm_aliases if f not in placed_set]
        if builder.seq:
            joined = [f for f in pool if adjacency[f] & placed_set]
        else:
            joined = pool
        head = _smallest(joined, sizes)
        if head is None:
            _splice_or_append(builder, sizes, adjacency)
            continue
        builder.append(head, FK_HEAD, new_partition=True)
        placed_set.add(head)
        followers = [
            c for c in candidates_of[head]
            if c not in nm_aliases and c not in placed_set
        ]
        followers.sort(key=lambda a: (sizes[a], a))
        for follower in followers:
            builder.append(follower, FK_CANDIDATE, new_partition=False)

    while len(builder.seq) < len(sizes):
        _splice_or_append(builder, sizes, adjacency)

    return builder.finish()


def _splice_or_append(builder: _OrderBuilder, sizes, adjacency) -> None:
    placed_set = set(builder.seq)
    pool = [a for a in sizes if a not in placed_set]
    joined = [a for a in pool if adjacency[a] & placed_set]
    alias = _smallest(joined, sizes)
    if alias is not None:
        anchor = _leftmost_neighbor(builder.seq, adjacency[alias])
        builder.insert_after(alias, anchor, INSERTED_ORPHAN)
        return
    alias = _smallest(pool, sizes)
    builder.append(alias, INSERTED_DISCONNECT, new_partition=False)
    builder.warn(
        f"no join connects {alias} to the tables ordered before it; "
        "this step is a Cartesian product"
    )


def size_order(g, direction: str = "descending", avoid_cartesian: bool = False) -> JoinOrder:
    """Single-partition baseline: sort the tables by size.

    With ``avoid_cartesian`` the sort turns greedy: each step takes the
    extreme-size table adjacent to the prefix, falling back to a flagged
    Cartesian append when the graph runs out of adjacent tables.
    """
    if direction not in ("ascending", "descending"):
        raise PlanError(f"unknown direction {direction!r}")
    sizes = dict(g.sizes)
    adjacency = {a: frozenset(n) for a, n in g.adjacency.items()}
    if not sizes:
        raise PlanError("cannot order an empty join graph")
    sign = 1 if direction == "ascending" else -1
    key = lambda a: (sign * sizes[a], a)
    algo = ALGO_SIZE_ASC if direction == "ascending" else ALGO_SIZE_DESC

    builder = _OrderBuilder(algo)
    if not avoid_cartesian:
        ordered = sorted(sizes, key=key)
        for pos, alias in enumerate(ordered):
            tag = SEED if pos == 0 else _prefix_tag(builder, alias, adjacency)
            builder.append(alias, tag, new_partition=False)
        return builder.finish()

    while len(builder.seq) < len(sizes):
        placed_set = set(builder.seq)
        pool = [a for a in sizes if a not in placed_set]
        if not builder.seq:
            builder.append(min(pool, key=key), SEED, new_partition=False)
            continue
        joined = [a for a in pool if adjacency[a] & placed_set]
        if joined:
            builder.append(min(joined, key=key), INSERTED_ORPHAN, new_partition=False)
        else:
            alias = min(pool, key=key)
            builder.append(alias, INSERTED_DISCONNECT, new_partition=False)
            builder.warn(
                f"no join connects {alias} to the tables ordered before it; "
                "this step is a Cartesian product"
            )
    return builder.finish()


def _prefix_tag(builder: _OrderBuilder, alias: str, adjacency) -> str:
    if adjacency[alias] & set(builder.seq):
        return INSERTED_ORPHAN
    builder.warn(
        f"no join connects {alias} to the tables ordered before it; "
        "this step is a Cartesian product"
    )
    return INSERTED_DISCONNECT


def validate_order(g, order: JoinOrder) -> list[int]:
    """Positions whose vertex joins nothing placed before it.

    An empty list means the sequence is Cartesian-free. Raises when the
    sequence is not a permutation of the graph's vertices.
    """
    sizes = g.sizes
    adjacency = g.adjacency
    if sorted(order.sequence) != sorted(sizes):
        raise PlanError(
            "order is not a permutation of the graph vertices: "
            f"{sorted(order.sequence)} vs {sorted(sizes)}"
        )
    violations = []
    for pos in range(1, len(order.sequence)):
        prefix = set(order.sequence[:pos])
        if not (adjacency[order.sequence[pos]] & prefix):
            violations.append(pos)
    return violations
