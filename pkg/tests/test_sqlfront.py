"""Query models, join classification, and join graphs."""

from __future__ import annotations

import pytest

from joinplan.catalog import Catalog, ForeignKeyDef, TableDef
from joinplan.datagen import generate_instance
from joinplan.errors import QueryError
from joinplan.sqlast import ColumnRef
from joinplan.sqlfront import (
    MANY_TO_MANY,
    ONE_TO_MANY,
    JoinGraph,
    build_join_graph,
    classify_join,
    parse_query,
    render_query,
)
from helpers import make_graph


@pytest.fixture()
def star_catalog() -> Catalog:
    return Catalog.build(
        [
            TableDef("fact", 1000, ("id", "d1_id", "d2_id", "v"),
                     frozenset({("id",)})),
            TableDef("dim1", 10, ("id", "name"), frozenset({("id",)})),
            TableDef("dim2", 100, ("id", "name"), frozenset({("id",)})),
        ],
        [
            ForeignKeyDef("fact", ("d1_id",), "dim1", ("id",)),
            ForeignKeyDef("fact", ("d2_id",), "dim2", ("id",)),
        ],
    )


def test_18a_model_shape(job_catalog, sql_18a):
    q = parse_query(sql_18a, job_catalog)
    assert len(q.instances) == 7
    assert sorted(q.aliases()) == ["ci", "it1", "it2", "mi", "mi_idx", "n", "t"]
    assert len(q.joins) == 9
    assert len(q.selections) == 5
    assert [o.name for o in q.output] == ["movie_budget", "movie_votes", "movie_title"]
    assert q.instance("it1").base_table == "info_type"
    assert q.instance("it1").size == 113
    # ci joins mi on movie_id on both sides: no key anywhere, so many-to-many.
    ci_mi = [
        j for j in q.joins
        if j.aliases() == frozenset({"ci", "mi"})
    ]
    assert [j.kind for j in ci_mi] == [MANY_TO_MANY]
    # t.id is a key: every join touching t is one-to-many toward t.
    for j in q.joins:
        ref = j.touches("t")
        if ref is not None:
            assert j.kind == ONE_TO_MANY
            assert ref.column == "id"


def test_single_table_query(star_catalog):
    q = parse_query("SELECT d.name FROM dim1 AS d WHERE d.id = 3", star_catalog)
    assert len(q.instances) == 1
    assert q.joins == ()
    assert len(q.selections) == 1
    assert q.selections[0].aliases == frozenset({"d"})


def test_parallel_edges_are_kept(star_catalog):
    q = parse_query(
        "SELECT f.v FROM fact AS f, dim1 AS d "
        "WHERE f.d1_id = d.id AND f.d1_id = d.id",
        star_catalog,
    )
    assert len(q.joins) == 2
    assert q.joins[0] == q.joins[1]


def test_classify_join_cases(star_catalog):
    assert classify_join(star_catalog, "fact", "d1_id", "dim1", "id") == \
        (ONE_TO_MANY, "right")
    assert classify_join(star_catalog, "dim1", "id", "fact", "d1_id") == \
        (ONE_TO_MANY, "left")
    assert classify_join(star_catalog, "fact", "v", "dim1", "name") == \
        (MANY_TO_MANY, "none")
    # Key to key: degenerate one-to-many, left side wins for determinism.
    assert classify_join(star_catalog, "dim1", "id", "dim2", "id") == \
        (ONE_TO_MANY, "left")


def test_classification_ignores_conjunct_order(star_catalog):
    a = parse_query(
        "SELECT f.v FROM fact AS f, dim1 AS d1, dim2 AS d2 "
        "WHERE f.d1_id = d1.id AND f.d2_id = d2.id",
        star_catalog,
    )
    b = parse_query(
        "SELECT f.v FROM fact AS f, dim1 AS d1, dim2 AS d2 "
        "WHERE f.d2_id = d2.id AND f.d1_id = d1.id",
        star_catalog,
    )
    kinds_a = {(j.aliases(), j.kind, j.key_side) for j in a.joins}
    kinds_b = {(j.aliases(), j.kind, j.key_side) for j in b.joins}
    assert kinds_a == kinds_b


def test_selection_with_alias_pair_is_not_a_join(star_catalog):
    q = parse_query(
        "SELECT f.v FROM fact AS f, dim1 AS d WHERE f.v < d.id",
        star_catalog,
    )
    assert q.joins == ()
    assert len(q.selections) == 1
    assert q.selections[0].aliases == frozenset({"f", "d"})


def test_unknown_table_and_column_errors(star_catalog):
    with pytest.raises(QueryError) as err:
        parse_query("SELECT g.x FROM ghost AS g", star_catalog)
    assert "ghost" in str(err.value)
    with pytest.raises(QueryError) as err:
        parse_query("SELECT d.ghost FROM dim1 AS d", star_catalog)
    assert "d.ghost" in str(err.value)
    assert "dim1" in str(err.value)
    with pytest.raises(QueryError) as err:
        parse_query(
            "SELECT d.name FROM dim1 AS d WHERE x.name = 'a'", star_catalog
        )
    assert "unknown alias" in str(err.value)


def test_duplicate_alias_is_rejected(star_catalog):
    with pytest.raises(QueryError) as err:
        parse_query("SELECT d.name FROM dim1 AS d, dim2 AS d", star_catalog)
    assert "duplicate" in str(err.value)


def test_predicate_without_alias_is_rejected(star_catalog):
    with pytest.raises(QueryError):
        parse_query("SELECT d.name FROM dim1 AS d WHERE 1 = 1", star_catalog)


def test_star_output_covers_all_instances(star_catalog):
    q = parse_query("SELECT * FROM fact AS f, dim1 AS d WHERE f.d1_id = d.id",
                    star_catalog)
    assert q.output[0].aliases == frozenset({"f", "d"})


def test_render_round_trip_18a(job_catalog, sql_18a):
    q = parse_query(sql_18a, job_catalog)
    rendered = render_query(q)
    again = parse_query(rendered, job_catalog)
    assert again == q
    assert render_query(again) == rendered


@pytest.mark.parametrize("seed", range(25))
def test_render_round_trip_generated(seed):
    inst = generate_instance(seed)
    q = parse_query(inst.sql, inst.catalog)
    again = parse_query(render_query(q), inst.catalog)
    assert again == q


def test_many_to_many_endpoints_are_never_keys(job_catalog, sql_18a):
    q = parse_query(sql_18a, job_catalog)
    base = {inst.alias: inst.base_table for inst in q.instances}
    from joinplan.catalog import is_key_column
    for j in q.joins:
        if j.kind == MANY_TO_MANY:
            assert not is_key_column(job_catalog, base[j.left.alias], j.left.column)
            assert not is_key_column(job_catalog, base[j.right.alias], j.right.column)


def test_join_graph_shape(job_catalog, sql_18a):
    q = parse_query(sql_18a, job_catalog)
    g = build_join_graph(q, job_catalog)
    assert g.connected
    assert len(g.components) == 1
    assert set(g.vertices) == set(q.aliases())
    assert g.sizes["t"] == 2_528_312
    assert g.adjacency["it1"] == frozenset({"mi"})
    assert g.nm_aliases == frozenset({"ci", "mi", "mi_idx"})


def test_disconnected_graph_is_recorded_not_rejected(star_catalog):
    q = parse_query(
        "SELECT f.v FROM fact AS f, dim1 AS d1, dim2 AS d2 "
        "WHERE f.d1_id = d1.id",
        star_catalog,
    )
    g = build_join_graph(q, star_catalog)
    assert not g.connected
    assert sorted(len(c) for c in g.components) == [1, 2]


def test_transitive_closure_adds_classified_edges(job_catalog):
    sql = (
        "SELECT t.title FROM cast_info AS ci, movie_info AS mi, title AS t "
        "WHERE ci.movie_id = mi.movie_id AND mi.movie_id = t.id"
    )
    q = parse_query(sql, job_catalog)
    plain = build_join_graph(q, job_catalog)
    closed = build_join_graph(q, job_catalog, transitive=True)
    assert len(plain.edges) == 2
    assert len(closed.edges) == 3
    implied = [e for e in closed.edges if e.implied]
    assert len(implied) == 1
    edge = implied[0]
    assert edge.aliases() == frozenset({"ci", "t"})
    # The implied ci-t edge touches t.id, so it classifies one-to-many.
    assert edge.kind == ONE_TO_MANY
    assert plain.adjacency["ci"] == frozenset({"mi"})
    assert closed.adjacency["ci"] == frozenset({"mi", "t"})


def test_transitive_closure_is_off_by_default(job_catalog):
    sql = (
        "SELECT t.title FROM cast_info AS ci, movie_info AS mi, title AS t "
        "WHERE ci.movie_id = mi.movie_id AND mi.movie_id = t.id"
    )
    q = parse_query(sql, job_catalog)
    assert all(not e.implied for e in build_join_graph(q, job_catalog).edges)


def test_graph_build_rejects_foreign_edges(star_catalog):
    q = parse_query(
        "SELECT f.v FROM fact AS f, dim1 AS d WHERE f.d1_id = d.id",
        star_catalog,
    )
    stray = q.joins[0]
    with pytest.raises(QueryError):
        JoinGraph.build(q.instances[:1], [stray])


def test_make_graph_helper_matches_real_pipeline(star_catalog):
    q = parse_query(
        "SELECT f.v FROM fact AS f, dim1 AS d1, dim2 AS d2 "
        "WHERE f.d1_id = d1.id AND f.d2_id = d2.id",
        star_catalog,
    )
    real = build_join_graph(q, star_catalog)
    synthetic = make_graph(
        {"f": 1000, "d1": 10, "d2": 100},
        [("f", "d1", ONE_TO_MANY), ("f", "d2", ONE_TO_MANY)],
    )
    assert synthetic.sizes == real.sizes
    assert synthetic.adjacency == real.adjacency
    assert synthetic.nm_aliases == real.nm_aliases
