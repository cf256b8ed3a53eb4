"""End-to-end command-line behavior, including exit codes."""

from __future__ import annotations

import json

import pytest

from joinplan.catalog import load_catalog
from joinplan.cli import main
from joinplan.datagen import generate_instance
from helpers import GOLDEN_PLAN_TEXT, load_into_database, rename_tables


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def instance_dir(tmp_path):
    generate_instance(0).write(tmp_path / "inst")
    return tmp_path / "inst"


def test_plan_golden_output(capsys, job_catalog_path, query_18a_path):
    code, out, err = run(
        capsys, "plan", "--schema", str(job_catalog_path),
        "--query", str(query_18a_path),
    )
    assert code == 0
    assert out == GOLDEN_PLAN_TEXT
    assert err == ""


def test_plan_json(capsys, job_catalog_path, query_18a_path):
    code, out, _err = run(
        capsys, "plan", "--schema", str(job_catalog_path),
        "--query", str(query_18a_path), "--json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["algorithm"] == "split"
    assert doc["sequence"] == ["mi_idx", "it2", "t", "mi", "it1", "ci", "n"]
    assert doc["partitions"][0] == {"head": "mi_idx", "members": ["mi_idx", "it2", "t"]}
    assert doc["warnings"] == []


def test_plan_size_algos(capsys, job_catalog_path, query_18a_path):
    code, out, _err = run(
        capsys, "plan", "--schema", str(job_catalog_path),
        "--query", str(query_18a_path), "--algo", "size-asc",
    )
    assert code == 0
    assert out.startswith("algorithm: size-asc\n")
    code, out, _err = run(
        capsys, "plan", "--schema", str(job_catalog_path),
        "--query", str(query_18a_path), "--algo", "size-desc",
        "--avoid-cartesian",
    )
    assert code == 0
    assert out.startswith("algorithm: size-desc\n")


def test_rewrite_prints_prologue_then_sql(capsys, job_catalog_path, query_18a_path):
    code, out, err = run(
        capsys, "rewrite", "--schema", str(job_catalog_path),
        "--query", str(query_18a_path),
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "SET from_collapse_limit = 1;"
    assert lines[1] == "SET join_collapse_limit = 1;"
    assert lines[2].startswith("SELECT ") and lines[2].endswith(";")
    assert "(SELECT" in lines[2]
    assert err == ""


def test_rewrite_leftdeep_and_generic(capsys, job_catalog_path, query_18a_path):
    code, out, _err = run(
        capsys, "rewrite", "--schema", str(job_catalog_path),
        "--query", str(query_18a_path), "--mode", "leftdeep",
        "--target", "generic",
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert len(lines) == 1
    assert " JOIN " in lines[0]
    assert "(SELECT" not in lines[0]


def test_rewrite_json(capsys, job_catalog_path, query_18a_path):
    code, out, _err = run(
        capsys, "rewrite", "--schema", str(job_catalog_path),
        "--query", str(query_18a_path), "--json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["mode"] == "subquery"
    assert doc["prologue"] == [
        "SET from_collapse_limit = 1", "SET join_collapse_limit = 1",
    ]
    assert doc["sql"].startswith("SELECT ")
    assert doc["warnings"] == []


def test_compare_table(capsys, instance_dir):
    code, out, _err = run(
        capsys, "compare",
        "--schema", str(instance_dir / "catalog.json"),
        "--query", str(instance_dir / "query.sql"),
        "--data", str(instance_dir / "data"),
    )
    assert code == 0
    for algo in ("split", "size-asc", "size-desc", "optimal"):
        assert algo in out
    assert "yes" in out
    assert "NO" not in out
    assert "skipped" not in out


def test_compare_json_reports_costs(capsys, instance_dir):
    code, out, _err = run(
        capsys, "compare",
        "--schema", str(instance_dir / "catalog.json"),
        "--query", str(instance_dir / "query.sql"),
        "--data", str(instance_dir / "data"),
        "--json",
    )
    assert code == 0
    rows = {r["algorithm"]: r for r in json.loads(out)}
    assert rows["optimal"]["analytical_cost"] == 78
    assert rows["split"]["analytical_cost"] == 78
    assert rows["size-asc"]["analytical_cost"] == 130
    assert all(r["equivalent_subquery"] for r in rows.values())
    assert all(r["equivalent_leftdeep"] for r in rows.values())


def test_compare_bound_marks_optimal_skipped(capsys, instance_dir):
    code, out, _err = run(
        capsys, "compare",
        "--schema", str(instance_dir / "catalog.json"),
        "--query", str(instance_dir / "query.sql"),
        "--data", str(instance_dir / "data"),
        "--bound", "2",
    )
    assert code == 0
    assert "skipped" in out


def test_malformed_sql_exits_2(capsys, tmp_path, job_catalog_path):
    bad = tmp_path / "bad.sql"
    bad.write_text("SELECT FROM title AS t")
    code, _out, err = run(
        capsys, "plan", "--schema", str(job_catalog_path), "--query", str(bad),
    )
    assert code == 2
    assert "error:" in err and "at offset" in err


def test_unknown_table_exits_2(capsys, tmp_path, job_catalog_path):
    bad = tmp_path / "bad.sql"
    bad.write_text("SELECT COUNT(*) AS n FROM nonexistent AS x")
    code, _out, err = run(
        capsys, "plan", "--schema", str(job_catalog_path), "--query", str(bad),
    )
    assert code == 2
    assert "nonexistent" in err


def test_missing_schema_file_exits_2(capsys, tmp_path, query_18a_path):
    code, _out, err = run(
        capsys, "plan", "--schema", str(tmp_path / "ghost.json"),
        "--query", str(query_18a_path),
    )
    assert code == 2
    assert "error:" in err


def test_invalid_schema_json_exits_2(capsys, tmp_path, query_18a_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    code, _out, err = run(
        capsys, "plan", "--schema", str(bad), "--query", str(query_18a_path),
    )
    assert code == 2
    assert "error:" in err


def test_bench_without_url_exits_3(capsys, monkeypatch, tmp_path, job_catalog_path):
    monkeypatch.delenv("DB_URL", raising=False)
    queries = tmp_path / "queries"
    queries.mkdir()
    (queries / "q.sql").write_text("SELECT COUNT(*) AS n FROM title AS t")
    code, _out, err = run(
        capsys, "bench", "--schema", str(job_catalog_path),
        "--queries", str(queries),
    )
    assert code == 3
    assert "DB_URL" in err


def test_bench_with_empty_query_dir_exits_2(capsys, tmp_path, job_catalog_path):
    queries = tmp_path / "queries"
    queries.mkdir()
    code, _out, err = run(
        capsys, "bench", "--schema", str(job_catalog_path),
        "--queries", str(queries), "--url", "sqlite://",
    )
    assert code == 2
    assert "no .sql files" in err


def test_bench_end_to_end_on_sqlite(capsys, tmp_path):
    inst = rename_tables(generate_instance(3, n_tables=3, max_rows=20), "cli_")
    inst_dir = tmp_path / "inst"
    inst.write(inst_dir)
    url = f"sqlite:///{tmp_path}/cli.db"
    load_into_database(url, inst.tables)
    queries = tmp_path / "queries"
    queries.mkdir()
    (queries / "q0.sql").write_text(inst.sql + ";\n")
    out_file = tmp_path / "report.tsv"

    code, out, err = run(
        capsys, "bench",
        "--schema", str(inst_dir / "catalog.json"),
        "--queries", str(queries),
        "--url", url,
        "--runs", "2",
        "--modes", "original,subquery,leftdeep",
        "--out", str(out_file),
    )
    assert code == 0
    assert f"wrote {out_file}" in out
    lines = out_file.read_text().strip().split("\n")
    assert lines[0].startswith("query\tmode\tmedian_ms")
    body = [l for l in lines if not l.startswith("#")]
    assert len(body) == 1 + 3  # header + one row per mode
    counts = {row.split("\t")[1]: row.split("\t")[3] for row in body[1:]}
    assert len(set(counts.values())) == 1
    assert "order-pinning" in err  # sqlite cannot pin the join order


def test_extract_catalog_cli(capsys, tmp_path):
    inst = rename_tables(generate_instance(3, n_tables=3, max_rows=20), "xc_")
    url = f"sqlite:///{tmp_path}/xc.db"
    load_into_database(url, inst.tables)

    code, out, err = run(capsys, "extract-catalog", "--url", url)
    assert code == 0
    doc = json.loads(out)
    assert set(t["name"] for t in doc["tables"]) == set(inst.tables)
    # sqlite DDL from the loader declares no keys, so a warning lands on stderr.
    assert "many-to-many" in err

    out_file = tmp_path / "extracted.json"
    code, out, _err = run(
        capsys, "extract-catalog", "--url", url, "--out", str(out_file),
    )
    assert code == 0
    assert f"wrote {out_file}" in out
    extracted = load_catalog(out_file)
    assert set(extracted.tables) == set(inst.tables)


def test_extract_catalog_without_url_exits_3(capsys, monkeypatch):
    monkeypatch.delenv("DB_URL", raising=False)
    code, _out, err = run(capsys, "extract-catalog")
    assert code == 3
    assert "DB_URL" in err
