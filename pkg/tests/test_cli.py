import csv
import io
import shutil
from importlib.resources import files

import pytest

from omplan import bench, cli

DATA = files("omplan") / "data"
BW = str(DATA / "blocksworld" / "bundle.manifest")
E2 = str(DATA / "two_conditions" / "bundle.manifest")


@pytest.fixture
def bundle_copy(tmp_path):
    d = tmp_path / "bundle"
    shutil.copytree(str(DATA / "blocksworld"), d)
    return d


def test_compile_to_stdout(capsys):
    assert cli.main(["compile", BW]) == 0
    out, err = capsys.readouterr()
    assert "(:derived (fullHands ?x)" in out and "(define (problem" in out
    assert "query rules: 1" in err and "inconsistency disjuncts: 1" in err


def test_compile_writes_artifacts(tmp_path, capsys):
    assert cli.main(["compile", BW, "--out", str(tmp_path)]) == 0
    assert {p.name for p in tmp_path.iterdir()} == {"domain.pddl", "problem.pddl", "provenance.json"}
    assert "query rules: 1" in capsys.readouterr().out


def test_justify_csv(capsys):
    assert cli.main(["justify", E2, "--algorithm", "schema"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows == [["query", "fluents"],
                    ["ClassAssertion(C a)", "ClassAssertion(A a);ClassAssertion(B a)"],
                    ["ClassAssertion(C b)", "ClassAssertion(A b);ClassAssertion(B b)"]]


def test_plan_and_validate(tmp_path, capsys):
    assert cli.main(["plan", BW, "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "plan.txt").read_text().splitlines()) == 4
    assert "wall_time" not in (tmp_path / "plan-stats.json").read_text()
    assert cli.main(["validate", BW, str(tmp_path / "plan.txt")]) == 0
    assert cli.main(["validate", BW]) == 0
    assert capsys.readouterr().out.endswith("accept\n")


def test_validate_rejects_with_exit_5(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("(unstack stackBot blockB blockA)\n(pickup stackBot blockA)\n(pickup stackBot blockC)\n")
    assert cli.main(["validate", BW, str(p)]) == cli.EXIT_REJECTED
    assert "reject at step 3 (P2)" in capsys.readouterr().out


def test_input_errors_exit_1(tmp_path, bundle_copy):
    assert cli.main(["compile", str(tmp_path / "missing.manifest")]) == cli.EXIT_INPUT
    (bundle_copy / "mapping.iface").write_text("fluent holds -> nosuchrole\n")
    assert cli.main(["compile", str(bundle_copy / "bundle.manifest")]) == cli.EXIT_INPUT
    p = tmp_path / "plan.txt"
    p.write_text("(fly stackBot)\n")
    assert cli.main(["validate", BW, str(p)]) == cli.EXIT_INPUT


def test_static_inconsistency_exit_3(bundle_copy):
    with open(bundle_copy / "ontology.ofn", "a") as f:
        f.write("ClassAssertion(owl:Nothing blockA)\n")
    assert cli.main(["compile", str(bundle_copy / "bundle.manifest")]) == cli.EXIT_STATIC_INCONSISTENT


def test_budget_exit_2():
    assert cli.main(["compile", BW, "--node-budget", "2"]) == cli.EXIT_BUDGET


def test_unsolvable_and_limit_exits(bundle_copy):
    prob = bundle_copy / "problem.pddl"
    prob.write_text(prob.read_text().replace("(:goal (on blockA blockB))", "(:goal (on blockA blockA))"))
    m = str(bundle_copy / "bundle.manifest")
    assert cli.main(["plan", m]) == cli.EXIT_UNSOLVABLE
    assert cli.main(["plan", BW, "--max-states", "1"]) == cli.EXIT_LIMIT


def test_env_overrides(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("OMPS_ALGORITHM", "basic")
    monkeypatch.setenv("OMPS_NO_PATH_PRUNING", "1")
    args = cli.build_parser().parse_args(["justify", E2])
    cfg = cli._config(args)
    assert cfg.algorithm == "basic" and not cfg.path_pruning and cfg.marker_pruning
    args = cli.build_parser().parse_args(["justify", E2, "--algorithm", "schema"])
    assert cli._config(args).algorithm == "schema"
    monkeypatch.setenv("OMPS_ALGORITHM", "nonsense")
    assert cli.main(["justify", E2]) == cli.EXIT_INPUT


def test_run_config_validation():
    with pytest.raises(ValueError):
        cli.RunConfig(algorithm="x")
    with pytest.raises(ValueError):
        cli.RunConfig(workers=0)
    assert cli._parse_sizes("3-5,8") == [3, 4, 5, 8]


def test_outputs_are_byte_identical(tmp_path):
    for run in ("a", "b"):
        assert cli.main(["compile", BW, "--out", str(tmp_path / run)]) == 0
        assert cli.main(["justify", BW, "--out", str(tmp_path / run)]) == 0
        assert cli.main(["plan", BW, "--out", str(tmp_path / run)]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes(), n


def test_bench_header_only(capsys):
    assert cli.main(["bench", "--instances", "0"]) == 0
    assert capsys.readouterr().out == ",".join(bench.CSV_COLUMNS) + "\n"


def test_bench_writes_csvs(tmp_path):
    assert cli.main(["bench", "--sizes", "3", "--instances", "2", "--algorithms", "basic,schema",
                     "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "bench.csv")))
    assert len(rows) == 4 and all(r["solved"] == "1" for r in rows)
    assert (tmp_path / "cactus.csv").read_text().startswith("algorithm,solved,time\n")


def test_bench_families():
    b = bench.interchangeable_bundle(3)
    o = b.load()
    assert [q.pred for q in o.queries] == ["fullHands"]
    assert len(o.interface.constants) == 6
    assert bench.blocksworld_bundle(4, 1) == bench.blocksworld_bundle(4, 1)
    assert bench.blocksworld_bundle(4, 1) != bench.blocksworld_bundle(4, 2)
    with pytest.raises(ValueError):
        bench.make_bundle("grid", 3, 0)
    rows = bench.run_suite([bench.blocksworld_bundle(3, 0)], ["concept"], isolate=False)
    assert rows[0].solved and rows[0].total_time >= rows[0].reasoning_time
