import csv
import json

from sparsenash.main import main


def _run(*argv) -> int:
    return main(["--log-level", "WARNING", *argv])


def _star(tmp_path, n: int = 5):
    path = tmp_path / f"star{n}.json"
    assert _run("generate", "star-mp", "--n", str(n), "--out", str(path)) == 0
    return path


def test_generate_solve_verify(tmp_path) -> None:
    game = _star(tmp_path)
    profile = tmp_path / "profile.json"
    assert _run("solve", "--game", str(game), "--epsilon", "0.1", "--out", str(profile)) == 0
    doc = json.loads(profile.read_text())
    assert doc["verified"] is True
    assert doc["provenance"]["solver"] == "polymatrix"
    verdict = tmp_path / "verdict.json"
    assert _run("verify", "--game", str(game), "--profile", str(profile), "--out", str(verdict)) == 0
    assert json.loads(verdict.read_text())["passed"] is True


def test_verify_rejects_pure_pennies(tmp_path, capsys) -> None:
    game = _star(tmp_path, 2)
    profile = tmp_path / "pure.json"
    profile.write_text(json.dumps({
        "epsilon": "0.1",
        "strategies": [
            {"id": 0, "grid_denominator": 1, "numerators": [1, 0]},
            {"id": 1, "grid_denominator": 1, "numerators": [1, 0]},
        ],
    }))
    assert _run("verify", "--game", str(game), "--profile", str(profile)) == 1
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["passed"] is False
    assert verdict["regrets"][1]["regret"] == "1"


def test_input_errors_exit_with_two(tmp_path) -> None:
    game = _star(tmp_path)
    assert _run("solve", "--game", str(game), "--epsilon", "0") == 2
    assert _run("solve", "--game", str(game), "--epsilon", "tenth") == 2
    assert _run("generate", "example1", "--gamma", "0.5") == 2
    assert _run("solve", "--game", str(tmp_path / "missing.json"), "--epsilon", "0.1") == 2


def test_cyclic_game_is_rejected(tmp_path) -> None:
    game = tmp_path / "mixed.json"
    assert _run("generate", "mixed-cliques", "--seed", "3", "--out", str(game)) == 0
    assert _run("solve", "--game", str(game), "--epsilon", "0.5") == 2


def test_normal_form_solver_and_table_dump(tmp_path) -> None:
    game = _star(tmp_path, 3)
    profile = tmp_path / "profile.json"
    tables = tmp_path / "tables.json"
    code = _run("solve", "--game", str(game), "--epsilon", "0.5", "--solver", "normalform",
                "--dump-tables", str(tables), "--out", str(profile))
    assert code == 0
    assert json.loads(profile.read_text())["provenance"]["variant"] == "refined"
    dump = json.loads(tables.read_text())
    assert dump["root"] == 0
    assert {arc["child"] for arc in dump["arcs"]} == {1, 2}


def test_certify_original_scale(tmp_path) -> None:
    game = tmp_path / "star.json"
    assert _run("generate", "star-mp", "--n", "3", "--reward", "3,1", "--out", str(game)) == 0
    profile = tmp_path / "profile.json"
    assert _run("solve", "--game", str(game), "--epsilon", "0.5", "--certify-original",
                "--children-order", "0:2,1", "--out", str(profile)) == 0


def test_csp_export_and_solve(tmp_path) -> None:
    game = _star(tmp_path, 2)
    exported = tmp_path / "csp.json"
    assert _run("csp", "export", "--game", str(game), "--epsilon", "0.5", "--out", str(exported)) == 0
    assert json.loads(exported.read_text())["variant"] == "simple"
    profile = tmp_path / "profile.json"
    assert _run("csp", "solve", "--csp", str(exported), "--out", str(profile)) == 0
    doc = json.loads(profile.read_text())
    assert doc["provenance"]["solver"] == "backtracking"
    assert _run("verify", "--game", str(game), "--profile", str(profile)) == 0


def test_csp_node_limit(tmp_path) -> None:
    game = _star(tmp_path, 2)
    exported = tmp_path / "csp.json"
    assert _run("csp", "export", "--game", str(game), "--epsilon", "0.5", "--out", str(exported)) == 0
    assert _run("csp", "solve", "--csp", str(exported), "--node-limit", "1") == 4


def test_bench_writes_csv(tmp_path, capsys) -> None:
    out = tmp_path / "bench.csv"
    assert _run("bench", "star", "--sizes", "1,2", "--repeats", "1", "--out", str(out)) == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["k", "median_seconds", "s_leaf", "s_center", "table_bytes"]
    assert [row[0] for row in rows[1:]] == ["1", "2"]
    assert "slope" in json.loads(capsys.readouterr().out)
