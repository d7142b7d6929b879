import json
from importlib import resources

import jsonschema
import pytest

from cpotential.cli import DEMOS, main, render, run_demo

DATA = resources.files("cpotential") / "data"
REPORT_SCHEMA = json.loads((resources.files("cpotential") / "schemas" / "report.schema.json").read_text())


def data(name):
    return str(DATA / name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, "--output", "json", *argv)
    rep = json.loads(out)
    jsonschema.validate(rep, REPORT_SCHEMA)
    return code, rep


def test_analyze_coulomb(capsys):
    code, rep = run_json(capsys, "analyze", data("coulomb.json"))
    assert code == 0 and rep["ok"]
    assert rep["flags"]["path_bounded"] and rep["flags"]["cyclically_monotone"]
    assert rep["F"][1][0] == "-inf" and rep["F"][0][3] == pytest.approx(1.0)
    assert rep["conventions"]["extended_reals"]


def test_analyze_text_and_dot(capsys):
    code, out, _ = run(capsys, "analyze", data("coulomb.json"))
    assert code == 0 and "PASS" in out
    code, out, _ = run(capsys, "--output", "dot", "analyze", data("coulomb.json"))
    assert code == 0 and out.startswith("digraph")


def test_walk_oracle_cross_check(capsys):
    code, rep = run_json(capsys, "--max-walk-len", "20", "analyze", data("coulomb.json"))
    assert code == 0
    assert any("walk" in c["name"] and c["ok"] for c in rep["checks"])


def test_walk_budget_exit_code(capsys):
    code, _, err = run(capsys, "--max-walk-len", "1000000000", "analyze", data("coulomb.json"))
    assert code == 3 and "budget" in err.lower()


def test_input_errors(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", data("polar_outside.json"))
    assert code == 2 and "xy" in err
    code, _, _ = run(capsys, "analyze", str(tmp_path / "missing.json"))
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"cost": {"kind": "nope"}, "points": []}')
    assert run(capsys, "analyze", str(bad))[0] == 2


def test_potential_obstruction(capsys):
    code, rep = run_json(capsys, "potential", data("pairing_cycle.json"))
    assert code == 1 and not rep["ok"]
    assert "obstruction" in rep


def test_potential_then_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "--output", "json", "potential", data("coulomb.json"),
                       "--method", "sinks", "--terminals", "0,3")
    assert code == 0
    path = tmp_path / "pot.json"
    path.write_text(out)
    code, rep = run_json(capsys, "verify", data("coulomb.json"), str(path))
    assert code == 0 and rep["ok"]
    path.write_text("[0, 5, 0, 0]")
    assert run_json(capsys, "verify", data("coulomb.json"), str(path))[0] == 1


@pytest.mark.parametrize("method", ["incremental", "auto", "sources"])
def test_potential_methods(capsys, method):
    code, rep = run_json(capsys, "potential", data("coulomb.json"), "--method", method)
    assert code == 0, rep


def test_permuted_order_is_recorded(capsys):
    code, rep = run_json(capsys, "--seed", "7", "potential", data("coulomb.json"), "--permute")
    assert code == 0
    assert rep["conventions"]["seed"] == 7
    assert sorted(rep["conventions"]["node_order"]) == [0, 1, 2, 3]


def test_seed_after_subcommand(capsys):
    code, rep = run_json(capsys, "potential", data("coulomb.json"), "--permute", "--seed", "3")
    assert code == 0 and rep["conventions"]["seed"] == 3


def test_extend_segments(capsys, tmp_path):
    out = tmp_path / "ext.json"
    code, rep = run_json(capsys, "extend", data("segments_only.json"), "--write-extension", str(out))
    assert code == 0, rep
    written = json.loads(out.read_text())
    assert len(written["points"]) > 12
    # the written extension is itself a valid instance
    assert run(capsys, "analyze", str(out))[0] == 0


def test_growth_default_family(capsys):
    code, rep = run_json(capsys, "growth", "--levels", "4")
    assert code == 0
    vals = rep["growth"]["values"]
    assert len(vals) == 5 and vals == sorted(vals)


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_demos_pass(name):
    rep = run_demo(name)
    assert rep.ok, render(rep, "text")
    jsonschema.validate(json.loads(render(rep, "json")), REPORT_SCHEMA)


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
