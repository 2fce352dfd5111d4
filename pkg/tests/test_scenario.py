import json
import subprocess
import sys
from pathlib import Path

import pytest

from uthchern.cli import dump_report, main
from uthchern.scenario import ScenarioError, parse_scenario, run, scenario_to_dict

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def minimal(**extra):
    doc = {
        "chart": ["x", "y"],
        "bundle": {"r0": 1, "r1": 0},
        "connections": {"zero": {"type": "matrix"},
                        "xdy": {"type": "matrix", "theta": [None, [["x"]]]}},
        "tasks": [],
    }
    doc.update(extra)
    return doc


def test_minimal_scenario_parses():
    s = parse_scenario(json.dumps({"chart": ["x"], "bundle": {"r0": 1, "r1": 0},
                                   "connections": {"n": {"type": "matrix", "theta": [[["0"]]]}},
                                   "tasks": [{"task": "chern", "connection": "n", "p": 1}]}))
    assert s.carrier.name == "tangent" and s.tasks[0]["p"] == [1]
    rep = run(s)
    assert rep["passed"] and rep["tasks"][0]["forms"] == [{"p": 1, "form": []}]


def test_dangling_reference():
    doc = minimal(tasks=[{"task": "chern", "connection": "nabla2"}])
    with pytest.raises(ScenarioError) as e:
        parse_scenario(doc)
    assert [d.where for d in e.value.diagnostics] == ["tasks[0].connection"]
    assert "dangling" in e.value.diagnostics[0].message


def test_syntax_error_position():
    with pytest.raises(ScenarioError) as e:
        parse_scenario('{"chart": ["x"],\n  "bundle": }')
    assert e.value.diagnostics[0].where == "line 2, column 13"


def test_unknown_variable_and_shape_diagnostics():
    doc = minimal()
    doc["connections"]["xdy"]["theta"] = [None, [["w"]]]
    doc["connections"]["bad"] = {"type": "matrix", "theta": [[["x", "y"]], None]}
    with pytest.raises(ScenarioError) as e:
        parse_scenario(doc)
    where = {d.where for d in e.value.diagnostics}
    assert "connections.xdy.theta[1][0][0]" in where
    assert "connections.bad.theta[0]" in where


def test_structure_triples_must_be_ordered():
    doc = {"chart": ["x"], "carrier": {"rank": 2, "anchor": [["1"], ["x"]], "structure": [[2, 1, 1, "1"]]},
           "bundle": "adjoint"}
    with pytest.raises(ScenarioError) as e:
        parse_scenario(doc)
    assert e.value.diagnostics[0].where == "carrier.structure[0]"


def test_chern_task_report():
    rep = run(parse_scenario(minimal(tasks=[{"task": "chern", "connection": "xdy", "p": [1]}])))
    assert {"indices": [1, 2], "coeff": "1"} in rep["tasks"][0]["forms"][0]["form"]


def test_transgress_task_report():
    rep = run(parse_scenario(minimal(tasks=[{"task": "transgress", "from": "zero", "to": "xdy", "p": 1}])))
    f = rep["tasks"][0]["forms"][0]
    assert f["cs"] == [{"indices": [2], "coeff": "x"}] and f["exactness_residual"] == []
    assert rep["passed"]


def test_normalize_and_probe_overrides():
    doc = minimal(tasks=[{"task": "chern", "connection": "xdy", "p": [1]}], options={"normalize": True})
    s = parse_scenario(doc)
    assert s.options["normalize"] is True
    rep = run(s, probe_degree=1)
    assert rep["options"] == {"normalize": True, "probe_degree": 1}


def test_superconn_task():
    doc = {
        "chart": ["x", "y"],
        "bundle": {"r0": 1, "r1": 1, "even_to_odd": [["1"]]},
        "connections": {
            "core": {"type": "matrix", "theta": [None, [["x", "0"], ["0", "x"]]]},
            "S": {"type": "superconn", "core": "core", "omega0": "partial",
                  "higher": [{"degree": 2, "form": [{"indices": [1, 2], "matrix": [["5", "0"], ["0", "5"]]}]}]},
        },
        "tasks": [{"task": "super", "connection": "S", "p": [1]}],
    }
    rep = run(parse_scenario(doc))
    t = rep["tasks"][0]
    assert rep["passed"] and t["parity_notes"] and t["components"][0]["by_degree"] == []


def test_uth_task():
    doc = {
        "chart": ["x", "y"],
        "bundle": {"r0": 1, "r1": 1, "even_to_odd": [["1"]]},
        "connections": {"u": {"type": "uth", "theta": [None, [["x", "0"], ["0", "x"]]],
                              "H": [{"a": 1, "j": 2, "matrix": [["0", "1"], ["0", "0"]]}]}},
        "tasks": [{"task": "check", "connection": "u"}],
    }
    rep = run(parse_scenario(doc))
    t = rep["tasks"][0]
    assert t["expect"] == "uth" and t["iii_linear_holds"] is False and rep["passed"]


def test_even_homotopy_rejected():
    doc = {"chart": ["x"], "bundle": {"r0": 1, "r1": 1},
           "connections": {"u": {"type": "uth", "H": [{"a": 0, "j": 1, "matrix": [["1", "0"], ["0", "0"]]}]}}}
    with pytest.raises(ScenarioError):
        parse_scenario(doc)


def test_golden_round_trip():
    text = (SCENARIOS / "aff1.json").read_text()
    s = parse_scenario(text)
    norm = scenario_to_dict(s)
    again = scenario_to_dict(parse_scenario(json.dumps(norm)))
    assert norm == again


def test_golden_report_matches():
    s = parse_scenario((SCENARIOS / "aff1.json").read_text())
    assert dump_report(run(s)) == (SCENARIOS / "aff1.report.json").read_text()


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(minimal(tasks=[{"task": "chern", "connection": "xdy"}])))
    out = tmp_path / "r.json"
    assert main([str(good), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(minimal(tasks=[{"task": "chern", "connection": "nope"}])))
    assert main([str(bad)]) == 2
    assert "dangling" in capsys.readouterr().err
    assert main([str(tmp_path / "missing.json")]) == 2


def test_cli_text_format(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(minimal(tasks=[{"task": "transgress", "from": "zero", "to": "xdy"}])))
    assert main([str(good), "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "task 1 transgress [zero -> xdy]: ok" in out and out.rstrip().endswith("PASSED")


def test_cli_module_entry():
    r = subprocess.run([sys.executable, "-m", "uthchern", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "--probe-degree" in r.stdout
