import json

import pytest

from invlim.cli import CAP_ENV, run

from conftest import SAMPLES

TENTS = str(SAMPLES / "tents.toml")
TRIOD = str(SAMPLES / "triod.toml")
BROKEN = str(SAMPLES / "broken.toml")

G3_CYCLE = "cycle=[edge:1-2@0,edge:1-2@1,edge:1-2@2/5]"


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compare_homeomorphic(capsys):
    code, out, _ = invoke(capsys, "compare", TENTS, "--maps", "tent,skew", "--depth", "3")
    doc = json.loads(out)
    assert code == 0
    assert doc["outcome"] == "HOMEOMORPHIC" and len(doc["witness"]) == 3
    assert [r["round"] for r in doc["rounds"]] == [1, 2, 3]


def test_compare_distinguished(capsys):
    code, out, _ = invoke(capsys, "compare", TENTS, "--maps", "tent,g3")
    doc = json.loads(out)
    assert code == 1
    assert doc["outcome"] == "DISTINGUISHED" and doc["omega"] == {"f": 1, "g": 3}
    assert doc["hypotheses"]["reports"]["f"]["all_hold"]


def test_compare_inconclusive(capsys):
    code, out, _ = invoke(capsys, "compare", TRIOD, "--maps", "id,swap", "--depth", "1")
    assert code == 3 and json.loads(out)["outcome"] == "INCONCLUSIVE"


def test_compare_writes_file(capsys, tmp_path):
    target = tmp_path / "v.json"
    code, out, _ = invoke(capsys, "compare", TENTS, "--maps", "tent,skew", "--depth", "1", "--json", str(target))
    assert code == 0 and out.strip() == "HOMEOMORPHIC"
    assert json.loads(target.read_text())["kind"] == "comparison"


def test_validate(capsys):
    code, out, _ = invoke(capsys, "validate", TENTS)
    assert code == 0 and "map g3: 2 laps, 1 turning points" in out


@pytest.mark.parametrize("argv", [
    ["validate", BROKEN],
    ["validate", "/nonexistent.toml"],
    ["compare", TENTS, "--maps", "tent"],
    ["compare", TENTS, "--maps", "tent,nope"],
    ["partition", TENTS],
    ["refine", TENTS, "--map", "tent", "--depth", "0"],
    ["point", TENTS, "--map", "tent", "--itinerary", "cycle=[edge:1-2@0]", "--shift", "--project", "1"],
    ["point", TENTS, "--map", "tent", "--itinerary", "cycle=[edge:1-2@1/3]", "--shift"],
    ["point", TENTS, "--map", "tent", "--itinerary", "cycle=[edge:1-2@0]", "--distance",
     "cycle=[edge:1-2@0]", "--precision", "0"],
    ["frobnicate"],
])
def test_input_errors(capsys, argv):
    code, _, err = invoke(capsys, *argv)
    assert code == 2 and err


def test_partition_and_assumptions(capsys):
    code, out, _ = invoke(capsys, "partition", TENTS, "--map", "g3")
    assert code == 0 and json.loads(out)["matrix"] == [[0, 1], [1, 1]]
    code, out, _ = invoke(capsys, "assumptions", TENTS, "--map", "g3")
    doc = json.loads(out)
    assert code == 0 and doc["eventually_multivalued_preimages"] == {"state": "verified", "n": 2, "note": doc[
        "eventually_multivalued_preimages"]["note"]}
    code, out, _ = invoke(capsys, "assumptions", TRIOD, "--map", "id")
    assert code == 1 and not json.loads(out)["all_hold"]


def test_orbits(capsys):
    code, out, _ = invoke(capsys, "orbits", TENTS, "--map", "g3")
    doc = json.loads(out)
    assert code == 0 and doc["omega_size"] == 3
    assert doc["turning_points"][0]["period"] == 3


def test_cap_override(capsys, monkeypatch):
    code, _, _ = invoke(capsys, "orbits", TENTS, "--map", "g3", "--cap", "1")
    assert code == 3
    monkeypatch.setenv(CAP_ENV, "1")
    code, _, _ = invoke(capsys, "orbits", TENTS, "--map", "g3")
    assert code == 3
    monkeypatch.setenv(CAP_ENV, "many")
    code, _, _ = invoke(capsys, "orbits", TENTS, "--map", "g3")
    assert code == 2


def test_refine(capsys):
    code, out, _ = invoke(capsys, "refine", TENTS, "--map", "tent", "--depth", "2")
    rounds = json.loads(out)["rounds"]
    assert code == 0 and len(rounds) == 2
    assert rounds[1]["pattern"]["kind"] == "pattern"


def test_classify(capsys):
    code, out, _ = invoke(capsys, "classify", TENTS, "--map", "tent", "--itinerary", "cycle=[edge:1-2@0]",
                          "--diagnose", "3")
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "EXCEPTIONAL" and doc["diagnosis"] == "ENDPOINT_CONDITION"
    code, out, _ = invoke(capsys, "classify", TENTS, "--map", "tent", "--itinerary", "cycle=[edge:1-2@2/3]")
    assert code == 0 and json.loads(out)["verdict"] == "PRODUCT"
    code, out, _ = invoke(capsys, "classify", TENTS, "--map", "g3", "--itinerary", G3_CYCLE, "--diagnose", "3")
    assert json.loads(out)["diagnosis"] == "INDECOMPOSABLE_LIKE"


def test_classify_branch_vertex(capsys):
    code, _, err = invoke(capsys, "classify", TRIOD, "--map", "id", "--itinerary", "cycle=[v4]")
    assert code == 3 and "branch vertex" in err


def test_point(capsys):
    code, out, _ = invoke(capsys, "point", TENTS, "--map", "g3", "--itinerary", G3_CYCLE, "--shift")
    assert code == 0 and json.loads(out)["shift"] == "pre=[edge:1-2@2/5];" + G3_CYCLE
    code, out, _ = invoke(capsys, "point", TENTS, "--map", "g3", "--itinerary", G3_CYCLE, "--project", "2")
    assert json.loads(out)["projection"] == {"n": 2, "point": "edge:1-2@2/5"}
    code, out, _ = invoke(capsys, "point", TENTS, "--map", "tent", "--itinerary", "cycle=[edge:1-2@0]",
                          "--distance", "cycle=[edge:1-2@2/3]")
    assert json.loads(out)["distance"]["lo"] == json.loads(out)["distance"]["hi"] == "2/3"


@pytest.mark.parametrize("argv", [
    ["compare", TENTS, "--maps", "tent,skew", "--depth", "2"],
    ["partition", TENTS, "--map", "g3"],
    ["orbits", TENTS, "--map", "tent"],
])
def test_byte_identical_output(capsys, argv):
    first = invoke(capsys, *argv)
    assert invoke(capsys, *argv) == first


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "invlim", "validate", BROKEN], capture_output=True, text=True)
    assert proc.returncode == 2 and "input error" in proc.stderr


@pytest.mark.parametrize("value", ["0.5", '"1/0"', '"half"'])
def test_inexact_numbers_are_input_errors(capsys, tmp_path, value):
    doc = tmp_path / "m.toml"
    doc.write_text(f'[graph]\nvertices = [1, 2]\nedges = [[1, 2]]\n[maps.f."1-2"]\n'
                   f'breakpoints = ["0", {value}, "1"]\nvalues = ["0", "1", "0"]\n')
    code, _, err = invoke(capsys, "validate", str(doc))
    assert code == 2 and "input error" in err
