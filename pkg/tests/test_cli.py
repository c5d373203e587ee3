import json

import pytest

from dgatiyah.cli import main, run
from dgatiyah.manifest import ManifestError, load, load_dict, shipped_manifests


def test_shipped_manifests_load():
    names = shipped_manifests()
    assert {"abelian3", "solvable2", "sl2", "heisenberg3", "r11", "emin"} <= set(names)
    for n in names:
        load(n)


def test_keys_accept_indices():
    by_name = load_dict({"coordinates": [{"name": "x", "degree": 0}, {"name": "xi", "degree": 1}],
                         "Q": {"x": "xi"}, "connection": {"xi,x,xi": "x"}})
    by_index = load_dict({"coordinates": [{"name": "x", "degree": 0}, {"name": "xi", "degree": 1}],
                          "Q": {"1": "xi"}, "connection": {"2,1,2": "x"}})
    assert by_name.manifold == by_index.manifold
    assert by_name.connection == by_index.connection


@pytest.mark.parametrize("data,pointer", [
    ({"coordinates": [{"name": "x", "degree": "a"}], "Q": {}}, "/coordinates/0/degree"),
    ({"coordinates": [{"name": "x", "degree": 0}], "Q": {"x": "x^"}}, "/Q/x"),
    ({"coordinates": [{"name": "x", "degree": 0}], "Q": {"y": "x"}}, "/Q/y"),
    ({"coordinates": [{"name": "x", "degree": 0}], "Q": {}, "connection": {"x,x": "1"}},
     "/connection/x,x"),
    ({"lie_algebra": {"dim": 2, "structure_constants": [[1, 2, 3, 1]]}},
     "/lie_algebra/structure_constants"),
    ({"lie_algebra": {"dim": 2, "structure_constants": []}, "Q": {}}, ""),
])
def test_manifest_errors(data, pointer):
    with pytest.raises(ManifestError) as err:
        load_dict(data)
    assert err.value.pointer == pointer


def test_exit_codes(tmp_path, capsys):
    assert main(["validate", "solvable2"]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"lie_algebra": {"dim": 3, "structure_constants": [
        [1, 2, 3, "1"], [2, 3, 1, "1"], [1, 3, 3, "1"]]}}))
    capsys.readouterr()
    assert main(["validate", str(bad)]) == 1
    assert json.loads(capsys.readouterr().out)["passed"] is False
    assert main(["brackets", "r11"]) == 2
    assert "torsion-free" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert main(["validate", str(broken)]) == 2


def test_validate_failure_has_witness(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"lie_algebra": {"dim": 3, "structure_constants": [
        [1, 2, 3, "1"], [2, 3, 1, "1"], [1, 3, 3, "1"]]}}))
    code, report, _ = run(["validate", str(bad)])
    assert code == 1
    witnesses = report["checks"][0]["failures"]
    assert {"jacobi_triple": [1, 2, 3], "component": 1} in witnesses


def test_atiyah_on_abelian():
    code, report, _ = run(["atiyah", "abelian3"])
    assert code == 0
    assert report["checks"][0]["data"]["atiyah"] == {}


def test_linfty_reports_sign():
    code, report, _ = run(["linfty-check", "sl2", "--max-arity", "3"])
    assert code == 0
    assert report["conventions"]["jacobiator_sign"] == 1
    assert report["conventions"]["sigma"] == -1


def test_cohomology_command():
    code, report, _ = run(["cohomology", "sl2", "--space", "omega:2", "--degree", "2"])
    assert code == 0
    data = report["checks"][0]["data"]
    assert data["dimension"] == data["invariants_oracle"] == 1


def test_duflo_command():
    code, report, _ = run(["duflo", "solvable2", "--order", "2"])
    assert code == 0
    assert report["checks"][0]["data"]["todd_symmetric"] == "1/12*x1^2 + 1/2*x1 + 1"


def test_timing_goes_to_stderr(capsys):
    main(["--timing", "lemma-dog", "sl2"])
    out = capsys.readouterr()
    assert "wall time" in out.err and "wall time" not in out.out
    json.loads(out.out)
