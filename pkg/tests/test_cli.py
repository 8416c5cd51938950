import json

import pytest

from hecke_pm.cli import main, run


def _fields(report, kind):
    return [r.fields for r in report.records if r.kind == kind]


def test_sturm_bounds():
    code, report, _ = run(["sturm", "52", "2", "--g0"])
    assert code == 0
    assert _fields(report, "sturm")[0]["bound"] == "14"
    code, report, _ = run(["sturm", "52", "2", "--g1"])
    assert _fields(report, "sturm")[0]["bound"] == "336"


def test_bad_arguments_exit_with_two():
    code, report, args = run(["sturm", "x", "2"])
    assert code == 2
    assert args is None
    assert report.warnings
    assert run(["frobnicate"])[0] == 2
    assert run(["sturm", "52", "2", "--g0", "--g1"])[0] == 2


def test_missing_basis_file(tmp_path):
    code, report, _ = run(["classify", str(tmp_path / "S_2_G0_1.basis"), "--p", "3", "--m", "1"])
    assert code == 2
    assert any("BasisError" in w for w in report.warnings)


def test_classify(fixtures_dir):
    code, report, _ = run(["classify", str(fixtures_dir / "S_2_G0_52.basis"), "--p", "3", "--m", "1"])
    assert code == 0
    summary = _fields(report, "summary")[0]
    assert summary["systems"] == "2"
    assert summary["forms"] == "6"
    assert "S_2_G0_52.basis" in report.inputs
    assert "S_2_G0_52.catalog" in report.inputs
    assert all(s["provenance"] == "strong" for s in _fields(report, "system"))


def test_halfsum(fixtures_dir):
    code, report, _ = run(["halfsum", str(fixtures_dir / "S_2_G0_52.basis"), "--f", "f", "--g", "gt", "--p", "3"])
    assert code == 0
    half = _fields(report, "half-sum")[0]
    assert half["verified"] == "yes"
    assert half["liftable"] == "no"
    assert half["away-from"] == "156"
    assert _fields(report, "strong-match")[0]["matches"] == "[]"


def test_halfsum_with_unknown_label(fixtures_dir):
    code, report, _ = run(["halfsum", str(fixtures_dir / "S_2_G0_52.basis"), "--f", "f", "--g", "zz", "--p", "3"])
    assert code == 2
    assert any("zz" in w for w in report.warnings)


def test_obstruct(fixtures_dir):
    code, report, _ = run(["obstruct", "--level", "63", "--p", "3", "--m", "2", "--char", "9:2"])
    assert code == 0
    decomposition = _fields(report, "decomposition")[0]
    assert decomposition["i"] == "0"
    assert decomposition["s"] == "1"
    obstruction = _fields(report, "obstruction")[0]
    assert obstruction["verdict"] == "blocked"
    assert obstruction["ring-size"] == "27"
    assert obstruction["base-image-size"] == "9"
    assert run(["obstruct", "--level", "20", "--p", "3", "--m", "2", "--char", "9:2"])[0] == 2


def test_divide(fixtures_dir):
    catalog = fixtures_dir / "S_2_G0_52.catalog"
    basis = fixtures_dir / "S_2_G0_52.basis"
    code, report, _ = run(
        ["divide", "--form", f"{catalog}:f", "--form", f"{catalog}:gt*-1", "--pi", "3", "--m", "1", "--basis", str(basis)]
    )
    assert code == 0
    assert _fields(report, "divided-congruence")[0]["truncation"] == "400"
    assert _fields(report, "coordinates")
    code, _, _ = run(["divide", "--form", f"{catalog}:f", "--form", f"{catalog}:gt", "--pi", "3", "--m", "1"])
    assert code == 1


def test_eisenstein():
    code, report, _ = run(["eisenstein", "--p", "5", "--m", "2"])
    assert code == 0
    fields = _fields(report, "eisenstein")[0]
    assert fields["factor"] == "240"
    assert fields["power-weight"] == "20"
    assert fields["power-congruent-to-one"] == "yes"


def test_roundtrip(fixtures_dir):
    code, report, _ = run(
        ["--seed", "5", "roundtrip", str(fixtures_dir / "S_2_G0_26.basis"), "--p", "5", "--m", "2", "--count", "3", "--bound", "40"]
    )
    assert code == 0
    summary = _fields(report, "roundtrip")[0]
    assert summary["recovered"] == "3"
    assert all(p["found-weight"] == "2" for p in _fields(report, "planted"))


def test_main_writes_json(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--json", "sturm", "26", "2"])
    assert info.value.code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["records"][0]["fields"]["bound"] == "7"
    assert data["exit_code"] == 0


def test_main_writes_text(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sturm", "x"])
    assert info.value.code == 2
    assert "exit-code: 2" in capsys.readouterr().out
