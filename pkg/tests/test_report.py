import json

from hecke_pm.report import Report, file_digest


def test_record_keys_use_hyphens():
    report = Report(command="sturm")
    report.record("sturm", level=52, weight=2, sturm_bound=14, verified=True)
    fields = report.records[0].fields
    assert fields == {"level": "52", "weight": "2", "sturm-bound": "14", "verified": "yes"}


def test_render_text():
    report = Report(command="obstruct")
    report.record("obstruction", verdict="blocked", outside_base=[2])
    report.warn("p = 3: searching anyway")
    report.warn("p = 3: searching anyway")
    text = report.render_text()
    assert text.startswith("command: obstruct\n")
    assert "[obstruction]\nverdict: blocked\noutside-base: [2]\n" in text
    assert text.count("- p = 3: searching anyway") == 1
    assert "exit-code: 0" in text


def test_render_json_round_trips():
    report = Report(command="classify", exit_code=1)
    report.record("system", values={2: 0, 3: 1})
    data = json.loads(report.render_json())
    assert data["command"] == "classify"
    assert data["exit_code"] == 1
    assert data["records"][0]["fields"]["values"] == "{2: 0, 3: 1}"
    assert Report.from_json(report.render_json()) == report


def test_input_digest(tmp_path):
    path = tmp_path / "S_2_G0_26.basis"
    path.write_text("space\n")
    report = Report(command="classify")
    report.add_input(path)
    assert report.inputs == {"S_2_G0_26.basis": file_digest(path)}
    assert len(report.inputs["S_2_G0_26.basis"]) == 64
    assert f"input: S_2_G0_26.basis sha256={file_digest(path)}" in report.render_text()
