import importlib.util
from pathlib import Path

import pytest

SCRIPT = Path(__file__).resolve().parent.parent / "run-batch.py"


@pytest.fixture(scope="module")
def batch():
    spec = importlib.util.spec_from_file_location("run_batch", SCRIPT)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


async def test_run_command_reports_exit_code_and_output(batch):
    code, output = await batch.run_command(("sturm", "52", "2", "--g0"), "none")
    assert code == 0
    assert "bound: 14" in output


async def test_run_command_input_error(batch):
    code, _ = await batch.run_command(("sturm", "x"), "none")
    assert code == 2


async def test_run_batch_checks_expected_exits(batch, capsys):
    runs = [
        batch.BatchRun("sturm", ("sturm", "26", "2"), markers=("bound:",)),
        batch.BatchRun("bad level", ("sturm", "x"), expected_exit=2),
        batch.BatchRun("wrong expectation", ("sturm", "26", "2"), expected_exit=1),
    ]
    results = await batch.run_batch(runs)
    assert [ok for _, ok in results] == [True, True, False]
    assert "bound: 7" in capsys.readouterr().out
