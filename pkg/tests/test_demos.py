import pathlib
import runpy

import pytest

DEMOS = sorted((pathlib.Path(__file__).parent.parent / "demos").glob("*.py"))


@pytest.mark.parametrize("path", DEMOS, ids=[p.stem for p in DEMOS])
def test_demo_runs(path, capsys):
    # run_name other than __main__ skips the interactive plotting block
    runpy.run_path(str(path), run_name="demo")
    assert capsys.readouterr().out
