import pathlib
import runpy

import pytest

SCRIPTS = sorted((pathlib.Path(__file__).parents[1] / "notebooks").glob("[0-9]*.py"))


@pytest.mark.parametrize("script", SCRIPTS, ids=lambda p: p.stem)
def test_narrative_script_runs(script, capsys):
    runpy.run_path(str(script), run_name="__main__")
    assert capsys.readouterr().out


def test_every_script_is_collected():
    assert len(SCRIPTS) == 6
