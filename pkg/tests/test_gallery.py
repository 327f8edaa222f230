import pathlib
import runpy

import pytest

GALLERY = sorted((pathlib.Path(__file__).parent.parent / "gallery").glob("*.py"))


@pytest.mark.parametrize("script", GALLERY, ids=lambda p: p.stem)
def test_gallery_script_runs(script, capsys):
    runpy.run_path(str(script), run_name="__main__")
    assert capsys.readouterr().out
