import runpy
from pathlib import Path

import numpy as np
import pytest

DEMOS = Path(__file__).resolve().parent.parent / "demos"


@pytest.mark.parametrize("script", sorted(p.name for p in DEMOS.glob("0*.py")))
def test_demo_runs(script, capsys):
    runpy.run_path(str(DEMOS / script), run_name="__main__")
    assert capsys.readouterr().out


def test_export_script(tmp_path, monkeypatch):
    rng = np.random.default_rng(0)
    np.save(tmp_path / "t.npy", rng.standard_normal((5, 3)))
    np.save(tmp_path / "a.npy", rng.random((2, 5)))
    np.save(tmp_path / "q.npy", rng.standard_normal(3))
    out = tmp_path / "out"
    monkeypatch.setattr("sys.argv", ["x", *(str(tmp_path / f) for f in ("t.npy", "a.npy", "q.npy")), str(out)])
    runpy.run_path(str(DEMOS / "export_tensors.py"), run_name="__main__")
    assert sorted(p.name for p in out.iterdir()) == ["attn.fsrt", "query.fsrt", "tokens.fsrt"]
