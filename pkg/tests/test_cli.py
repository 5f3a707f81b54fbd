import json

import pytest

from conftest import V_AS, V_S
from cvcoherence.cli import main
from cvcoherence.core import make_epr_state, save_state


@pytest.fixture
def epr_file(tmp_path):
    path = tmp_path / "epr.json"
    save_state(make_epr_state(V_S, V_AS), path)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_coherence(capsys, epr_file):
    code, out, _ = run(capsys, "coherence", epr_file)
    assert code == 0
    report = json.loads(out)
    assert report["coherence_bits"] == pytest.approx(1.1482788396, abs=1e-9)


def test_ppt(capsys, epr_file):
    code, out, _ = run(capsys, "ppt", epr_file)
    assert json.loads(out)["entangled"] is True


def test_simulate_then_reconstruct(capsys, tmp_path, epr_file):
    code, out, _ = run(capsys, "simulate", epr_file, "--n", 20000, "--seed", 4, "--outdir", tmp_path / "s")
    paths = out.split()
    assert code == 0 and len(paths) == 2
    code, out, _ = run(capsys, "reconstruct", *paths)
    payload = json.loads(out)
    assert payload["ordering"] == "XYXY"
    assert payload["coherence"]["coherence_bits"] == pytest.approx(1.148, abs=0.05)
    assert "ppt" in payload


def test_simulate_bad_plan(capsys, epr_file, tmp_path):
    code, _, err = run(capsys, "simulate", epr_file, "--n", 10, "--plan", "X1,Y1", "--outdir", tmp_path)
    assert code == 1 and "simultaneously" in err


def test_sweep_and_threshold(capsys, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[sweep]\nscenario = squeezed_noise\nfixed_loss = 0.4\ngrid = 0, 5, 6\n")
    code, out, _ = run(capsys, "sweep", cfg)
    assert code == 0 and out.splitlines()[0].startswith("excess_noise,")
    code, out, _ = run(capsys, "sweep", cfg, "--out", tmp_path / "r.csv")
    assert (tmp_path / "r.csv").exists() and (tmp_path / "r.json").exists()
    code, out, _ = run(capsys, "threshold", cfg)
    assert json.loads(out)["delta"] == pytest.approx(0.7395, abs=1e-4)


def test_figures(capsys, tmp_path):
    code, out, _ = run(capsys, "figures", "--outdir", tmp_path, "--points", 5)
    assert code == 0
    assert len(out.split()) == 10


def test_bad_state_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n_modes": 1, "ordering": "XYXY", "matrix": [[0.5, 0], [0, 0.5]]}))
    code, _, err = run(capsys, "coherence", path)
    assert code == 1 and "error" in err
