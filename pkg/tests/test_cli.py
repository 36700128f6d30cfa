import json

import pytest

from shape_transport.cli import main


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def data(tmp_path):
    path = tmp_path / "d.json"
    assert run("simulate", "--case", 1, "--frames", 6, "--out", path) == 0
    return path


def test_simulate_writes_manifest(data):
    man = json.loads(data.with_name("d.manifest.json").read_text())
    assert man["command"] == "simulate" and man["case_id"] == 1
    doc = json.loads(data.read_text())
    assert doc["n"] == 6 and doc["metadata"]["seed"] == man["seed"]


def test_run_outputs(tmp_path, data, capsys):
    out = tmp_path / "out"
    assert run("run", "--pipeline", "dt", "--in", data, "--out-dir", out) == 0
    assert {p.name for p in out.iterdir()} == {"pca.json", "pca.svg", "reports.json", "transported.json", "manifest.json"}
    pca_doc = json.loads((out / "pca.json").read_text())
    assert sum(pca_doc["explained_ratio"][:2]) >= 0.9999
    assert pca_doc["sign_alignment"] is not None
    assert "dt:" in capsys.readouterr().out
    assert run("run", "--pipeline", "classic", "--in", data, "--out-dir", tmp_path / "c", "--local-ref", "mean") == 0
    assert run("run", "--pipeline", "lc", "--in", data, "--out-dir", tmp_path / "l", "--no-scale-final") == 0


def test_grids_and_distances(tmp_path, data, capsys):
    case2 = tmp_path / "c2.json"
    assert run("simulate", "--case", 2, "--frames", 8, "--out", case2) == 0
    out = tmp_path / "g"
    assert run("grids", "--pipeline", "dt", "--in", case2, "--frame", 3, "--out-dir", out) == 0
    assert len(list(out.glob("*.svg"))) == 5
    capsys.readouterr()
    for metric in ("procrustes", "size-and-shape", "bending", "elastic"):
        assert run("distances", "--in", data, "--metric", metric) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["metric"] == metric
    assert run("distances", "--in", data, "--metric", "procrustes", "--out", tmp_path / "dist.json") == 0
    assert (tmp_path / "dist.manifest.json").exists()


def test_exit_codes(tmp_path, data, monkeypatch):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert run("run", "--pipeline", "dt", "--in", bad, "--out-dir", tmp_path / "x") == 2
    assert run("grids", "--pipeline", "dt", "--in", data, "--frame", 99, "--out-dir", tmp_path / "x") == 2
    assert run("simulate", "--case", 9, "--out", tmp_path / "x.json") == 2
    assert run("simulate", "--case", 2, "--cycle-center", 0, 0.05, "--out", tmp_path / "x.json") == 3
    monkeypatch.setenv("SHAPE_TRANSPORT_SEED", "nope")
    assert run("simulate", "--case", 1, "--out", tmp_path / "x.json") == 2


def test_numerical_failure_exit_code(tmp_path):
    doc = {
        "format_version": "1",
        "bodies": [{"id": "a", "frames": [[[0, 0], [1, 0], [2, 0]], [[0, 0], [1, 0], [2, 0]]]},
                   {"id": "b", "frames": [[[0, 0], [1, 0], [2, 0]], [[0, 0], [1, 0], [2, 0]]]}],
    }
    p = tmp_path / "line.json"
    p.write_text(json.dumps(doc))
    assert run("run", "--pipeline", "dt", "--in", p, "--out-dir", tmp_path / "o") == 3


def test_seed_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SHAPE_TRANSPORT_SEED", "77")
    assert run("simulate", "--case", 1, "--seed", 5, "--frames", 4, "--out", tmp_path / "e.json") == 0
    assert json.loads((tmp_path / "e.json").read_text())["metadata"]["seed"] == 77


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(f'[simulate]\ncase = 2\nframes = 5\nout = "{(tmp_path / "c.json").as_posix()}"\n')
    assert run("--config", cfg, "simulate") == 0
    doc = json.loads((tmp_path / "c.json").read_text())
    assert doc["n"] == 5 and doc["metadata"]["case_id"] == 2
    # explicit flags win over the file
    assert run("--config", cfg, "simulate", "--frames", 7) == 0
    assert json.loads((tmp_path / "c.json").read_text())["n"] == 7
    cfg.write_text("[simulate]\nbogus = 1\n")
    assert run("--config", cfg, "simulate", "--case", 1, "--out", tmp_path / "z.json") == 2
    cfg.write_text("[simulate\n")
    assert run("--config", cfg, "simulate", "--case", 1, "--out", tmp_path / "z.json") == 2
