import csv
import json

import pytest

from nodeglue.cli import main, read_config, to_json


def run_json(argv, capsys):
    code = main(argv + ["--json", "-", "--no-timing"])
    out = capsys.readouterr().out
    return code, json.loads(out), out


def test_central_m3_passes(capsys):
    code, rep, _ = run_json(["central", "--m", "3"], capsys)
    assert code == 0
    assert rep["verdict"] == "pass"
    assert rep["command"] == "central"
    assert all(c["pass"] for c in rep["checks"])
    names = [c["name"] for c in rep["checks"]]
    assert "Z_minus vanishes" in names and "sum p_i H^A_i" in names


def test_report_schema_and_tolerances(capsys):
    _, rep, _ = run_json(["central", "--m", "4"], capsys)
    assert set(rep) >= {"command", "config", "checks", "verdict", "seconds"}
    for c in rep["checks"]:
        assert set(c) == {"name", "expected", "actual", "tol", "pass"}
    # every numeric comparison carries its tolerance
    assert all(c["tol"] is not None for c in rep["checks"])
    assert rep["verdict"] == ("pass" if all(c["pass"] for c in rep["checks"]) else "fail")


@pytest.mark.parametrize("m", ["1", "25"])
def test_central_rejects_bad_m(m, capsys):
    assert main(["central", "--m", m]) == 2
    assert "--m" in capsys.readouterr().err


def test_unknown_command_is_usage_error(capsys):
    assert main(["bogus"]) == 2


def test_central_mesh(tmp_path, capsys):
    path = tmp_path / "graphs.obj"
    assert main(["central", "--m", "3", "--grid", "8", "--mesh", str(path)]) == 0
    lines = path.read_text().splitlines()
    verts = [ln for ln in lines if ln.startswith("v ")]
    objs = [ln for ln in lines if ln.startswith("o ")]
    assert len(objs) == 2
    assert len(verts) == 2 * 8 * 8
    for ln in verts[:5]:
        assert len([float(x) for x in ln.split()[1:]]) == 3
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert faces and all(len(f.split()) == 4 for f in faces)
    n = len(verts)
    assert all(1 <= int(i) <= n for f in faces for i in f.split()[1:])
    with open(path.with_suffix(".csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["object", "vertex", "gauss_curvature", "height"]
    assert len(rows) == n + 1


def test_json_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["central", "--m", "5", "--json", str(p), "--no-timing"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["seconds"] == 0


def test_to_json_round_trips_doubles():
    x = 0.1 + 0.2
    text = to_json({"b": x, "a": [1j, 2]})
    assert text.index('"a"') < text.index('"b"')
    data = json.loads(text)
    assert data["b"] == x
    assert data["a"] == [[0.0, 1.0], 2]


def test_lemma1_m3(capsys):
    code, rep, _ = run_json(["lemma1", "--m", "3"], capsys)
    assert code == 0
    names = {c["name"] for c in rep["checks"]}
    assert {"dZ-/dbeta-", "dZ+/dbeta+", "dV/dgamma_dot", "dH_B/dpdot+", "kernel dimension"} <= names


def test_lemma1_m2_v_block(capsys):
    _, rep, _ = run_json(["lemma1", "--m", "2"], capsys)
    vb = next(c for c in rep["checks"] if c["name"].startswith("V block singular values (unconstrained"))
    assert vb["pass"]
    assert vb["actual"] == pytest.approx([6.283185307179586, 2.0], abs=1e-6)


def test_lemma1_coarse_step_warns(capsys):
    _, rep, _ = run_json(["lemma1", "--m", "2", "--step", "1e-2"], capsys)
    assert any("warning" in n and "coarse" in n for n in rep["notes"])


def test_lemma1_noisy_step_exits_3(capsys):
    assert main(["lemma1", "--m", "3", "--step", "0.1"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_lemma1_m_cap():
    assert main(["lemma1", "--m", "9"]) == 2


def test_tower_minimal_csv(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert main(["tower", "--schedule", "minimal", "--steps", "10", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    row5 = next(r for r in rows if r["n"] == "5")
    assert float(row5["c_n_S_n"]) == 2.1875
    assert row5["m_n"] == "9"


def test_tower_invalid_schedule(capsys):
    assert main(["tower", "--schedule", "3,4"]) == 2
    assert "index 3" in capsys.readouterr().err


def test_tower_geometric_converges(capsys):
    _, rep, _ = run_json(["tower", "--schedule", "geometric:2", "--steps", "20"], capsys)
    verdict = next(c for c in rep["checks"] if c["name"] == "series verdict")
    assert verdict["actual"] == "convergent"


def test_hurwitz_examples(capsys):
    code, rep, _ = run_json(["hurwitz", "--t", "0.01"], capsys)
    assert code == 0
    by = {c["name"]: c for c in rep["checks"]}
    assert by["same branching values"]["actual"] is True
    assert by["profiles isomorphic"]["actual"] is False
    _, rep, _ = run_json(["hurwitz", "--t", "0.1"], capsys)
    vals = next(c for c in rep["checks"] if c["name"] == "f_t critical values")["actual"]
    assert [v[0] for v in vals] == pytest.approx([-0.0027, 0, 0], abs=1e-15)
    assert any("-0.0027" in n for n in rep["notes"])


@pytest.mark.parametrize("t", ["0", "0.6"])
def test_hurwitz_rejects_bad_t(t):
    assert main(["hurwitz", "--t", t]) == 2


def test_figure_sketch(tmp_path, capsys):
    path = tmp_path / "sketch.obj"
    assert main(["figure", "--m", "3", "--t", "0.05", "--grid", "16", "--mesh", str(path)]) == 0
    objs = [ln for ln in path.read_text().splitlines() if ln.startswith("o ")]
    assert objs == ["o catenoid", "o limit_graph_minus", "o limit_graph_plus"]
    assert "illustrative" in capsys.readouterr().out


def test_figure_needs_mesh():
    assert main(["figure"]) == 2


def test_config_file_and_override(tmp_path, capsys):
    conf = tmp_path / "run.cfg"
    conf.write_text("# tower run\nschedule = geometric:2\nsteps = 12\n")
    assert read_config(str(conf)) == {"schedule": "geometric:2", "steps": 12}
    _, rep, _ = run_json(["tower", "--config", str(conf)], capsys)
    assert rep["config"]["schedule"] == "geometric:2" and rep["config"]["steps"] == 12
    _, rep, _ = run_json(["tower", "--config", str(conf), "--steps", "15"], capsys)
    assert rep["config"]["steps"] == 15


def test_bad_config_is_usage_error(tmp_path):
    conf = tmp_path / "bad.cfg"
    conf.write_text("colour = red\n")
    assert main(["central", "--config", str(conf)]) == 2
    assert main(["central", "--tol", "-1"]) == 2
    assert main(["central", "--mesh", str(tmp_path / "missing" / "x.obj")]) == 2
