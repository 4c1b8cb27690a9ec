import json
import subprocess
import sys

import numpy as np
import pytest

from vrthick.cli import run
from vrthick.metric import build_space, sample_circle, write_matrix_csv
from vrthick.transport import dump_measure, measure


@pytest.fixture
def files(tmp_path):
    assert run(["metric", "sample", "--kind", "circle", "--n", "8", "--out", str(tmp_path / "c8.csv")]) == 0
    dump_measure(measure({0: 0.5, 1: 0.5}), tmp_path / "mu.json")
    dump_measure(measure({3: 1.0}), tmp_path / "nu.json")
    return tmp_path


def out_of(capsys, argv, code=0):
    assert run(argv) == code
    return capsys.readouterr().out


def test_critical_scale(capsys):
    out = out_of(capsys, ["sphere", "critical", "--n", "1", "--metric", "geodesic", "--circumference", "1"])
    assert out.startswith("0.333333")
    assert float(out) == 1 / 3


def test_transport_identical_is_zero(files, capsys):
    out = out_of(capsys, ["transport", "dist", "--space", str(files / "c8.csv"),
                          "--mu", str(files / "mu.json"), "--nu", str(files / "mu.json")])
    assert float(out) == 0.0


def test_transport_dual_reports(files, capsys):
    out = out_of(capsys, ["transport", "dual", "--space", str(files / "c8.csv"),
                          "--mu", str(files / "mu.json"), "--nu", str(files / "nu.json")])
    rep = json.loads(out)
    assert rep["dual"] == pytest.approx(rep["primal"], abs=1e-9)


def test_circle_experiment(tmp_path, capsys):
    out = out_of(capsys, ["ph", "circle-experiment", "--n", "20", "--dim", "3", "--plot-data", str(tmp_path)])
    assert "3 0.35 0.4" in out.splitlines()
    series = (tmp_path / "circle_h3_convergence.csv").read_text().splitlines()
    assert series[0] == "n,birth_gap,death_gap" and len(series) == 4


def test_metric_validate_failure_exit_1(tmp_path, capsys):
    write_matrix_csv(np.array([[0, 1, 10], [1, 0, 1], [10, 1, 0]], float), tmp_path / "bad.csv")
    out = out_of(capsys, ["metric", "validate", "--matrix", str(tmp_path / "bad.csv")], code=1)
    report = json.loads(out.splitlines()[-1])
    assert report["status"] == "failed"


def test_package_error_is_json(files, capsys):
    out = out_of(capsys, ["thicken", "dist", "--space", str(files / "c8.csv"), "--scale", "0.01",
                          "--mu", str(files / "mu.json"), "--nu", str(files / "nu.json")], code=1)
    assert json.loads(out)["error"] == "NotInThickening"


def test_usage_error_exit_2():
    proc = subprocess.run([sys.executable, "-m", "vrthick", "sphere", "critical"], capture_output=True)
    assert proc.returncode == 2
    proc = subprocess.run([sys.executable, "-m", "vrthick", "nope"], capture_output=True)
    assert proc.returncode == 2


def test_complex_and_ph_files(files, capsys):
    space = str(files / "c8.csv")
    out_of(capsys, ["complex", "vr", "--space", space, "--scale", "0.25", "--out", str(files / "k.txt")])
    lines = (files / "k.txt").read_text().splitlines()
    assert len(lines) == 8 + 16 + 8  # vertices, edges at gaps 1/8 and 1/4, triangles
    out_of(capsys, ["ph", "compute", "--space", space, "--max-dim", "1", "--out", str(files / "d.csv")])
    out = out_of(capsys, ["ph", "bottleneck", "--d1", str(files / "d.csv"), "--d2", str(files / "d.csv"), "--dim", "1"])
    assert float(out) == 0.0


def test_thicken_subcommands(files, capsys):
    space = str(files / "c8.csv")
    mu = str(files / "mu.json")
    assert out_of(capsys, ["thicken", "contains", "--space", space, "--scale", "0.125", "--mu", mu]).strip() == "true"
    rep = json.loads(out_of(capsys, ["thicken", "base-dist", "--space", space, "--scale", "0.2", "--mu", mu]))
    assert rep["distance"] == pytest.approx(0.0625)
    rep = json.loads(out_of(capsys, ["thicken", "escape", "--space", space, "--scale", "0.3", "--convention",
                                     "strict", "--mu", mu, "--n", "1", "--eps", "0.01"]))
    assert rep["contained"] and rep["support_size"] == 3 and rep["distance"] < 0.01
    rep = json.loads(out_of(capsys, ["thicken", "induced", "--space", space, "--target", space,
                                     "--map", "0,0,1,1,2,2,3,3", "--mu", mu]))
    assert rep["measure"]["support"] == [0]


def test_crush_and_sphere(tmp_path, capsys):
    pts = tmp_path / "rect.csv"
    pts.write_text("# dim=2 metric=euclidean param=nan\n0.5,0\n0.25,1\n")
    dump_measure(measure({0: 0.5, 1: 0.5}), tmp_path / "m.json")
    rep = json.loads(out_of(capsys, ["thicken", "crush", "--family", "rectangle", "--space", str(pts),
                                     "--mu", str(tmp_path / "m.json"), "--t", "0"]))
    assert sorted(map(tuple, rep["support"])) == [(0.0, 0.0), (0.0, 1.0)]
    rep = json.loads(out_of(capsys, ["sphere", "betti", "--n", "2", "--field", "3"]))
    assert rep["reduced_homology"] == {"4": 1, "5": 1, "6": 1}


def test_sphere_karcher(tmp_path, capsys):
    sp = tmp_path / "s.csv"
    sp.write_text("# dim=3 metric=geodesic_sphere param=1\n1,0,0\n0.6,0.8,0\n")
    dump_measure(measure({0: 0.5, 1: 0.5}), tmp_path / "m.json")
    rep = json.loads(out_of(capsys, ["sphere", "karcher", "--space", str(sp), "--mu", str(tmp_path / "m.json")]))
    v = np.array(rep["mean"])
    assert np.allclose(v, np.array([1.6, 0.8, 0]) / np.linalg.norm([1.6, 0.8, 0]), atol=1e-9)


def test_gh_and_stability(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_matrix_csv(np.array([[0.0, 1.0], [1.0, 0.0]]), a)
    write_matrix_csv(np.array([[0.0, 4.0], [4.0, 0.0]]), b)
    assert float(out_of(capsys, ["metric", "gh", "--x", str(a), "--y", str(b)])) == 1.5
    assert json.loads(out_of(capsys, ["ph", "stability", "--x", str(a), "--y", str(b), "--dim", "0"]))["passed"]


def test_verify_single_suite(capsys):
    out = out_of(capsys, ["verify", "betti-table"])
    assert "PASS" in out


def test_determinism(tmp_path):
    cmd = [sys.executable, "-m", "vrthick", "metric", "sample", "--kind", "sphere", "--n", "12", "--seed", "4"]
    one = subprocess.run(cmd, capture_output=True, check=True).stdout
    two = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert one == two and one


def test_env_guard(tmp_path, monkeypatch, capsys):
    write_matrix_csv(build_space(sample_circle(12)).dist, tmp_path / "c.csv")
    monkeypatch.setenv("VRT_MAX_SIMPLICES", "20")
    out = out_of(capsys, ["complex", "filtration", "--space", str(tmp_path / "c.csv"), "--max-dim", "3"], code=1)
    assert json.loads(out)["error"] == "SizeGuard"


def test_verify_all_within_budget(tmp_path, capsys):
    import time

    start = time.perf_counter()
    out = out_of(capsys, ["verify", "all", "--report", str(tmp_path / "r.json")])
    assert time.perf_counter() - start < 600
    rows = out.strip().splitlines()
    assert len(rows) == 15 and all("PASS" in r for r in rows)
    assert len(json.loads((tmp_path / "r.json").read_text())) == 15
