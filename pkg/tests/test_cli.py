import csv
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from hdmr.cli import main
from hdmr.fileio import SampleSetError, format_sample_set, read_sample_set, write_sample_set
from hdmr.manifold import sample_vmf
from hdmr.mixture import DiracMixture

E3 = np.array([0.0, 0.0, 1.0])


@pytest.fixture
def samples(tmp_path):
    path = tmp_path / "in.csv"
    src = sample_vmf(3, E3, 10.0, 400, 1)
    write_sample_set(path, DiracMixture.from_unnormalized(src.points, np.linspace(1, 2, 400)))
    return path


def test_round_trip_is_exact(tmp_path, samples):
    text = samples.read_text()
    mix, weighted = read_sample_set(samples)
    assert weighted
    assert format_sample_set(mix, weighted) == text
    out = tmp_path / "u.csv"
    write_sample_set(out, DiracMixture.uniform(mix.points))
    assert out.read_text().splitlines()[0] == "# d=3,m=400,weighted=0"
    again, w = read_sample_set(out)
    assert not w
    np.testing.assert_array_equal(again.points, mix.points)


@pytest.mark.parametrize("row,msg", [("1,2", "expected 4 values"), ("a,0,1,0.5", "non-numeric"),
                                     ("0,0,2,0.5", "norm"), ("0,0,1,-0.5", "negative weight")])
def test_malformed_row_is_named(tmp_path, row, msg):
    path = tmp_path / "bad.csv"
    path.write_text("# d=3,m=2,weighted=1\n0,0,1,0.5\n" + row + "\n")
    with pytest.raises(SampleSetError, match=f"bad.csv:3: .*{msg}"):
        read_sample_set(path)


def test_weights_renormalized_only_when_close(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("# d=3,m=2,weighted=1\n0,0,1,0.5\n1,0,0,0.5000004\n")
    mix, _ = read_sample_set(path)
    assert mix.weights.sum() == pytest.approx(1.0, abs=1e-15)
    path.write_text("# d=3,m=2,weighted=1\n0,0,1,0.5\n1,0,0,0.6\n")
    with pytest.raises(SampleSetError, match="weights sum"):
        read_sample_set(path)
    path.write_text("# d=3,m=3,weighted=0\n0,0,1\n")
    with pytest.raises(SampleSetError, match="m=3"):
        read_sample_set(path)
    path.write_text("d=3\n")
    with pytest.raises(SampleSetError, match=":1:"):
        read_sample_set(path)


def test_reapprox_command(tmp_path, samples, capsys):
    out = tmp_path / "t.csv"
    assert main(["reapprox", "--in", str(samples), "--n", "20", "--out", str(out), "--seed", "4"]) == 0
    tgt, weighted = read_sample_set(out)
    assert tgt.m == 20 and not weighted
    np.testing.assert_allclose(np.linalg.norm(tgt.points, axis=0), 1.0, atol=1e-15)
    report = json.loads((tmp_path / "t.report.json").read_text())
    assert report["seed"] == 4 and report["D_final"] <= report["D_init"]
    assert report["epsilon"] > 2 and report["solver"]["iterations"] >= 1
    assert report["config"]["solver"]["grad_tol"] == 1e-8  # resolved defaults are logged
    first = out.read_bytes(), (tmp_path / "t.report.json").read_bytes()
    assert main(["reapprox", "--in", str(samples), "--n", "20", "--out", str(out), "--seed", "4"]) == 0
    assert (out.read_bytes(), (tmp_path / "t.report.json").read_bytes()) == first


def test_reapprox_bad_input_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("# d=3,m=1,weighted=0\n0,0\n")
    assert main(["reapprox", "--in", str(bad), "--n", "2", "--out", str(tmp_path / "o.csv")]) == 2
    assert "bad.csv:2" in capsys.readouterr().err
    assert main(["reapprox", "--in", str(tmp_path / "missing.csv"), "--n", "2",
                 "--out", str(tmp_path / "o.csv")]) == 2
    assert main(["reapprox", "--in", str(bad), "--out", str(tmp_path / "o.csv")]) == 2


def test_reconstruct_with_and_without_reference(tmp_path, samples):
    out = tmp_path / "m.json"
    assert main(["reconstruct", "--in", str(samples), "--n", "6", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert len(res["means"]) == 6 and res["lambda"] > 0 and "hellinger" not in res
    cfg = tmp_path / "c.yaml"
    cfg.write_text("reconstruct:\n  lattice_size: 5000\n  reference:\n    type: vmf\n"
                   "    mean: [0, 0, 1]\n    concentration: 10\n")
    assert main(["reconstruct", "--in", str(samples), "--n", "6", "--out", str(out), "--config", str(cfg)]) == 0
    res = json.loads(out.read_text())
    assert 0 <= res["hellinger"] < 0.3


def test_reconstruct_single_component_recovers_concentration(tmp_path):
    path = tmp_path / "v.csv"
    write_sample_set(path, sample_vmf(3, E3, 20.0, 20000, 7))
    cfg = tmp_path / "c.yaml"
    cfg.write_text("reapprox:\n  compute_d3: false\n")
    out = tmp_path / "m.json"
    assert main(["reconstruct", "--in", str(path), "--n", "1", "--out", str(out), "--config", str(cfg)]) == 0
    assert abs(json.loads(out.read_text())["lambda"] - 20) <= 3


def test_config_errors_are_listed_together(tmp_path, samples, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("seed: -1\nbogus: 1\nsolver:\n  rho_accept: 0.5\nsim:\n  num_runs: 0\n"
                   "reconstruct:\n  reference: {type: cube}\n")
    assert main(["reapprox", "--in", str(samples), "--n", "3", "--out", str(tmp_path / "o.csv"),
                 "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    for part in ("unknown key 'bogus'", "seed", "rho_accept", "num_runs", "reference.type"):
        assert part in err
    assert err.count("config error:") >= 5


def test_oracle_suites(tmp_path, capsys):
    out = tmp_path / "o.json"
    assert main(["oracle", "hcvmd-unit", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["passed"] and {"d", "epsilon", "delta", "Q_closed", "Q_numeric", "rel_err"} <= set(data["rows"][0])
    assert main(["oracle", "nope"]) == 2
    assert "hcvmd-unit" in capsys.readouterr().err


def test_filter_sim_small(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("sim:\n  source_size: 400\n  n_w_list: [5, 10]\n  pf_particles_list: [50]\n")
    out = tmp_path / "r.csv"
    assert main(["filter-sim", "--config", str(cfg), "--runs", "2", "--steps", "3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [(r["method"], r["samples"]) for r in rows] == [("hrdf", "5"), ("hrdf", "10"), ("pf", "50")]
    assert all(r["runs"] == "2" and r["steps"] == "3" and r["seed"] == "0" for r in rows)
    side = json.loads((tmp_path / "r.json").read_text())
    assert side["config"]["sim"]["num_runs"] == 2 and len(side["series"]["hrdf"]["samples"]) == 2


def test_bench_uses_full_scale_defaults(monkeypatch, tmp_path):
    seen = {}

    def fake(cfg):
        seen["cfg"] = cfg
        return [], [], {}

    monkeypatch.setattr("hdmr.cli.benchmark", fake)
    assert main(["bench", "--out", str(tmp_path / "b.csv")]) == 0
    assert seen["cfg"].num_runs == 5000 and seen["cfg"].n_w_list == [30, 50, 100, 200, 300, 500, 1000]
    assert main(["bench", "--runs", "7", "--out", str(tmp_path / "b.csv")]) == 0
    assert seen["cfg"].num_runs == 7


def test_filter_sim_smoke_under_a_minute(tmp_path):
    out = tmp_path / "r.csv"
    t0 = time.perf_counter()
    subprocess.run([sys.executable, "-m", "hdmr.cli", "filter-sim", "--runs", "10", "--out", str(out)],
                   check=True, cwd=tmp_path)
    assert time.perf_counter() - t0 < 60
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 8 and all(float(r["runtime_ms_per_step"]) > 0 for r in rows)
