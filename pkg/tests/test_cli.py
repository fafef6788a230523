import json
import os

import pytest

from twinbeam import cli
from twinbeam.scenario import Scenario


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text()) if (out / "summary.json").exists() else None
    return code, out, summary


def write(tmp_path, sc, name="sc.json"):
    p = tmp_path / name
    p.write_text(sc.to_json())
    return str(p)


@pytest.fixture
def small_bench(tmp_path, scenario):
    # 1000 averages keeps the CLI tests quick
    return write(tmp_path, scenario.with_value("bench.n_samples", 250_250), "small.json")


def test_laser(tmp_path):
    code, out, s = run(tmp_path, "laser", "--scenario", "paper_fig1")
    assert code == 0
    assert s["output"][0]["green_linear_w"] == pytest.approx(0.1152)
    rows = (out / "laser.csv").read_text().splitlines()
    assert rows[0] == "pump_w,green_linear_w,green_shg_w"
    lin = [float(r.split(",")[1]) for r in rows[1:]]
    assert len(lin) == 21 and lin == sorted(lin)


def test_laser_pump_option(tmp_path):
    code, _, s = run(tmp_path, "laser", "--scenario", "paper_fig1", "--pump", "360")
    assert code == 0
    assert s["output"][0]["green_linear_w"] == 0.0


def test_cavity(tmp_path):
    code, out, s = run(tmp_path, "cavity", "--scenario", "paper_fig1")
    assert code == 0 and s["stable"]
    assert 30e-6 <= s["planes"]["focus"]["tangential"]["radius_m"] <= 50e-6
    assert 150e-6 <= s["planes"]["rod"]["tangential"]["radius_m"] <= 260e-6
    assert 0 < s["mode_match"]["efficiency"] <= 1


def test_unstable_cavity_report(tmp_path, scenario):
    path = write(tmp_path, scenario.with_value("ring_cavity.concave_separation_m", 0.2))
    code, _, s = run(tmp_path, "cavity", "--scenario", path)
    assert code == 3
    assert s["stable"] is False
    assert max(abs(v) for v in s["stability"].values()) >= 1


def test_opo(tmp_path):
    code, out, s = run(tmp_path, "opo", "--scenario", "paper_fig1")
    assert code == 0
    assert s["escape_efficiency"] == pytest.approx(0.893, abs=1e-3)
    assert len(s["non_reproductions"]) == 2
    assert all(n.get("provenance") for n in s["non_reproductions"])
    assert (out / "opo_spectrum.csv").read_text().startswith("freq_hz,psd_rel_shot,psd_db\n")


def test_lock_and_unlock(tmp_path, scenario):
    code, out, s = run(tmp_path, "lock", "--scenario", "paper_fig1", "--duration", "0.3")
    assert code == 0 and s["locked"]
    path = write(tmp_path, scenario.with_value("lock.kp", 0.0).with_value("lock.ki", 0.0).with_value("lock.drift_rate_hz_per_s", 2e8))
    code, _, s = run(tmp_path, "lock", "--scenario", path, "--duration", "0.2", name="bad")
    assert code == 3
    assert s["locked"] is False


def test_bench(tmp_path, small_bench):
    code, out, s = run(tmp_path, "bench", "--scenario", small_bench)
    assert code == 0
    assert s["n_averages"] == 1000
    assert (out / "fig3.csv").read_text().startswith("freq_hz,shot_db,diff_db\n")
    assert (out / "squeezing.csv").exists()


def test_sweep(tmp_path):
    code, out, s = run(tmp_path, "sweep", "--scenario", "paper_fig1", "--param", "opo.t1", "--min", "0.01", "--max", "0.1", "--steps", "10")
    assert code == 0
    assert s["optimum"] == pytest.approx(0.1)
    assert (out / "sweep.csv").exists()


@pytest.mark.parametrize("cmd", ["laser", "cavity", "opo", "lock", "bench", "sweep"])
def test_deterministic_outputs(tmp_path, small_bench, cmd):
    extra = ["--duration", "0.05"] if cmd == "lock" else []
    _, a, _ = run(tmp_path, cmd, "--scenario", small_bench, *extra, name="a")
    _, b, _ = run(tmp_path, cmd, "--scenario", small_bench, *extra, name="b")
    files = sorted(os.listdir(a))
    assert files == sorted(os.listdir(b))
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_seed_precedence(tmp_path, monkeypatch):
    _, _, s = run(tmp_path, "lock", "--scenario", "paper_fig1", "--duration", "0.05", name="a")
    assert s["seed"] == 1080
    monkeypatch.setenv("TWINBEAM_SEED", "5")
    _, _, s = run(tmp_path, "lock", "--scenario", "paper_fig1", "--duration", "0.05", name="b")
    assert s["seed"] == 5
    _, _, s = run(tmp_path, "lock", "--scenario", "paper_fig1", "--duration", "0.05", "--seed", "9", name="c")
    assert s["seed"] == 9


def test_figures(tmp_path):
    code, out, _ = run(tmp_path, "laser", "--scenario", "paper_fig1", "--figures")
    assert code == 0
    assert (out / "laser.png").read_bytes()[:4] == b"\x89PNG"
    _, out2, _ = run(tmp_path, "laser", "--scenario", "paper_fig1", name="plain")
    assert not (out2 / "laser.png").exists()


def test_exit_code_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"opo": {"t1": 0.03, "oops": 1}}')
    code, _, s = run(tmp_path, "opo", "--scenario", str(bad))
    assert code == 2 and s is None
    assert "opo.oops" in capsys.readouterr().err


def test_exit_code_physics(tmp_path, scenario):
    code, _, _ = run(tmp_path, "opo", "--scenario", write(tmp_path, scenario.with_value("opo.t1", 1.5)))
    assert code == 3


def test_exit_code_analysis(tmp_path, scenario):
    code, _, _ = run(tmp_path, "bench", "--scenario", write(tmp_path, scenario.with_value("bench.n_samples", 20_000)))
    assert code == 4
    code, _, _ = run(tmp_path, "bench", "--scenario", write(tmp_path, scenario.with_value("bench.sample_rate_hz", 1.5e7), "b.json"), name="x")
    assert code == 4


def test_atomic_write_leaves_no_temp(tmp_path):
    cli.write_atomic(str(tmp_path / "f.csv"), "a\n")
    cli.write_atomic(str(tmp_path / "f.csv"), "b\n")
    assert os.listdir(tmp_path) == ["f.csv"]
    assert (tmp_path / "f.csv").read_text() == "b\n"
