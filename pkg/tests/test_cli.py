import csv
import json
import os

import pytest

from curvlab.cli import main
from curvlab.io import parse_config
from curvlab.errors import ConfigError


STABLE_CONFIG = """\
# stable damped run
n = 2
d = 1.0
grid_n = 48
speed = mean-curvature
weight = mixed-volume:0
initial = cylinder-cosine
radius_factor = 1.2
modes = 1:0.05
t_end = 0.3
rtol = 1e-8
atol = 1e-8
record_every = 0.02
fit_window = 0.15,0.3
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_simulate_stable_preset(tmp_path):
    cfg = write_config(tmp_path, STABLE_CONFIG)
    out = tmp_path / "out"
    rc = main(["simulate", "--config", cfg, "--out", str(out)])
    assert rc == 0
    rows = read_csv(out / "trajectory.csv")
    assert rows[0] == ["time", "wvol", "sup_dev"]
    assert len(rows) == 17  # header + 16 records
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "ok"
    assert report["wvol_drift"] < 1e-6
    assert report["verdict_vs_linear_theory"] == "consistent"
    assert abs(report["decay_fit"]["rate"] - report["lambda1_prediction"]) \
        <= 0.03 * abs(report["lambda1_prediction"])
    assert (out / "trajectory.png").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert "trajectory.csv" in manifest["outputs"]
    assert "curvlab" in manifest["versions"]


def test_simulate_rejects_bad_config(tmp_path, capsys):
    cfg = write_config(tmp_path, STABLE_CONFIG + "mystery_knob = 7\n")
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "mystery_knob" in capsys.readouterr().err


def test_simulate_rejects_missing_key(tmp_path, capsys):
    cfg = write_config(tmp_path, "n = 2\nspeed = mean-curvature\n")
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "weight" in capsys.readouterr().err


def test_simulate_axis_approach_exits_two(tmp_path):
    neck = STABLE_CONFIG.replace("radius_factor = 1.2", "radius_factor = 0.5")
    neck = neck.replace("modes = 1:0.05", "modes = 1:-0.5")
    neck = neck.replace("t_end = 0.3", "t_end = 5.0")
    neck = neck.replace("rtol = 1e-8", "rtol = 1e-6")
    cfg = write_config(tmp_path, neck)
    out = tmp_path / "neck"
    rc = main(["simulate", "--config", cfg, "--out", str(out)])
    assert rc == 2
    report = json.loads((out / "report.json").read_text())
    assert report["termination_reason"] == "min-rho"


def test_simulate_cylinder_preset_constant(tmp_path):
    cyl = STABLE_CONFIG.replace("radius_factor = 1.2", "radius = 0.75")
    cyl = cyl.replace("modes = 1:0.05", "modes =")
    cfg = write_config(tmp_path, cyl)
    out = tmp_path / "cyl"
    rc = main(["simulate", "--config", cfg, "--out", str(out)])
    assert rc == 0
    rows = read_csv(out / "trajectory.csv")
    sup = [float(r[2]) for r in rows[1:]]
    assert max(sup) < 1e-8


def test_simulate_save_profiles(tmp_path):
    cfg = write_config(tmp_path, STABLE_CONFIG + "save_profiles = true\n")
    out = tmp_path / "profs"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    profs = sorted(p for p in os.listdir(out) if p.startswith("profile_"))
    assert len(profs) == 16
    rows = read_csv(out / profs[0])
    assert rows[0] == ["z", "rho"]
    assert len(rows) == 49


def test_bifurcation_outputs_and_determinism(tmp_path):
    out1 = tmp_path / "b1"
    out2 = tmp_path / "b2"
    for out in (out1, out2):
        rc = main(["bifurcation", "--n", "3", "--b", "1", "--samples", "24",
                   "--out", str(out), "--no-plot"])
        assert rc == 0
    f1 = (out1 / "bifurcation_n3_b1.csv").read_bytes()
    f2 = (out2 / "bifurcation_n3_b1.csv").read_bytes()
    assert f1 == f2  # byte-identical reruns
    rows = read_csv(out1 / "bifurcation_n3_b1.csv")
    assert rows[0] == ["s", "eta", "eta_bar", "rho0", "H", "err_estimate"]
    assert len(rows) == 25
    eta_bar_first = float(rows[1][2])
    assert abs(eta_bar_first - 1.0) < 1e-2


def test_bifurcation_rejects_bad_b(tmp_path, capsys):
    rc = main(["bifurcation", "--n", "2", "--b", "5", "--samples", "10",
               "--out", str(tmp_path)])
    assert rc == 1


def test_bifurcation_default_sweep_shape_and_budget(tmp_path):
    import time

    start = time.perf_counter()
    out = tmp_path / "full"
    rc = main(["bifurcation", "--n", "11", "--b", "0", "--samples", "200",
               "--out", str(out), "--no-plot"])
    elapsed = time.perf_counter() - start
    assert rc == 0
    assert elapsed < 60.0
    rows = read_csv(out / "bifurcation_n11_b0.csv")
    eta_bar = [float(r[2]) for r in rows[1:]]
    assert len(eta_bar) == 200
    assert eta_bar[1] > eta_bar[0] > 1.0 - 1e-3  # rising from the cylinder
    # n=2 falls away from the cylinder instead
    out2 = tmp_path / "low"
    assert main(["bifurcation", "--n", "2", "--b", "0", "--samples", "50",
                 "--out", str(out2), "--no-plot"]) == 0
    low = [float(r[2]) for r in read_csv(out2 / "bifurcation_n2_b0.csv")[1:]]
    assert low[0] < 1.0 and low[1] < low[0]


def test_bifurcation_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CURVLAB_THREADS", "2")
    out = tmp_path / "bt"
    rc = main(["bifurcation", "--n", "2", "--b", "0", "--samples", "16",
               "--out", str(out), "--no-plot"])
    assert rc == 0
    rows = read_csv(out / "bifurcation_n2_b0.csv")
    assert len(rows) == 17


def test_stability_table_command(tmp_path):
    out = tmp_path / "table"
    rc = main(["stability-table", "--out", str(out), "--n", "11", "--b", "0"])
    assert rc == 0
    rows = read_csv(out / "stability_table.csv")
    assert rows[0] == ["n", "b", "condition_value_num",
                       "condition_value_den", "stable"]
    by_key = {(int(r[0]), int(r[1])): r for r in rows[1:]}
    assert by_key[(10, 0)][4] == "false"
    assert by_key[(11, 0)][4] == "true"
    assert (2, 2) not in by_key  # b >= n rows absent
    # exact integers emitted
    assert by_key[(11, 0)][2] == "-9"
    assert by_key[(11, 0)][3] == "1"
    report = json.loads(
        (out / "stability_report_n11_b0.json").read_text()
    )
    assert report["verdict"] == "stable"
    assert report["provenance"]


def test_unduloid_command(tmp_path):
    out = tmp_path / "und"
    rc = main(["unduloid", "--n", "2", "--s", "0.3", "--grid-n", "48",
               "--out", str(out)])
    assert rc == 0
    rows = read_csv(out / "unduloid_profile_n2_b0_s0.3.csv")
    assert rows[0] == ["z", "rho"]
    rhos = [float(r[1]) for r in rows[1:]]
    assert rhos[-1] > rhos[0]  # bulge exceeds neck
    sample = read_csv(out / "unduloid_sample_n2_b0_s0.3.csv")
    assert sample[0][0] == "s"
    assert (out / "unduloid_profile_n2_b0_s0.3.png").exists()


def test_verify_command_paper_tables(tmp_path):
    out = tmp_path / "v"
    rc = main(["verify", "--suite", "paper-tables", "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "verify_paper-tables.json").read_text())
    assert payload["all_passed"] is True
    assert all(c["passed"] for c in payload["criteria"])


def test_verify_unknown_suite(tmp_path):
    rc = main(["verify", "--suite", "nonsense", "--out", str(tmp_path)])
    assert rc == 1


def test_parse_config_errors(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("this line has no equals sign\n")
    with pytest.raises(ConfigError):
        parse_config(p)
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.cfg")
