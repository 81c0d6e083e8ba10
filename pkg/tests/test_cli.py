import json
import subprocess
import sys

import pytest

from centralqc import cli
from centralqc.report import read_csv

R4 = {"potential": {"type": "homogeneous", "k": 1.0, "alpha": 4.0},
      "window": {"r_lo": 0.3, "r_hi": 3.0},
      "grids": {"scan": 120, "actionmap_I1": [0.1, 0.5, 3], "actionmap_I2": [1.5, 2.5, 3]},
      "expand": {"I2": 2.0},
      "dynamics": {"epsilons": [1e-2, 1e-3], "initial_actions": [0.3, 2.0], "periods": 20,
                   "sample_stride": 100, "write_trajectories": True}}
KEPLER = {"potential": {"type": "kepler", "k": 1.0}, "window": {"r_lo": 0.02, "r_hi": 1000.0},
          "grids": {"scan": 100, "actionmap_I1": [0.1, 1.0, 3], "actionmap_I2": [0.8, 1.5, 3]},
          "expand": {"I2": 1.0}}
HARMONIC = {"potential": {"type": "harmonic", "omega": 1.0}, "window": {"r_lo": 0.2, "r_hi": 5.0},
            "grids": {"scan": 100, "actionmap_I1": [0.1, 1.0, 3], "actionmap_I2": [0.8, 1.5, 3]},
            "expand": {"I2": 1.0}}
MIXED = {"potential": {"type": "power_sum", "terms": [[-1.0, -1.0], [0.01, 4.0]]},
         "window": {"r_lo": 0.2, "r_hi": 5.0}}


def run(tmp_path, cfg, command, name="run"):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / name
    code = cli.main([command, "--config", str(path), "--out", str(out)])
    return code, out


def test_analyze_verdicts(tmp_path, capsys):
    code, out = run(tmp_path, KEPLER, "analyze", "k")
    assert code == 0 and "verdict: identically degenerate" in capsys.readouterr().out
    code, out = run(tmp_path, R4, "analyze", "r4")
    assert code == 0
    assert json.loads((out / "analyze.json").read_text())["verdict"] == "quasiconvex on window, S empty"
    rows = read_csv(out / "analyze.csv")
    assert len(rows) == 120 and rows[0]["classification"] == "quasiconvex-at-r0"
    code, out = run(tmp_path, MIXED, "analyze", "mixed")
    report = json.loads((out / "analyze.json").read_text())
    assert report["verdict"].startswith("exceptional I2 values:") and len(report["roots"]) == 1


@pytest.mark.parametrize("cfg, want", [(HARMONIC, 0.0), (KEPLER, -1.5)])
def test_expand_examples(tmp_path, cfg, want):
    code, out = run(tmp_path, cfg, "expand")
    (row,) = read_csv(out / "expand.csv")
    assert code == 0
    assert float(row["quadratic_coeff"]) == pytest.approx(want, abs=1e-12)
    assert float(row["fitted_quadratic_coeff"]) == pytest.approx(want, abs=2e-3)


def test_expand_cubic_cross_check(tmp_path):
    cfg = dict(R4, potential={"type": "homogeneous", "k": 1 / 3, "alpha": 3.0}, expand={"I2": 1.0})
    code, out = run(tmp_path, cfg, "expand")
    (row,) = read_csv(out / "expand.csv")
    assert float(row["quadratic_coeff"]) == pytest.approx(float(row["fitted_quadratic_coeff"]), rel=1e-3)


def test_expand_out_of_window(tmp_path, capsys):
    code, _ = run(tmp_path, dict(KEPLER, expand={"I2": 40.0}), "expand")
    assert code == cli.EXIT_CODES["domain"]
    assert "error [domain]" in capsys.readouterr().err


@pytest.mark.parametrize("cfg, degenerate", [(KEPLER, True), (HARMONIC, True), (R4, False)])
def test_actionmap_flags(tmp_path, cfg, degenerate):
    code, out = run(tmp_path, cfg, "actionmap")
    rows = read_csv(out / "actionmap.csv")
    assert code == 0 and len(rows) == 9
    flags = {r["qc_flag"] for r in rows}
    assert flags == ({"degenerate"} if degenerate else {"quasiconvex"})
    dets = [abs(float(r["arnold_det"])) for r in rows]
    assert (max(dets) < 1e-6) if degenerate else (min(dets) > 1.0)


def test_actionmap_records_failed_points(tmp_path):
    cfg = dict(KEPLER, grids={"actionmap_I1": [0.5, 0.5, 1], "actionmap_I2": [0.8, 40.0, 2]})
    code, out = run(tmp_path, cfg, "actionmap")
    rows = read_csv(out / "actionmap.csv")
    assert code == 0 and rows[1]["qc_flag"].startswith("error:") and rows[1]["E"] == "nan"
    assert rows[0]["qc_flag"] == "degenerate"


def test_deterministic_outputs(tmp_path):
    for command, files in (("analyze", ["analyze.csv", "analyze.json"]), ("actionmap", ["actionmap.csv"])):
        _, a = run(tmp_path, R4, command, "a")
        _, b = run(tmp_path, R4, command, "b")
        for f in files:
            assert (a / f).read_bytes() == (b / f).read_bytes()


def test_drift_writes_reports(tmp_path):
    code, out = run(tmp_path, R4, "drift")
    assert code == 0
    rows = read_csv(out / "drift.csv")
    assert [float(r["epsilon"]) for r in rows] == [1e-2, 1e-3]
    fit = json.loads((out / "drift_fit.json").read_text())
    assert fit["exponent"] == 0.25 and fit["decreasing"] is True
    traj = read_csv(out / "trajectory_0.csv")
    assert float(traj[0]["I1"]) == pytest.approx(0.3, rel=1e-9)


def test_drift_refused_inside_margin(tmp_path, capsys):
    code, _ = run(tmp_path, dict(KEPLER, dynamics={"initial_actions": [0.5, 1.0]}), "drift")
    assert code == cli.EXIT_CODES["refused"]
    assert "distance 0" in capsys.readouterr().err


def test_config_errors_exit_code(tmp_path):
    code, _ = run(tmp_path, {"potential": {"type": "kepler"}}, "analyze")
    assert code == cli.EXIT_CODES["config"]
    code, _ = run(tmp_path, dict(KEPLER, window={"r_lo": 0.5, "r_hi": 40.0},
                                 potential={"type": "homogeneous", "k": -1.0, "alpha": 1.0}), "analyze")
    assert code == cli.EXIT_CODES["window"]


def test_module_entry_point(tmp_path):
    path = tmp_path / "k.json"
    path.write_text(json.dumps(KEPLER))
    proc = subprocess.run([sys.executable, "-m", "centralqc", "analyze", "--config", str(path),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0 and "identically degenerate" in proc.stdout
