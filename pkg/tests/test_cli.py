import json
import subprocess
import sys

import numpy as np
import pytest

from polyreach import load_cloud_csv, load_curve, read_report
from polyreach.cli import EXIT_CONFIG, EXIT_NUMERICAL, main


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["sample", "--region", "pacman", "--n", "600", "--seed", "1", "--out", str(d / "c.csv")]) == 0
    assert main(["volume-curve", "--cloud", str(d / "c.csv"), "--region", "pacman", "--seed", "2",
                 "--mc-points", "100000", "--out", str(d / "v.csv")]) == 0
    return d


def test_sample_and_curve_files(files):
    cloud = load_cloud_csv(files / "c.csv")
    assert cloud.points.shape == (600, 2)
    curve = load_curve(files / "v.csv")
    assert curve.radii[0] == 0.0 and curve.radii[-1] == pytest.approx(1.98)
    assert np.allclose(np.diff(curve.radii), 1e-3)
    assert json.loads((files / "v.json").read_text())["mc_points"] == 100_000


def test_fit_reach_coeffs(files, capsys):
    assert main(["fit", "--curve", str(files / "v.csv"), "--interval", "0.1,0.6", "--degree", "2"]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["interval"] == [0.1, 0.6] and len(fit["coefficients"]) == 3
    out = files / "r.json"
    assert main(["reach", "--curve", str(files / "v.csv"), "--n", "600", "--grid", "gr1", "--ell", "10",
                 "--out", str(out)]) == 0
    est = json.loads(out.read_text())
    assert est["R_hat"] in [0.0, 0.2, 0.6, 1.0, 1.4, 1.8] and len(est["c"]) in (0, 5)
    assert main(["reach", "--curve", str(files / "v.csv"), "--n", "600",
                 "--grid", "explicit:0.3,0.9,1.5,1.98"]) == 0
    assert json.loads(capsys.readouterr().out)["grid"] == [0.3, 0.9, 1.5, 1.98]
    assert main(["coeffs", "--curve", str(files / "v.csv"), "--r-hat", "0.2", "--r1", "0.2"]) == 0
    assert json.loads(capsys.readouterr().out) == {"skipped": True, "reason": "r_hat_is_r1"}


def test_exit_codes(files, tmp_path):
    assert main(["reach", "--curve", str(files / "v.csv"), "--n", "600", "--eta", "0.4"]) == EXIT_CONFIG
    assert main(["sample", "--region", "hexagon", "--n", "5"]) == EXIT_CONFIG
    assert main(["fit", "--curve", str(tmp_path / "missing.csv"), "--interval", "0,1"]) == EXIT_CONFIG
    assert main(["fit", "--curve", str(files / "v.csv"), "--interval", "0.1,0.1005",
                 "--degree", "5"]) == EXIT_NUMERICAL
    with pytest.raises(SystemExit) as info:
        main(["reach"])
    assert info.value.code == 2


def test_replicate(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("region = pacman\nn = 300\nreplications = 3\nmc_points = 20000\n")
    out = tmp_path / "rep.csv"
    assert main(["replicate", str(cfg), "--seed", "5", "--out", str(out)]) == 0
    report = read_report(out)
    assert report.config.master_seed == 5 and len(report.records) == 3
    assert "overestimations" in capsys.readouterr().out
    assert main(["replicate", str(cfg), "--format", "json", "--out", str(tmp_path / "rep.json"),
                 "--grid", "gr2", "--ell", "8"]) == 0
    data = json.loads((tmp_path / "rep.json").read_text())
    assert data["config"]["grid_name"] == "gr2" and data["config"]["ell"] == 8


def test_tables_preset(tmp_path, capsys):
    assert main(["tables", "--table", "4", "--replications", "1", "--mc-points", "5000",
                 "--out", str(tmp_path)]) == 0
    assert len(list(tmp_path.glob("table4_*.csv"))) == 9


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "polyreach", "sample", "--region", "frame:1", "--n", "3",
                          "--seed", "0"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[0] == "x1,x2"
