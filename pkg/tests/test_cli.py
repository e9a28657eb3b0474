import csv
import io
import json
import subprocess
import sys

import pytest

from lndimer import __version__
from lndimer.cli import EXIT_INPUT, EXIT_OK, main
from lndimer.constants import data_path
from lndimer.spintensor import read_adiabat_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_dispersion_json(capsys):
    code, out, _ = run(capsys, "dispersion", "--species", "er", "--lines", str(data_path("er_lines.csv")))
    assert code == EXIT_OK
    data = json.loads(out)
    c01 = next(c for c in data["coefficients"] if (c["k"], c["i"]) == (0, 1))
    assert c01["value"] == pytest.approx(-1723.07, rel=2e-3)
    assert {"c_ss", "d2_2", "q4_1", "manifest"} <= set(data)
    assert data["manifest"]["config"]["species"] == "Er"


def test_dispersion_bundled_relative_path(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run(capsys, "dispersion", "--species", "er", "--lines", "data/er_lines.csv")
    assert code == EXIT_OK and json.loads(out)["species"] == "Er"


def test_dispersion_montecarlo(capsys):
    code, out, _ = run(capsys, "dispersion", "--species", "Er", "--montecarlo", "100000", "--seed", "3")
    assert code == EXIT_OK
    data = json.loads(out)
    lin = {(c["k"], c["i"]): c["u"] for c in data["coefficients"]}
    for entry in data["montecarlo"]["u"]:
        assert entry["u"] == pytest.approx(lin[(entry["k"], entry["i"])], rel=0.05)


def test_dispersion_missing_file(capsys):
    code, _, err = run(capsys, "dispersion", "--species", "Er", "--lines", "/no/such/lines.csv")
    assert code == EXIT_INPUT
    assert "/no/such/lines.csv" in err


def test_dispersion_bad_rows(capsys, tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("delta_e_cm,kind,strength,u_strength,two_j,source\n-1,A,1,0.1,12,x\n")
    code, _, err = run(capsys, "dispersion", "--species", "Er", "--lines", str(p))
    assert code == EXIT_INPUT and "line 2" in err


def test_unknown_species(capsys):
    code, _, _ = run(capsys, "curves", "--species", "Dy")
    assert code == EXIT_INPUT


def test_curves_nodes_and_manifest(capsys, tmp_path):
    out = tmp_path / "tm.csv"
    code, _, _ = run(capsys, "curves", "--species", "tm", "--grid", "6:30:0.1", "--out", str(out))
    assert code == EXIT_OK
    table = rows(out.read_text())
    assert table[0][:3] == ["r_bohr", "ss_cm", "v0_cm"]
    values = {round(float(r[0]), 6): float(r[1]) for r in table[1:]}
    assert values[8.8] == -766.073434020327
    v2 = {round(float(r[0]), 6): float(r[3]) for r in table[1:]}
    assert v2[8.5] == 3.0630180
    man = json.loads((tmp_path / "tm.csv.manifest.json").read_text())
    assert man["command"] == "curves" and len(man["config_sha256"]) == 64
    assert {"numpy", "scipy", "python", "constants", "version"} <= set(man)


def test_curves_v2_value(capsys):
    code, out, _ = run(capsys, "curves", "--species", "er", "--grid", "12:12.05:0.1", "--which", "v2")
    assert code == EXIT_OK
    assert float(rows(out)[1][1]) == pytest.approx(0.05871469, abs=1e-12)


def test_curves_out_of_range(capsys):
    code, _, _ = run(capsys, "curves", "--species", "Er", "--grid", "0.1:5:0.1")
    assert code == EXIT_INPUT
    code, _, _ = run(capsys, "curves", "--species", "Er", "--which", "v9")
    assert code == EXIT_INPUT


def test_adiabats_rows_and_reingest(capsys, tmp_path):
    out = tmp_path / "ad.csv"
    code, _, _ = run(capsys, "adiabats", "--species", "Er", "--R", "8.7", "--out", str(out))
    assert code == EXIT_OK
    table = rows(out.read_text())
    assert len(table) == 92
    assert table[1][2:5] == ["0", "g", "+"]
    data = read_adiabat_csv(out)
    assert len(data[8.7]) == 91
    code, _, _ = run(capsys, "adiabats", "--species", "Tm", "--R", "8.5,9", "--model", "two_tensor")
    assert code == EXIT_OK


def test_adiabats_two_tensor_top_omega_zero(capsys):
    code, out, _ = run(capsys, "adiabats", "--species", "Er", "--R", "8.7", "--model", "two_tensor")
    table = rows(out)[1:]
    e = {(r[1], r[2], r[3], r[4]): float(r[5]) for r in table}
    top0 = max(v for k, v in e.items() if k[1] == "0")
    assert top0 == pytest.approx(e[("1", "12", "g", "")], abs=1e-9)


def test_strengths_fit_round_trip(capsys, tmp_path):
    ad = tmp_path / "ad.csv"
    run(capsys, "adiabats", "--species", "Tm", "--R", "8.5,9.0", "--model", "full", "--out", str(ad))
    fit = tmp_path / "fit.csv"
    code, _, _ = run(capsys, "strengths-fit", "--species", "Tm", "--input", str(ad), "--active", "all", "--out", str(fit))
    assert code == EXIT_OK
    table = rows(fit.read_text())
    header = table[0]
    v21 = [float(r[header.index("V_2_1")]) for r in table[1:]]
    assert v21[0] == pytest.approx(3.0630180, abs=1e-8)
    assert all(r[header.index("dropped")] == "" for r in table[1:])


def test_strengths_fit_missing_input(capsys, tmp_path):
    code, _, err = run(capsys, "strengths-fit", "--species", "Er", "--input", str(tmp_path / "x.csv"))
    assert code == EXIT_INPUT and "x.csv" in err


def test_levels_empty_window(capsys, tmp_path):
    out = tmp_path / "lv.csv"
    code, _, _ = run(capsys, "levels", "--species", "Tm", "--J", "0", "--blocks", "g/even",
                     "--grid", "6.5:25:60", "--emax", "-5000", "--out", str(out))
    assert code == EXIT_OK
    table = rows(out.read_text())
    assert len(table) == 1 and table[0][0] == "J"


def test_levels_small_run(capsys, tmp_path):
    out = tmp_path / "lv.csv"
    code, _, _ = run(capsys, "levels", "--species", "Tm", "--J", "0:1", "--model", "two_tensor",
                     "--blocks", "g/even", "--grid", "6.5:25:120", "--emax", "-820", "--out", str(out),
                     "--convergence")
    assert code == EXIT_OK
    table = rows(out.read_text())
    assert len(table) > 2
    first = table[1]
    assert first[0] == "0" and first[1] == "g/even" and first[4] == "0"
    man = json.loads((tmp_path / "lv.csv.manifest.json").read_text())
    assert "convergence" in man


def test_levels_bad_block(capsys):
    code, _, _ = run(capsys, "levels", "--species", "Er", "--blocks", "g/odd")
    assert code == EXIT_INPUT


def test_constants(capsys):
    code, out, _ = run(capsys, "constants")
    assert code == EXIT_OK
    assert json.loads(out)["hartree_in_cm"] == 219474.6313632


def test_manifest_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "curves", "--species", "Er", "--grid", "7:9:0.5", "--out", str(a))
    run(capsys, "curves", "--species", "Er", "--grid", "7:9:0.5", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    ma = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    mb = json.loads((tmp_path / "b.csv.manifest.json").read_text())
    assert ma["config_sha256"] == mb["config_sha256"]


def test_console_script_version():
    res = subprocess.run([sys.executable, "-m", "lndimer.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
