import json
import subprocess
import sys

import numpy as np
import pytest

from rydchain import storage
from rydchain.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_basis_count(capsys):
    code, out, _ = run(capsys, "basis", "--order", "3", "--atoms", "13", "--count-only")
    assert code == 0 and out.strip() == "93094"


def test_basis_dump_and_saturation(capsys, tmp_path):
    code, _, _ = run(capsys, "basis", "--order", "2", "--atoms", "3", "--out", str(tmp_path / "b.txt"))
    lines = (tmp_path / "b.txt").read_text().splitlines()
    assert code == 0 and lines[0] == "2 3 7" and len(lines) == 8
    _, out, _ = run(capsys, "basis", "--order", "2", "--atoms", "12", "--saturation")
    assert round(float(out), 3) == 0.326


def test_evolve_to_stdout(capsys):
    code, out, _ = run(capsys, "evolve", "--order", "2", "--atoms", "8", "--d", "50", "--w", "0",
                       "--n-times", "20")
    rows = out.splitlines()
    assert code == 0 and rows[0] == ",".join(storage.SERIES_HEADER)
    assert len(rows) == 22
    assert float(rows[1].split(",")[2]) == pytest.approx(1.0, abs=1e-12)


def test_evolve_file_and_sidecar(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "evolve", "--order", "3", "--atoms", "5", "--d", "10", "--w", "0.2",
                     "--seed", "3", "--sample", "1", "--n-times", "30", "--out", str(out))
    side = json.loads((tmp_path / "s.csv.json").read_text())
    assert code == 0 and side["cut"] == 3 and side["constants"]["mu"] > 0
    cols = storage.read_csv(out)
    assert cols["fidelity"][0] == pytest.approx(1.0, abs=1e-12)


def test_assemble_and_spectrum(capsys, tmp_path):
    sech, geo = tmp_path / "h.sech", tmp_path / "g.csv"
    code, out, _ = run(capsys, "assemble", "--order", "3", "--atoms", "6", "--d", "9", "--w", "0.3",
                       "--out", str(sech), "--geometry-out", str(geo))
    rep = json.loads(out)
    assert code == 0 and rep["symmetric"] and rep["dim"] == 76
    assert geo.read_text().splitlines()[0] == "sample,atom,position_um"
    code, out, _ = run(capsys, "spectrum", "--hamiltonian", str(sech), "--out-dir", str(tmp_path))
    rep = json.loads(out)
    assert code == 0 and rep["ldos_sum"] == pytest.approx(1.0, abs=1e-12)
    assert rep["max_residual_over_norm"] <= 1e-9
    spec = storage.read_csv(tmp_path / "spectrum.csv")
    assert np.all(np.diff(spec["energy_au"]) >= 0) and len(spec["index"]) == 76
    assert storage.read_csv(tmp_path / "ldos.csv")["overlap"].sum() == pytest.approx(1.0)


def test_fit_from_series(capsys, tmp_path):
    t = np.concatenate([[0.0], np.geomspace(1e-2, 1e2, 400)])
    F = np.ones_like(t)
    F[1:] = t[1:] ** -0.3
    series = tmp_path / "s.csv"
    storage.write_columns(series, {"t_natural": t, "fidelity": F})
    code, out, _ = run(capsys, "fit", "--series", str(series), "--window", "1", "100",
                       "--order", "3", "--d", "9", "--w", "0.45", "--out", str(tmp_path / "f.json"))
    rep = json.loads(out)
    assert code == 0 and rep["gamma"] == pytest.approx(0.3)
    assert set(rep) == {"order", "d_um", "w", "gamma", "residual", "window", "classification",
                        "mean_r", "ee_growth_label"}
    assert json.loads((tmp_path / "f.json").read_text()) == rep


def test_grid_plot_report(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("order = 2\nn_atoms = 4\nspacings_um = 32, 50\ndisorders = 0, 0.3\n"
                   "samples = 2\nn_times = 40\n")
    res = tmp_path / "res"
    code, out, _ = run(capsys, "grid", "--config", str(cfg), "--out", str(res))
    assert code == 0 and len(json.loads(out)) == 4
    svg = tmp_path / "g.svg"
    code, _, _ = run(capsys, "plot", "--grid", "gamma", "--results", str(res), "--out", str(svg))
    text = svg.read_text()
    assert code == 0 and text.lstrip().startswith(("<?xml", "<svg"))
    assert "xlink:href=\"http" not in text and "href=\"file" not in text
    cell = res / storage.cell_dirname(32.0, 0.0)
    code, _, _ = run(capsys, "plot", "--series", str(cell / "series.csv"), "--fit",
                     str(cell / "fit.json"), "--out", str(tmp_path / "f.svg"))
    assert code == 0
    code, _, _ = run(capsys, "plot", "--ee", str(cell / "series.csv"), "--out", str(tmp_path / "e.svg"))
    assert code == 0
    code, out, _ = run(capsys, "report", "--results", str(res))
    assert code == 0 and len(out.splitlines()) == 6
    code, out, _ = run(capsys, "report", "--results", str(res), "--format", "json")
    assert len(json.loads(out)["cells"]) == 4


def _error(capsys, *argv):
    code, _, err = run(capsys, *argv)
    return code, json.loads(err)


def test_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("order = 3\ncolour = blue\n")
    code, err = _error(capsys, "grid", "--config", str(bad))
    assert code == 2 and err["error"] == "ConfigurationError" and "colour" in err["message"]
    code, err = _error(capsys, "evolve", "--order", "3", "--atoms", "3", "--d", "-1")
    assert code == 2
    code, err = _error(capsys, "basis", "--order", "3", "--atoms", "-1", "--count-only")
    assert code == 3 and err["exit_code"] == 3
    code, err = _error(capsys, "evolve", "--order", "2", "--atoms", "4", "--d", "50",
                       "--initial", "sspp")
    assert code == 4
    code, err = _error(capsys, "assemble", "--order", "2", "--atoms", "8", "--d", "50",
                       "--memory-budget", "1000", "--out", str(tmp_path / "h.sech"))
    assert code == 5
    code, err = _error(capsys, "basis", "--order", "3", "--bogus")
    assert code == 64
    code, err = _error(capsys, "assemble", "--order", "2", "--atoms", "3", "--d", "50",
                       "--out", str(tmp_path / "missing" / "h.sech"))
    assert code == 8


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rydchain", "basis", "--order", "4", "--atoms",
                           "14", "--count-only"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "108109"
