import io
import subprocess
import sys

import numpy as np
import pytest

from rkfiltration.cli import main
from rkfiltration.eos import V_CRITICAL_EXACT
from rkfiltration.writers import read_csv, read_vtk

EMPTY = """
[flow]
sigma0 = 1.0
far_field_v = 20.0
mode = "{mode}"

[domain]
lower = [-1.0, -1.0, -1.0]
upper = [1.0, 1.0, 1.0]
resolution = [5, 5, 5]
"""


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_state(capsys):
    code, out, _ = run(capsys, "state", "--v", "2", "--T", "1")
    assert code == 0
    values = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(values["p"]) == pytest.approx(5 / 6, abs=1e-12)
    assert float(values["e"]) == pytest.approx(0.891802337838, abs=1e-12)
    assert float(values["sigma"]) == pytest.approx(-0.202732554054, abs=1e-12)


def test_state_domain_error(capsys):
    code, _, err = run(capsys, "state", "--v", "0.5", "--T", "1")
    assert code == 2
    assert "error" in err


def test_spinodal_includes_v2(capsys):
    code, out, _ = run(capsys, "spinodal", "--points", "20")
    assert code == 0
    header, data = read_csv(io.StringIO(out))
    assert header == ["v", "T", "p"]
    row = data[data[:, 0] == 2.0][0]
    assert row[1] == pytest.approx((5 / 36) ** (2 / 3), rel=1e-11)
    assert np.all(np.diff(data[:, 0]) > 0)


def test_spinodal_bad_range(capsys):
    assert run(capsys, "spinodal", "--vmin", "5", "--vmax", "2")[0] == 2


def test_coexistence_ends_at_critical_point(capsys):
    code, out, _ = run(capsys, "coexistence", "--tmin", "0.2", "--steps", "20")
    assert code == 0
    header, data = read_csv(io.StringIO(out))
    assert header == ["T", "p_sat", "v_liquid", "v_gas"]
    assert data.shape == (21, 4)
    assert data[-1, 2] == pytest.approx(V_CRITICAL_EXACT, rel=1e-10)
    assert data[0, 0] == pytest.approx(0.2)


def test_isentrope_to_file(tmp_path, capsys):
    dest = tmp_path / "iso.csv"
    code, out, _ = run(capsys, "isentrope", "--sigma0", "0", "--knots", "50", "-o", str(dest))
    assert code == 0
    assert "invertible = true" in out
    header, data = read_csv(dest)
    assert header == ["v", "T", "p", "Q"]
    assert np.all(np.diff(data[:, 3]) > 0)


def test_hcurve_reports_threshold(capsys):
    code, out, err = run(capsys, "hcurve", "--vmin", "10", "--vmax", "1000", "--points", "5")
    assert code == 0
    assert "sigma_star" in err
    assert float(err.split("=")[1]) == pytest.approx(-0.5, abs=0.05)
    _, data = read_csv(io.StringIO(out))
    assert np.all(np.diff(data[:, 1]) > 0)


@pytest.mark.parametrize("mode", ["free_space", "dirichlet_box"])
def test_filtration_without_sources(tmp_path, capsys, mode):
    cfg = tmp_path / "empty.toml"
    cfg.write_text(EMPTY.format(mode=mode))
    code, out, _ = run(capsys, "filtration", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0
    assert "sources: 0" in out
    vtk = read_vtk(tmp_path / "o" / "field.vtk")
    assert np.allclose(vtk["v"], 20.0, rtol=1e-10)
    assert (tmp_path / "o" / "summary.txt").read_text().strip() == out.strip()


def test_filtration_refuses_non_invertible(tmp_path, capsys):
    cfg = tmp_path / "cold.toml"
    cfg.write_text(EMPTY.format(mode="free_space").replace("sigma0 = 1.0", "sigma0 = -1.0"))
    code, _, err = run(capsys, "filtration", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 2
    assert "sigma*" in err and "-0.5" in err


def test_filtration_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(EMPTY.format(mode="sideways"))
    code, _, err = run(capsys, "filtration", str(cfg))
    assert code == 2 and "flow.mode" in err


@pytest.mark.slow
def test_filtration_bundled_four_sources(tmp_path, capsys):
    code, out, _ = run(capsys, "filtration", "four_sources", "--out", str(tmp_path))
    assert code == 0
    counts = dict(line.split(": ") for line in out.splitlines())
    assert int(counts["condensation"]) > 0
    assert int(counts["inapplicable"]) == 0
    assert int(counts["gas"]) > 0.5 * int(counts["nodes"])
    assert {p.name for p in tmp_path.iterdir()} == {"field.vtk", "slice.csv", "summary.txt"}


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "rkfiltration", "state", "--v", "3", "--T", "0.5"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert res.stdout.startswith("v = 3")
