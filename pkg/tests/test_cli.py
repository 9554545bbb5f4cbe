import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dipolar_qcorr import cli
from dipolar_qcorr.qcorrelations import concurrence_analytic_array, discord_analytic_array
from dipolar_qcorr.spinmodel import PhysicalConstants, beta_from_temperature, initial_state
from dipolar_qcorr.sweeps import max_over_time


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_matrix(out):
    rows = [line for line in out.splitlines() if not line.startswith("#")]
    return np.array([[complex(v) for v in row.split()] for row in rows])


def test_evolve_infinite_temperature(capsys):
    code, out, _ = run(capsys, "evolve", "--beta", "0", "--g", "1", "--t", "5")
    assert code == 0
    assert np.max(np.abs(parse_matrix(out) - np.eye(4) / 4)) < 1e-16


def test_evolve_initial_state(capsys):
    code, out, _ = run(capsys, "evolve", "--beta", "1.5", "--g", "0", "--t", "0")
    assert code == 0
    m = parse_matrix(out)
    assert np.array_equal(m, initial_state(1.5))
    assert m[0, 1].real == pytest.approx(math.tanh(0.75) / 4, abs=1e-17)
    assert "# X state:" in out


def test_evolve_numeric_footer(capsys):
    code, out, _ = run(capsys, "evolve", "--beta", "1.5", "--g", "0.5", "--t", "2", "--method", "numeric")
    assert code == 0
    footer = [line for line in out.splitlines() if "max |numeric - analytic|" in line]
    assert len(footer) == 1
    assert float(footer[0].split("=")[1]) < 1e-8


def test_evolve_writes_json(tmp_path, capsys):
    target = tmp_path / "state.json"
    code, _, _ = run(capsys, "evolve", "--beta", "1.5", "--g", "0.2", "--t", "1", "--output", str(target), "--format", "json")
    assert code == 0
    payload = json.loads(target.read_text())
    rho = np.array(payload["rho"]["real"]) + 1j * np.array(payload["rho"]["imag"])
    assert abs(np.trace(rho) - 1) < 1e-15
    assert payload["xstate"]["b"] == pytest.approx(payload["xstate"]["c"], abs=1e-15)


def test_point_commands(capsys):
    code, out, _ = run(capsys, "concurrence", "--beta", "50", "--g", "0", "--t", repr(math.pi / 3), "--method", "xstate")
    assert code == 0 and float(out.split("=")[1]) == pytest.approx(1.0, abs=1e-12)
    for method in ("analytic", "numeric"):
        code, out, _ = run(capsys, "concurrence", "--beta", "1.5", "--g", "0.1", "--t", "1", "--method", method)
        value = float(out.splitlines()[0].split("=")[1])
        assert code == 0 and value == pytest.approx(float(concurrence_analytic_array(1.5, 0.1, 1.0)), abs=1e-10)
    for method in ("single", "full"):
        code, out, _ = run(capsys, "discord", "--beta", "1.5", "--g", "0.1", "--t", "1", "--method", method)
        value = float(out.splitlines()[0].split("=")[1].split()[0])
        assert code == 0 and value == pytest.approx(float(discord_analytic_array(1.5, 0.1, 1.0)), abs=1e-6)


def read_csv(path):
    text = path.read_bytes()
    assert b"\r" not in text
    return list(csv.DictReader(text.decode("utf-8").splitlines()))


def test_time_sweep_fanout_and_roundtrip(tmp_path, capsys):
    target = tmp_path / "fig1.csv"
    code, _, _ = run(
        capsys, "sweep", "--quantity", "concurrence", "--abscissa", "time",
        "--beta", "1.5", "--g", "0,0.1,0.5", "--t-max", "8", "--output", str(target),
    )
    assert code == 0
    for g in (0.0, 0.1, 0.5):
        path = tmp_path / f"fig1_g{g:g}.csv"
        rows = read_csv(path)
        assert list(rows[0]) == ["abscissa", "value"]
        t = np.array([float(r["abscissa"]) for r in rows])
        v = np.array([float(r["value"]) for r in rows])
        assert np.max(np.abs(concurrence_analytic_array(1.5, g, t) - v)) < 1e-12
        meta = json.loads((tmp_path / f"fig1_g{g:g}.meta.json").read_text())
        assert meta["g"] == g and meta["beta"] == 1.5 and meta["quantity"] == "concurrence"
    assert not target.exists()


def test_temperature_sweep_roundtrip(tmp_path, capsys):
    target = tmp_path / "fig4.csv"
    code, _, _ = run(
        capsys, "sweep", "--quantity", "discord", "--abscissa", "temperature", "--millikelvin",
        "--start", "5", "--stop", "100", "--points", "96", "--g", "0", "--output", str(target),
    )
    assert code == 0
    rows = read_csv(target)
    assert list(rows[0]) == ["abscissa", "value", "t_star"]
    assert len(rows) == 96
    values = np.array([float(r["value"]) for r in rows])
    assert np.all(values > 0)
    consts = PhysicalConstants()
    for r in rows[::19]:
        beta = beta_from_temperature(float(r["abscissa"]) * 1e-3, consts)
        t_star, value = max_over_time("discord", beta, 0.0)
        assert float(r["value"]) == pytest.approx(value, abs=1e-12)
        # the argmax of a flat top is fixed only to ~sqrt(eps)
        assert float(r["t_star"]) == pytest.approx(t_star, abs=1e-7)
    meta = json.loads((tmp_path / "fig4.meta.json").read_text())
    assert meta["abscissa_unit"] == "mK"


def test_sweep_json_format(tmp_path, capsys):
    target = tmp_path / "c.json"
    code, _, _ = run(
        capsys, "sweep", "--quantity", "concurrence", "--abscissa", "time", "--beta", "1.5",
        "--t-max", "2", "--points", "5", "--format", "json", "--output", str(target),
    )
    assert code == 0
    records = json.loads(target.read_text())
    assert len(records) == 5 and set(records[0]) == {"abscissa", "value"}


def test_csv_float_format():
    assert cli.fmt(0.1) == "0.1"
    assert float(cli.fmt(math.pi)) == math.pi
    assert len(cli.fmt(1 / 3).replace("0.", "")) <= 17


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--quantity", "concurrence", "--abscissa", "time", "--t-max", "4", "--points", "1"],
        ["sweep", "--quantity", "concurrence", "--abscissa", "time"],
        ["sweep", "--quantity", "concurrence", "--abscissa", "temperature", "--start", "0", "--stop", "1"],
        ["evolve", "--beta", "-1", "--g", "0", "--t", "1"],
        ["evolve", "--beta", "1", "--g", "0"],
        ["evolve", "--beta", "1", "--g", "0", "--t", "1", "--method", "magic"],
        ["evolve", "--beta", "1", "--g", "0", "--t", "1", "--method", "numeric", "--dt", "5"],
        ["critical-temp", "--g", "0", "--start", "5", "--stop", "10", "--millikelvin"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        raise SystemExit(cli.main(argv))
    assert info.value.code == 2
    capsys.readouterr()


def test_unwritable_output_exit_4(tmp_path, capsys):
    missing = tmp_path / "nope" / "out.csv"
    code, _, err = run(capsys, "sweep", "--quantity", "concurrence", "--abscissa", "time", "--t-max", "1", "--output", str(missing))
    assert code == 4 and "I/O" in err
    code, _, _ = run(capsys, "figures", "--output", str(tmp_path / "nope"))
    assert code == 4
    code, _, _ = run(capsys, "evolve", "--beta", "1", "--g", "0", "--t", "1", "--output", str(missing))
    assert code == 4


def test_numeric_failure_exit_3(monkeypatch, capsys):
    from dipolar_qcorr.errors import NumericFailure

    def boom(*args, **kwargs):
        raise NumericFailure("QR did not converge", iterations=500)

    monkeypatch.setattr(cli, "concurrence_numeric", boom)
    code, _, err = run(capsys, "concurrence", "--beta", "1", "--g", "0", "--t", "1", "--method", "numeric")
    assert code == 3 and "numeric failure" in err


def test_critical_temp(capsys):
    code, out, _ = run(capsys, "critical-temp", "--g", "0")
    assert code == 0
    mk = float(out.split("(")[1].split()[0])
    assert 25 <= mk <= 29


def test_verify_quick_and_perturbed(capsys):
    code, out, _ = run(capsys, "verify", "--quick")
    assert code == 0 and "FAIL" not in out
    code, out, _ = run(capsys, "verify", "--quick", "--perturb", "1e-3")
    assert code == 1
    assert "FAIL  analytic rho(t) vs RK4" in out and "worst at" in out


def test_figures_properties_and_stability(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    assert run(capsys, "figures", "--output", str(a))[0] == 0
    assert run(capsys, "figures", "--output", str(b))[0] == 0
    for name in ("fig1", "fig2", "fig3", "fig4"):
        assert (a / f"{name}.csv").read_bytes() == (b / f"{name}.csv").read_bytes()
        assert (a / f"{name}.plt").read_bytes() == (b / f"{name}.plt").read_bytes()
        assert f"'{name}.csv'" in (a / f"{name}.plt").read_text()

    fig1, fig3 = read_csv(a / "fig1.csv"), read_csv(a / "fig3.csv")
    t = np.array([float(r["t"]) for r in fig1])
    c0 = np.array([float(r["concurrence_g0"]) for r in fig1])
    # periodic with zeros at t = 2 pi n / 3
    for n in (1, 2, 3):
        k = np.argmin(np.abs(t - 2 * math.pi * n / 3))
        assert c0[k] < 1e-2
    assert concurrence_analytic_array(1.5, 0.0, 2 * math.pi / 3) == 0.0
    # discord survives where concurrence has died
    for col in ("0", "0.5", "2"):
        c = np.array([float(r[f"concurrence_g{col}"]) for r in fig1])
        d = np.array([float(r[f"discord_g{col}"]) for r in fig3])
        assert np.all(d >= 0)
        assert np.any((c == 0) & (d > 1e-3))

    fig2 = read_csv(a / "fig2.csv")
    temps = np.array([float(r["T_mK"]) for r in fig2])
    for g in ("0", "0.1", "0.5", "1", "2"):
        col = np.array([float(r[f"max_concurrence_g{g}"]) for r in fig2])
        assert np.all(col[temps > 29] == 0)
        assert np.all(np.diff(col) <= 0)
    fig4 = read_csv(a / "fig4.csv")
    for g in ("0", "0.1", "0.5", "1", "2"):
        col = np.array([float(r[f"max_discord_g{g}"]) for r in fig4])
        assert np.all(col > 0)
        assert np.all(np.diff(col) <= 0)


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dipolar_qcorr.cli", "concurrence", "--beta", "0", "--g", "0", "--t", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("concurrence = 0")
    proc = subprocess.run([sys.executable, "-m", "dipolar_qcorr.cli", "sweep"], capture_output=True, text=True)
    assert proc.returncode == 2
