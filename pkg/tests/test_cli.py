import json
import math

import numpy as np
import pytest

from atsim.cli import FORMAT_VERSION, run
from atsim.experiments import default_probe_grid, find_dips, spectrum_scan
from atsim.fitting import evaluate
from atsim.model import DriveParams, mhz_to_rad, rad_to_mhz

FIG2B = {"drive": {"omega_c": 1.0 / 1.8, "omega_p": 0.5 / 1.8}, "duration_us": 1.8,
         "scan": {"points": 101}}


def write_config(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config), encoding="utf-8")
    return str(path)


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--help"])
    assert exc.value.code == 0
    assert "spectrum" in capsys.readouterr().out


def test_unknown_subcommand_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["transmogrify"])
    assert exc.value.code == 2


def test_malformed_json_reports_line_and_column(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"drive": \n  nope}', encoding="utf-8")
    code = run(["spectrum", "--config", str(path)])
    assert code == 2
    message = capsys.readouterr().err
    assert "line 2" in message and "column" in message


def test_config_error_carries_field_path(tmp_path, capsys):
    path = write_config(tmp_path, {"drive": {"omega_c": -1.0, "omega_p": 0.1},
                                   "duration_us": 1.0})
    assert run(["spectrum", "--config", str(path)]) == 2
    assert "drive.omega_c" in capsys.readouterr().err


def test_spectrum_csv_matches_library_values(tmp_path):
    cfg_path = write_config(tmp_path, FIG2B)
    out_path = tmp_path / "scan.csv"
    assert run(["spectrum", "--config", cfg_path, "--out", str(out_path)]) == 0
    lines = out_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == f"# format: {FORMAT_VERSION}"
    assert lines[2].startswith("# config: ")
    assert lines[3] == "delta_p_mhz,p0,pl"
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[4:]])
    assert rows.shape == (101, 3)

    drive = DriveParams.from_mhz(1.0 / 1.8, 0.5 / 1.8)
    scan = spectrum_scan(drive, default_probe_grid(drive.omega_c, points=101), 1.8)
    np.testing.assert_allclose(rows[:, 0], scan.axis_mhz, rtol=1e-11)
    np.testing.assert_allclose(rows[:, 1], scan.p0, rtol=1e-11)
    np.testing.assert_allclose(rows[:, 2], scan.pl, rtol=1e-11)


def test_json_result_schema_and_dips(tmp_path):
    cfg_path = write_config(tmp_path, FIG2B)
    out_path = tmp_path / "scan.json"
    assert run(["spectrum", "--config", cfg_path, "--format", "json",
                "--out", str(out_path)]) == 0
    doc = read_json(str(out_path))
    assert doc["format"] == FORMAT_VERSION
    assert set(doc) >= {"config", "axis", "p0", "pl", "dips"}
    assert len(doc["dips"]) == 2
    drive = DriveParams.from_mhz(1.0 / 1.8, 0.5 / 1.8)
    scan = spectrum_scan(drive, default_probe_grid(drive.omega_c, points=101), 1.8)
    expected = find_dips(scan)
    got = sorted(d["position_mhz"] for d in doc["dips"])
    np.testing.assert_allclose(got, [rad_to_mhz(d.position) for d in expected],
                               rtol=1e-11)


def test_rerun_from_embedded_config_is_bit_identical(tmp_path):
    cfg_path = write_config(tmp_path, FIG2B)
    first = tmp_path / "a.json"
    assert run(["spectrum", "--config", cfg_path, "--format", "json",
                "--out", str(first)]) == 0
    second = tmp_path / "b.json"
    assert run(["spectrum", "--config", str(first), "--format", "json",
                "--out", str(second)]) == 0
    assert first.read_text(encoding="utf-8") == second.read_text(encoding="utf-8")


def test_rerun_from_embedded_csv_config_is_bit_identical(tmp_path):
    cfg_path = write_config(tmp_path, FIG2B)
    first = tmp_path / "a.csv"
    assert run(["spectrum", "--config", cfg_path, "--out", str(first)]) == 0
    second = tmp_path / "b.csv"
    assert run(["spectrum", "--config", str(first), "--out", str(second)]) == 0
    assert first.read_text(encoding="utf-8") == second.read_text(encoding="utf-8")


def test_seeded_noise_is_reproducible_via_flag(tmp_path):
    config = dict(FIG2B, noise={"sigma": 0.005})
    cfg_path = write_config(tmp_path, config)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["spectrum", "--config", cfg_path, "--seed", "9", "--out", str(a)]) == 0
    assert run(["spectrum", "--config", cfg_path, "--seed", "9", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()
    c = tmp_path / "c.csv"
    assert run(["spectrum", "--config", cfg_path, "--seed", "10", "--out", str(c)]) == 0
    assert a.read_text() != c.read_text()


def test_dynamics_auto_resonance_and_fit(tmp_path):
    config = {
        "drive": {"omega_c": 5.0, "omega_p": 5.0 / 14.0},
        "n_max": 120,
        "decoherence": {"gamma1": 0.0784, "gamma2": 0.0784, "gamma3": 0.1568},
        "fit": {"model": "damped_cos4"},
    }
    out_path = tmp_path / "trace.json"
    cfg_path = write_config(tmp_path, config)
    assert run(["dynamics", "--config", cfg_path, "--format", "json",
                "--out", str(out_path)]) == 0
    doc = read_json(str(out_path))
    assert doc["axis_unit"] == "t_us"
    assert doc["config"]["drive"]["delta_p"] == pytest.approx(
        mhz_to_rad(2.5) - mhz_to_rad(5.0 / 14.0) ** 2 / (8 * mhz_to_rad(5.0)), rel=1e-12
    )
    assert doc["fit"]["converged"] is True
    assert 10.0 <= doc["fit"]["params"]["T"] <= 30.0


def test_steady_state_command(tmp_path, capsys):
    config = {
        "drive": {"omega_c": 4.73, "omega_p": 4.73 / 14, "delta_p": 0.2},
        "decoherence": {"gamma1": 0.0784, "gamma2": 0.0784, "gamma3": 0.1568},
    }
    cfg_path = write_config(tmp_path, config)
    assert run(["steady-state", "--config", cfg_path]) == 0
    last = capsys.readouterr().out.strip().splitlines()[-1]
    values = [float(v) for v in last.split(",")]
    np.testing.assert_allclose(values, [1 / 3, 1 / 3, 1 / 3, 0.8533333], atol=1e-6)


def test_steady_state_requires_rates(tmp_path, capsys):
    config = {"drive": {"omega_c": 1.0, "omega_p": 0.5}}
    cfg_path = write_config(tmp_path, config)
    assert run(["steady-state", "--config", cfg_path]) == 2
    assert "decoherence" in capsys.readouterr().err


def test_optimal_command_lists_dark_durations(tmp_path, capsys):
    config = {"drive": {"omega_c": 4.73, "omega_p": 4.73 / 14}, "max_index": 25}
    cfg_path = write_config(tmp_path, config)
    assert run(["optimal", "--config", cfg_path]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    header = lines[3].split(",")
    assert header == ["t_us", "family", "n", "k", "residual", "p0"]
    first = lines[4].split(",")
    assert first[1] == "A" and int(first[2]) == 20 and int(first[3]) == 1
    assert float(first[5]) < 0.01


def test_fit_command_roundtrip(tmp_path):
    t = np.linspace(0.0, 8.0, 50)
    y = evaluate("exp_decay", t, {"a": 0.9, "T1": 1.7, "b": 0.1})
    data_path = tmp_path / "data.csv"
    data_path.write_text(
        "t_us,y\n" + "\n".join(f"{a},{b}" for a, b in zip(t, y)), encoding="utf-8"
    )
    config = {"model": "exp_decay", "data_path": str(data_path)}
    out_path = tmp_path / "fit.json"
    cfg_path = write_config(tmp_path, config)
    assert run(["fit", "--config", cfg_path, "--format", "json",
                "--out", str(out_path)]) == 0
    doc = read_json(str(out_path))
    assert doc["fit"]["params"]["T1"] == pytest.approx(1.7, rel=1e-3)
    assert doc["fit"]["params"]["a"] == pytest.approx(0.9, rel=1e-3)


def test_sweep_amplitude_command(tmp_path, capsys):
    config = {"omega_c_values": [2.0, 4.0], "ratio": 14.0, "scan": {"points": 201}}
    cfg_path = write_config(tmp_path, config)
    assert run(["sweep-amplitude", "--config", cfg_path]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[3] == "omega_c_mhz,splitting_mhz,n_dips"
    for line, oc in zip(lines[4:], (2.0, 4.0)):
        cells = line.split(",")
        assert float(cells[0]) == pytest.approx(oc)
        assert float(cells[1]) == pytest.approx(oc, rel=0.02)


def test_sweep_detuning_command(tmp_path, capsys):
    config = {"drive": {"omega_c": 4.73, "omega_p": 4.73 / 14},
              "delta_c_values": [0.0, 2.365], "scan": {"points": 201}}
    cfg_path = write_config(tmp_path, config)
    assert run(["sweep-detuning", "--config", cfg_path]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[3].startswith("delta_c_mhz,dip_lo_mhz,dip_hi_mhz")
    row = lines[5].split(",")
    omega_eff = math.hypot(2.365, 4.73)
    assert float(row[5]) == pytest.approx(omega_eff, rel=0.01)


def test_reproduce_presets_run(tmp_path):
    out_path = tmp_path / "fig4.json"
    assert run(["reproduce", "fig4", "--format", "json", "--out", str(out_path)]) == 0
    doc = read_json(str(out_path))
    deepest = sorted(doc["dips"], key=lambda d: d["pl"])[:2]
    assert all(d["p0"] <= 0.01 for d in deepest)


def test_threads_env_var_validation(tmp_path, capsys, monkeypatch):
    cfg_path = write_config(tmp_path, FIG2B)
    monkeypatch.setenv("ATSIM_THREADS", "not-a-number")
    assert run(["spectrum", "--config", cfg_path]) == 2
    assert "ATSIM_THREADS" in capsys.readouterr().err
    monkeypatch.setenv("ATSIM_THREADS", "2")
    out_path = tmp_path / "scan.csv"
    assert run(["spectrum", "--config", cfg_path, "--out", str(out_path)]) == 0


def test_threads_flag_does_not_change_values(tmp_path):
    cfg_path = write_config(tmp_path, FIG2B)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["spectrum", "--config", cfg_path, "--out", str(a)]) == 0
    assert run(["spectrum", "--config", cfg_path, "--threads", "4",
                "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()


@pytest.mark.parametrize(
    "config,needle",
    [
        ({"drive": {"omega_c": 1.0}, "duration_us": 1.0}, "drive.omega_p"),
        ({"drive": {"omega_c": 1.0, "omega_p": "strong"}, "duration_us": 1.0},
         "drive.omega_p"),
        ({"drive": {"omega_c": 1.0, "omega_p": 0.1}, "duration_rule": "whenever"},
         "duration_rule"),
        ({"drive": {"omega_c": 1.0, "omega_p": 0.1}, "duration_us": 1.0,
          "scan": {"points": 2}}, "scan.points"),
        ({"drive": {"omega_c": 1.0, "omega_p": 0.1}, "duration_us": 1.0,
          "scan": {"grid": [2.0, 1.0]}}, "scan.grid"),
        ({"drive": {"omega_c": 1.0, "omega_p": 0.1}, "duration_us": 1.0,
          "noise": {"sigma": 0.1, "seed": -3}}, "noise.seed"),
        ({"drive": {"omega_c": 1.0, "omega_p": 0.1}, "duration_us": 1.0,
          "decoherence": {"gamma1": -0.5}}, "decoherence"),
    ],
)
def test_spectrum_config_errors_report_paths(tmp_path, capsys, config, needle):
    cfg_path = write_config(tmp_path, config)
    assert run(["spectrum", "--config", cfg_path]) == 2
    assert needle in capsys.readouterr().err


def test_fit_command_config_errors(tmp_path, capsys):
    cfg_path = write_config(tmp_path, {"data": [[0, 1], [1, 2]]})
    assert run(["fit", "--config", cfg_path]) == 2
    assert "model" in capsys.readouterr().err
    cfg_path = write_config(tmp_path, {"model": "exp_decay"})
    assert run(["fit", "--config", cfg_path]) == 2
    assert "data" in capsys.readouterr().err
    cfg_path = write_config(tmp_path, {"model": "exp_decay",
                                       "data_path": str(tmp_path / "absent.csv")})
    assert run(["fit", "--config", cfg_path]) == 2
    assert "data_path" in capsys.readouterr().err


def test_angular_units_escape_hatch(tmp_path):
    mhz_cfg = write_config(tmp_path, FIG2B, "mhz.json")
    angular = {
        "angular": True,
        "drive": {"omega_c": mhz_to_rad(1.0 / 1.8), "omega_p": mhz_to_rad(0.5 / 1.8)},
        "duration_us": 1.8,
        "scan": {"points": 101},
    }
    ang_cfg = write_config(tmp_path, angular, "angular.json")
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["spectrum", "--config", mhz_cfg, "--out", str(out_a)]) == 0
    assert run(["spectrum", "--config", ang_cfg, "--out", str(out_b)]) == 0
    # identical physics; only the embedded config normalization may differ
    assert out_a.read_text().splitlines()[3:] == out_b.read_text().splitlines()[3:]
