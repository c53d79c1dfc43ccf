import hashlib
import json
import math
import subprocess
import sys

import pytest

from kaonbell import __version__
from kaonbell.cli import EXIT_OK, EXIT_USAGE, main
from kaonbell.params import default_params
from kaonbell.qm import qm_asymmetry
from kaonbell.realism import asymmetry_bounds

DEFAULTS = default_params()


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv(path):
    lines = path.read_text().split("\n")
    assert lines[-1] == ""  # trailing newline
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:-1]]
    return header, rows


class TestParamsCommand:
    def test_defaults_provenance(self, capsys):
        code, out, _ = run_cli(["params"], capsys)
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["params"]["gamma_s"] == 1.0
        assert payload["params"]["delta_m"] == pytest.approx(2 * math.pi / 13, rel=1e-15)
        assert payload["provenance"] == {
            "gamma_s": "default", "gamma_l": "default", "delta_m": "default"
        }
        assert payload["config_file"] is None

    def test_env_config(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "env.cfg"
        cfg.write_text("gamma_l = 0.002\n")
        monkeypatch.setenv("KAONBELL_PARAMS", str(cfg))
        code, out, _ = run_cli(["params"], capsys)
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["params"]["gamma_l"] == 0.002
        assert payload["provenance"]["gamma_l"] == f"env:{cfg}"
        assert payload["provenance"]["gamma_s"] == "default"

    def test_flag_overrides_file(self, capsys, tmp_path):
        cfg = tmp_path / "f.cfg"
        cfg.write_text("delta_m = 0.3\ngamma_l = 0.002\n")
        code, out, _ = run_cli(
            ["params", "--params", str(cfg), "--delta-m", "0"], capsys
        )
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["params"]["delta_m"] == 0.0
        assert payload["provenance"]["delta_m"] == "flag"
        assert payload["provenance"]["gamma_l"] == f"file:{cfg}"

    def test_params_flag_beats_env(self, capsys, tmp_path, monkeypatch):
        env_cfg = tmp_path / "env.cfg"
        env_cfg.write_text("gamma_l = 0.9\n")  # would fail validation anyway
        flag_cfg = tmp_path / "flag.cfg"
        flag_cfg.write_text("gamma_l = 0.003\n")
        monkeypatch.setenv("KAONBELL_PARAMS", str(env_cfg))
        code, out, _ = run_cli(["params", "--params", str(flag_cfg)], capsys)
        assert code == EXIT_OK
        assert json.loads(out)["params"]["gamma_l"] == 0.003

    def test_parse_error_exits_with_usage(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("gamma_s = 1.0\nnot a line\n")
        code, _, err = run_cli(["params", "--params", str(cfg)], capsys)
        assert code == EXIT_USAGE
        assert "bad.cfg:2" in err

    def test_invalid_params_exit(self, capsys):
        code, _, err = run_cli(["params", "--gamma-l", "2.0"], capsys)
        assert code == EXIT_USAGE
        assert "gamma_l" in err


class TestCurveCommand:
    def test_asymmetry_curve(self, capsys, tmp_path):
        out = tmp_path / "asym.csv"
        code, _, _ = run_cli(
            ["curve", "asymmetry", "--alpha", "1.5", "--x-lo", "0", "--x-hi", "3",
             "--steps", "301", "--out", str(out)], capsys
        )
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["tau1", "a_qm", "a_lr_min", "a_lr_max"]
        assert len(rows) == 301
        # inclusive endpoints, compatibility point at tau1 = 0 present
        assert rows[0] == ["0", "1", "1", "1"]
        assert float(rows[-1][0]) == 3.0
        row = next(r for r in rows if abs(float(r[0]) - 1.5) < 1e-9)
        assert float(row[1]) == pytest.approx(0.873119114596, abs=1e-6)
        assert float(row[3]) == pytest.approx(0.694787501917, abs=1e-6)
        # 9-significant-digit formatting contract
        t = float(row[0])
        assert row[1] == format(qm_asymmetry(DEFAULTS, t, 1.5 * t), ".9g")
        assert row[3] == format(asymmetry_bounds(DEFAULTS, t, 1.5 * t).upper, ".9g")

    def test_newlines_and_byte_stability(self, capsys, tmp_path):
        args = ["curve", "asymmetry", "--alpha", "1.5", "--x-lo", "0", "--x-hi", "2",
                "--steps", "41"]
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        assert run_cli(args + ["--out", str(first)], capsys)[0] == EXIT_OK
        assert run_cli(args + ["--out", str(second)], capsys)[0] == EXIT_OK
        assert first.read_bytes() == second.read_bytes()
        assert b"\r" not in first.read_bytes()

    def test_chsh_ren_curve(self, capsys, tmp_path):
        out = tmp_path / "chsh.csv"
        code, _, _ = run_cli(
            ["curve", "chsh", "--mode", "ren", "--x-lo", "0", "--x-hi", "4",
             "--steps", "401", "--out", str(out)], capsys
        )
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["tau", "s"]
        s_values = [float(r[1]) for r in rows]
        taus = [float(r[0]) for r in rows]
        i = s_values.index(min(s_values))
        assert min(s_values) == pytest.approx(-1.0875, abs=5e-4)
        assert taus[i] == pytest.approx(0.81, abs=0.02)

    def test_chsh_stable_curve_violates_both_sides(self, capsys, tmp_path):
        out = tmp_path / "stable.csv"
        code, _, _ = run_cli(
            ["curve", "chsh", "--mode", "stable", "--x-lo", "0", "--x-hi", "13",
             "--steps", "521", "--out", str(out)], capsys
        )
        assert code == EXIT_OK
        _, rows = read_csv(out)
        s_values = [float(r[1]) for r in rows]
        assert min(s_values) < -1.0
        assert max(s_values) > 0.0

    def test_chsh_unren_curve_stays_in_band(self, capsys, tmp_path):
        out = tmp_path / "unren.csv"
        code, _, _ = run_cli(
            ["curve", "chsh", "--mode", "unren", "--p", "1", "--x-lo", "0",
             "--x-hi", "4", "--steps", "201", "--out", str(out)], capsys
        )
        assert code == EXIT_OK
        _, rows = read_csv(out)
        assert all(-1.0 <= float(r[1]) <= 0.0 for r in rows)

    def test_bad_spec_rejected(self, capsys, tmp_path):
        out = tmp_path / "x.csv"
        code, _, _ = run_cli(
            ["curve", "asymmetry", "--alpha", "0.9", "--x-lo", "0", "--x-hi", "1",
             "--steps", "10", "--out", str(out)], capsys
        )
        assert code == EXIT_USAGE
        code, _, _ = run_cli(
            ["curve", "asymmetry", "--alpha", "1.5", "--x-lo", "2", "--x-hi", "1",
             "--steps", "10", "--out", str(out)], capsys
        )
        assert code == EXIT_USAGE

    def test_manifest_written(self, capsys, tmp_path):
        out = tmp_path / "c.csv"
        run_cli(["curve", "chsh", "--mode", "ren", "--x-lo", "0", "--x-hi", "1",
                 "--steps", "11", "--out", str(out)], capsys)
        manifest = json.loads((tmp_path / "c.manifest.json").read_text())
        assert manifest["version"] == __version__
        digest = hashlib.sha256(out.read_bytes()).hexdigest()
        assert manifest["outputs"] == [{"path": "c.csv", "sha256": digest}]


class TestScanCommand:
    def test_finds_kaon_optimum(self, capsys):
        code, out, _ = run_cli(
            ["scan", "--tau-lo", "0", "--tau-hi", "4", "--tol", "1e-6"], capsys
        )
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["tau_star"] == pytest.approx(0.80755, abs=1e-3)
        assert payload["s_star"] == pytest.approx(-1.08749, abs=1e-4)
        assert payload["status"] == "violation"
        assert payload["p_min_locality"] == 5.45
        sched = payload["example_schedule"]
        assert sched["p"] == 6.0
        t = payload["tau_star"]
        assert sched["times"] == pytest.approx([6 * t, 8 * t, 7 * t, 9 * t], rel=1e-12)

    def test_no_violation_status(self, capsys):
        code, out, _ = run_cli(["scan", "--tau-lo", "2", "--tau-hi", "4"], capsys)
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["status"] == "no_violation"
        assert payload["s_star"] > -1.0

    def test_stable_limit(self, capsys):
        dm = DEFAULTS.delta_m
        code, out, _ = run_cli(
            ["scan", "--stable", "--tau-lo", "0", "--tau-hi", str(2 * math.pi / dm)],
            capsys,
        )
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["s_star"] == pytest.approx(-1.2071067811865475, abs=1e-6)
        assert payload["params"]["gamma_s"] == 0.0

    def test_out_file_matches_stdout(self, capsys, tmp_path):
        out = tmp_path / "scan.json"
        code, stdout, _ = run_cli(
            ["scan", "--tau-lo", "0", "--tau-hi", "4", "--out", str(out)], capsys
        )
        assert code == EXIT_OK
        assert out.read_text() == stdout
        assert (tmp_path / "scan.manifest.json").exists()


class TestSimulateCommand:
    def test_simulate_output(self, capsys, tmp_path):
        out = tmp_path / "sim.json"
        code, _, _ = run_cli(
            ["simulate", "--model", "threshold-max", "--tau1", "1.5", "--tau2", "2.25",
             "--n-events", "200000", "--seed", "42", "--out", str(out)], capsys
        )
        assert code == EXIT_OK
        payload = json.loads(out.read_text())
        assert payload["within_bounds"] is True
        assert payload["counts"]["n_events"] == 200000
        assert sum(map(sum, payload["counts"]["tallies"])) == 200000
        est = payload["asymmetry"]
        bounds = payload["bounds"]
        assert bounds["lower"] == pytest.approx(-0.147977429265, rel=1e-9)
        assert bounds["upper"] == pytest.approx(0.694787501917, rel=1e-9)
        assert abs(est["value"] - bounds["upper"]) < 3 * est["sigma"]

    def test_equal_time_comonotone_has_no_like_counts(self, capsys, tmp_path):
        out = tmp_path / "eq.json"
        code, _, _ = run_cli(
            ["simulate", "--model", "threshold-max", "--tau1", "1.0", "--tau2", "1.0",
             "--n-events", "100000", "--seed", "9", "--out", str(out)], capsys
        )
        assert code == EXIT_OK
        tallies = json.loads(out.read_text())["counts"]["tallies"]
        assert tallies[0][0] == 0 and tallies[1][1] == 0

    def test_same_seed_byte_identical(self, capsys, tmp_path):
        args = ["simulate", "--model", "independent-jumps", "--tau1", "0.5",
                "--tau2", "1.0", "--n-events", "100000", "--seed", "7"]
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        assert run_cli(args + ["--out", str(a)], capsys)[0] == EXIT_OK
        assert run_cli(args + ["--out", str(b)], capsys)[0] == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_thread_count_byte_identical(self, capsys, tmp_path):
        args = ["simulate", "--model", "threshold-min", "--tau1", "0.5",
                "--tau2", "1.2", "--n-events", "600000", "--seed", "3"]
        a = tmp_path / "t1.json"
        b = tmp_path / "t4.json"
        assert run_cli(args + ["--threads", "1", "--out", str(a)], capsys)[0] == EXIT_OK
        assert run_cli(args + ["--threads", "4", "--out", str(b)], capsys)[0] == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_rerun_from_manifest_reproduces_bytes(self, capsys, tmp_path):
        out = tmp_path / "orig.json"
        run_cli(
            ["simulate", "--model", "threshold-max", "--tau1", "0.4", "--tau2", "0.9",
             "--n-events", "50000", "--seed", "11", "--out", str(out)], capsys
        )
        manifest = json.loads((tmp_path / "orig.manifest.json").read_text())
        command = manifest["resolved_command"]
        assert command[0] == "kaonbell"
        replay = [str(tmp_path / "replay.json") if arg == str(out) else arg
                  for arg in command[1:]]
        assert main(replay) == EXIT_OK
        capsys.readouterr()
        assert (tmp_path / "replay.json").read_bytes() == out.read_bytes()
        digest = hashlib.sha256(out.read_bytes()).hexdigest()
        assert manifest["outputs"][0]["sha256"] == digest
        assert manifest["seed"] == 11

    def test_bad_ordering_rejected(self, capsys, tmp_path):
        code, _, err = run_cli(
            ["simulate", "--model", "threshold-max", "--tau1", "2.0", "--tau2", "1.0",
             "--n-events", "1000", "--seed", "0", "--out", str(tmp_path / "x.json")],
            capsys,
        )
        assert code == EXIT_USAGE
        assert "tau1" in err


def test_module_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "kaonbell", "params"],
        capture_output=True, text=True, check=True,
    )
    payload = json.loads(result.stdout)
    assert payload["params"]["gamma_s"] == 1.0


def test_unknown_model_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--model", "nonsense", "--tau1", "1", "--tau2", "2",
              "--out", "x.json"])
    assert err.value.code == EXIT_USAGE
