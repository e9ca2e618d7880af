import json
import subprocess
import sys

import pytest

from fieldscan.cli import run


def _simulate(tmp_path, name="field.fld", extra=()):
    out = tmp_path / name
    argv = [
        "simulate", "--dims", "12,12", "--components", "2", "--m", "3",
        "--sigma", "1.0", "--seed", "5", "--out", str(out),
    ]
    argv.extend(extra)
    assert run(argv) == 0
    return out


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "simulate" in capsys.readouterr().out
    assert run(["scan", "--help"]) == 0


def test_simulate_scan_round_trip(tmp_path, capsys):
    field = _simulate(tmp_path)
    out = tmp_path / "scan.json"
    code = run(["scan", "--input", str(field), "--windows", "cubic:4", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "scan statistic = " in text
    assert "argmax: origin=" in text
    payload = json.loads(out.read_text())
    assert set(payload) >= {"statistic", "argmax", "norm", "backend", "config"}
    assert payload["norm"] == "inf"
    assert payload["config"]["windows"] == "cubic:4"
    assert payload["config"]["dims"] == [12, 12]
    assert payload["config"]["components"] == 2


def test_scan_rerun_is_bitwise_identical(tmp_path):
    field = _simulate(tmp_path)
    cmd = [
        sys.executable, "-m", "fieldscan.cli", "scan",
        "--input", str(field), "--windows", "cubic:4",
    ]
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    r1 = subprocess.run(cmd + ["--out", str(first)], capture_output=True, text=True)
    r2 = subprocess.run(cmd + ["--out", str(second)], capture_output=True, text=True)
    assert r1.returncode == 0 and r2.returncode == 0
    assert r1.stdout == r2.stdout
    assert first.read_bytes() == second.read_bytes()


def test_scan_dump_lists_every_window(tmp_path):
    field = _simulate(tmp_path)
    dump = tmp_path / "windows.csv"
    assert run(["scan", "--input", str(field), "--windows", "cubic:4", "--dump", str(dump)]) == 0
    lines = dump.read_text().strip().splitlines()
    assert lines[0] == "origin1,origin2,size1,size2,L1,L2,norm"
    assert len(lines) == 1 + 81
    first = lines[1].split(",")
    assert first[:4] == ["0", "0", "4", "4"]


def test_critical_value_from_config_file(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "dims": [50, 50, 50], "components": 3, "m": 5, "sigma": 1.0,
        "windows": "cubic:30", "alpha": 0.05,
    }))
    assert run(["critical-value", "--config", str(config)]) == 0
    out = capsys.readouterr().out
    assert "critical value y = 0.573431" in out
    assert "windows=9261" in out
    # flags override the config file
    assert run(["critical-value", "--config", str(config), "--m", "7"]) == 0
    assert "critical value y = 0.94989" in capsys.readouterr().out


def test_config_echo_reflects_flag_override(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "dims": [10, 10], "components": 1, "m": 2, "sigma": 2.0,
        "windows": "cubic:4",
    }))
    out = tmp_path / "cv.json"
    assert run(["critical-value", "--config", str(config), "--sigma", "1.0",
                "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["config"]["sigma"] == 1.0
    assert payload["config"]["m"] == 2


def test_calibrate_output_and_thread_invariance(tmp_path):
    base = [
        "calibrate", "--dims", "10,10", "--components", "1", "--m", "2",
        "--sigma", "1.0", "--reps", "16", "--seed", "3", "--windows", "cubic:4",
    ]
    one = tmp_path / "t1.json"
    four = tmp_path / "t4.json"
    assert run(base + ["--threads", "1", "--out", str(one)]) == 0
    assert run(base + ["--threads", "4", "--out", str(four)]) == 0
    a = json.loads(one.read_text())
    b = json.loads(four.read_text())
    assert set(a) >= {"y_hat", "alpha", "reps", "rank", "at_sample_max", "sample", "seed"}
    assert a["y_hat"] == b["y_hat"]
    assert a["sample"] == b["sample"]
    assert a["reps"] == 16
    assert len(a["sample"]) == 16


def test_detect_exit_codes(tmp_path):
    null_field = _simulate(tmp_path, "null.fld")
    report = tmp_path / "report.json"
    code = run(["detect", "--input", str(null_field), "--threshold", "50",
                "--windows", "cubic:4", "--out", str(report)])
    assert code == 0
    assert json.loads(report.read_text())["reject_global"] is False

    anom = _simulate(tmp_path, "anom.fld", extra=["--anomaly", "2,2;6,6;5,-5"])
    code = run(["detect", "--input", str(anom), "--threshold", "2.0",
                "--windows", "cubic:4", "--alpha", "0.05",
                "--threshold-source", "empirical", "--out", str(report)])
    assert code == 2
    payload = json.loads(report.read_text())
    assert payload["reject_global"] is True
    assert payload["threshold_source"] == "empirical"
    assert payload["alpha"] == 0.05
    assert payload["rejected"]


def test_covariance_report(tmp_path, capsys):
    field = _simulate(tmp_path)
    out = tmp_path / "cov.json"
    assert run(["covariance", "--input", str(field), "--max-lag", "4",
                "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "axis 0 lags 0..4:" in text
    payload = json.loads(out.read_text())
    assert set(payload) >= {"max_lag", "cov", "counts", "degenerate"}
    assert payload["max_lag"] == 4
    assert len(payload["cov"]) == 2
    assert len(payload["cov"][0]) == 5
    assert payload["degenerate"] is False


def test_error_paths_exit_one(tmp_path, capsys):
    assert run(["scan", "--input", str(tmp_path / "nope.fld")]) == 1
    assert "error:" in capsys.readouterr().err

    assert run(["scan", "--no-such-flag"]) == 1

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["critical-value", "--config", str(bad)]) == 1

    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"dims": [4, 4], "bogus_key": 1}))
    assert run(["critical-value", "--config", str(unknown)]) == 1

    field = _simulate(tmp_path)
    assert run(["scan", "--input", str(field), "--windows", "spherical:3"]) == 1
    assert run(["detect", "--input", str(field), "--threshold", "-1",
                "--windows", "cubic:4"]) == 1


def test_no_stray_temp_files(tmp_path):
    field = _simulate(tmp_path)
    out = tmp_path / "scan.json"
    assert run(["scan", "--input", str(field), "--windows", "cubic:4",
                "--out", str(out)]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["field.fld", "scan.json"]


def test_truncated_field_file_rejected(tmp_path):
    field = _simulate(tmp_path)
    clipped = tmp_path / "clipped.fld"
    clipped.write_bytes(field.read_bytes()[:-16])
    assert run(["scan", "--input", str(clipped), "--windows", "cubic:4"]) == 1
