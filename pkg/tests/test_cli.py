import json
import subprocess
import sys

import pytest

from cvqml.cli import ConfigError, check_tolerances, dumps, main, run_config, strip_timestamp, validate


def _run(tmp_path, cfg, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    return main([*extra, "run", str(path), "--out", str(out)]), out


def test_validate_names_unknown_key():
    with pytest.raises(ConfigError, match="bogus"):
        validate({"kind": "eswap", "bogus": 1})


def test_validate_unknown_kind_and_bad_type():
    with pytest.raises(ConfigError, match="kind"):
        validate({"kind": "nope"})
    with pytest.raises(ConfigError, match="dim"):
        validate({"kind": "eswap", "dim": "six"})
    with pytest.raises(ConfigError):
        validate({"kind": "invert", "b": [1, 0]})


def test_validate_accepts_complex_entries():
    validate({"kind": "invert", "A": [[1, {"re": 0, "im": 1}], [{"re": 0, "im": -1}, 2]], "b": [1, 0]})


def test_dumps_uses_17_digits():
    text = dumps({"x": 0.1, "z": 1 + 2j, "n": None, "b": True})
    doc = json.loads(text)
    assert "0.10000000000000001" in text
    assert doc["z"] == {"re": 1.0, "im": 2.0} and doc["n"] is None and doc["b"] is True


def test_strip_timestamp():
    a = json.dumps({"a": 1, "timestamp": {"utc": "x"}})
    b = json.dumps({"timestamp": {"utc": "y"}, "a": 1})
    assert strip_timestamp(a) == strip_timestamp(b)


def test_check_tolerances():
    res = {"a": {"b": 1.5}, "c": 3}
    assert check_tolerances(res, {"a.b": {"min": 1, "max": 2}}) == []
    assert len(check_tolerances(res, {"c": {"max": 2}, "missing": {"min": 0}})) == 2


def test_run_eswap_writes_report(tmp_path):
    code, out = _run(tmp_path, {"kind": "eswap", "dim": 3, "n_states": 2})
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["config"]["kind"] == "eswap"
    assert rep["results"]["min_fidelity"] > 1 - 1e-8
    assert "utc" in rep["timestamp"] and "wall_clock_seconds" in rep["timestamp"]


def test_run_channel_writes_curve_and_honours_threads(tmp_path):
    cfg = {"kind": "channel-scaling", "dim": 3, "pairs": 2, "deltas": [1e-3, 1e-2, 1e-1]}
    code, out = _run(tmp_path, cfg, "--threads", "2", "--seed", "5")
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["config"]["threads"] == 2 and rep["config"]["seed"] == 5
    lines = (out / "curve_channel.csv").read_text().splitlines()
    assert lines[0] == "delta,error_0,error_1" and len(lines) == 4


def test_threads_do_not_change_results(tmp_path):
    cfg = {"kind": "channel-scaling", "dim": 3, "pairs": 3, "deltas": [1e-2, 1e-1], "seed": 2}
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_config({**cfg, "threads": 1}, a) == 0
    assert run_config({**cfg, "threads": 3}, b) == 0
    ra = json.loads((a / "report.json").read_text())["results"]
    rb = json.loads((b / "report.json").read_text())["results"]
    assert ra == rb


def test_run_is_deterministic(tmp_path):
    cfg = {"kind": "success-rate", "lambdas": [1.0, 2.0], "eps": [0.05, 0.1]}
    run_config(cfg, tmp_path / "a")
    run_config(cfg, tmp_path / "b")
    ta = (tmp_path / "a" / "report.json").read_text()
    tb = (tmp_path / "b" / "report.json").read_text()
    assert strip_timestamp(ta) == strip_timestamp(tb)


def test_invalid_config_exit_2(tmp_path, capsys):
    code, out = _run(tmp_path, {"kind": "eswap", "bogus": 1})
    assert code == 2
    assert "bogus" in capsys.readouterr().err
    assert json.loads((out / "report.json").read_text())["error"]["exit_code"] == 2


def test_unreadable_config_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad), "--out", str(tmp_path)]) == 2


def test_numerical_failure_exit_3(tmp_path):
    # an indefinite A has no trace-scaled density decomposition for the Trotter path
    cfg = {"kind": "invert", "A": [[1, 0], [0, -1]], "b": [1, 1], "path": "trotter", "dim_R": 4}
    code, out = _run(tmp_path, cfg)
    assert code == 3
    err = json.loads((out / "report.json").read_text())["error"]
    assert err["exit_code"] == 3 and err["message"]


def test_tolerance_breach_exit_4(tmp_path):
    cfg = {"kind": "eswap", "dim": 2, "n_states": 1, "tolerances": {"min_fidelity": {"min": 2.0}}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", str(path), "--out", str(tmp_path / "o"), "--check"]) == 4
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["check"]["passed"] is False
    # without --check the same config succeeds
    assert main(["run", str(path), "--out", str(tmp_path / "o2")]) == 0


def test_unknown_suite_exit_2():
    assert main(["check", "medium"]) == 2


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kind": "eswap", "dim": 2, "n_states": 1}))
    proc = subprocess.run([sys.executable, "-m", "cvqml", "run", str(cfg), "--out", str(tmp_path / "o")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "report.json").exists()


def test_distance_with_equal_vectors_estimates_zero(tmp_path):
    cfg = {"kind": "distance", "u": [0.6, 0.8], "vs": [[0.6, 0.8]], "beta": 2.0, "shots": 20000, "seed": 4}
    code, out = _run(tmp_path, cfg)
    assert code == 0
    est = json.loads((out / "report.json").read_text())["results"]["estimates"]
    assert abs(est["D2"]) < 3 * est["D2_standard_error"]
    assert (out / "curve_distance.csv").read_text().startswith("x,density\n")
