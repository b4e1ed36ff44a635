import json
import subprocess
import sys

import pytest

from padic_rtf.cli import main


def test_table_check_passes(capsys):
    assert main(["check", "--suite", "table"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 10 and "FAIL" not in out


def test_table_json_has_ten_rows(tmp_path):
    path = tmp_path / "t.json"
    assert main(["table", "--json", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    rows = data["rows"] if isinstance(data, dict) else data
    assert len({r["label"] for r in rows}) == 10


def test_gamma_check_at_five(capsys):
    assert main(["check", "--suite", "gamma", "--p", "5"]) == 0


def test_unknown_flag_is_a_usage_error(tmp_path, capsys):
    path = tmp_path / "never.json"
    assert main(["table", "--bogus", "--out", str(path)]) == 2
    assert not path.exists()
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["kloosterman", "--a", "1", "--b", "1", "--modulus", "9", "--p", "4"], ["gamma", "--m", "9"]])
def test_bad_config_is_a_usage_error(argv):
    assert main(argv) == 2


def test_same_seed_gives_identical_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["check", "--suite", "gamma", "--p", "3", "--seed", "17", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_environment_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv("PADIC_RTF_P", "5")
    path = tmp_path / "k.json"
    assert main(["kuznetsov", "--group", "pgl2", "--window", "0:2", "--out", str(path)]) == 0
    assert json.loads(path.read_text())["p"] == 5
    monkeypatch.setenv("PADIC_RTF_P", "nine")
    assert main(["kuznetsov", "--group", "pgl2"]) == 2


def test_kloosterman_prime_power_flag(capsys):
    assert main(["kloosterman", "--a", "1", "--b", "0", "--pk", "5^1"]) == 0
    val = json.loads(capsys.readouterr().out)["value"]
    assert abs(val[0] + 1) < 1e-12


def test_transfer_both_modes_agree(tmp_path):
    path = tmp_path / "tr.json"
    assert main(["transfer", "--row", "A1", "--basic", "--mode", "both", "--out", str(path)]) == 0
    assert json.loads(path.read_text())["max_deviation"][0] < 1e-9


def test_fl_smoke_reports_failure(capsys):
    assert main(["check", "--suite", "fl-smoke", "--primes", "3"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "padic_rtf", "kloosterman", "--a", "0", "--b", "0", "--modulus", "5"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["value"][0] == 4.0


def test_kuznetsov_artifact_feeds_transfer(tmp_path):
    k, t = tmp_path / "k.json", tmp_path / "t.json"
    assert main(["kuznetsov", "--group", "pgl2", "--m", "2", "--out", str(k)]) == 0
    assert main(["transfer", "--row", "A1", "--input", str(k), "--mode", "both", "--out", str(t)]) == 0
    assert json.loads(t.read_text())["max_deviation"][0] < 1e-9


def test_unreadable_input_is_a_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["transfer", "--row", "A1", "--input", str(bad)]) == 2


def test_twist_with_wrong_parity_is_a_usage_error(tmp_path, capsys):
    out = tmp_path / "f.json"
    assert main(["pushforward", "--d", "3", "--M", "4", "--twisted", "T", "--out", str(out)]) == 2
    assert "even d" in capsys.readouterr().err
    assert not out.exists()
