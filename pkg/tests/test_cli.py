import json
import subprocess
import sys
from fractions import Fraction

import pytest

from hbar_miura.cli import ConfigError, build_config, main, parse_suites, parse_variant, read_config_file, run
from hbar_miura.report import SuiteReport


def test_list_currents(capsys):
    assert main(["list-currents"]) == 0
    out = capsys.readouterr().out
    assert "h_plus" in out and "d_charge" in out


def test_passing_suite_exit_zero_and_report_file(tmp_path, capsys):
    assert main(["verify", "fusion", "--format", "md", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "report.md").read_text()
    assert "fusion/fusion" in text and "**pass**" in text


def test_failing_check_exit_one(capsys):
    assert main(["verify", "poisson", "--variant", "sdelta=printed", "--order", "6"]) == 1
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "fail"


def test_configuration_errors_exit_two(capsys, tmp_path, monkeypatch):
    assert main(["verify", "bogus"]) == 2
    assert main(["verify", "fusion", "--k", "one"]) == 2
    assert main(["verify", "fusion", "--variant", "ef=nope"]) == 2
    assert main(["verify", "baxter", "--q", "1/u"]) == 2
    assert main(["verify", "fusion", "--config", str(tmp_path / "missing.cfg")]) == 2
    monkeypatch.setenv("HBAR_MIURA_WORKERS", "many")
    assert main(["verify", "fusion"]) == 2


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# fusion only\nsuites = fusion\nn = 3\nformat = json\n")
    assert read_config_file(str(cfg))["n"] == "3"
    assert main(["verify", "--config", str(cfg), "--n", "4"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["config"]["n"] == 4 and payload["config"]["suites"] == ["fusion"]


def test_parsers():
    assert parse_suites(["all"])[0] == "defining" and len(parse_suites(["all", "rho"])) == 9
    assert parse_variant("reconciled") == {}
    assert parse_variant("hminus=printed, sdelta=derived") == {"hminus": "printed", "sdelta": "derived"}
    cfg = build_config({"k": "-2", "hbar": "2/3", "cutoff": 2})
    assert cfg.k == -2 and cfg.hbar == Fraction(2, 3) and cfg.cutoff == 2
    assert build_config({"k": "symbolic"}).echo()["k"] == "symbolic"
    for bad in ({"hbar": "0"}, {"cutoff": "-1"}, {"format": "xml"}, {"colour": "red"}):
        with pytest.raises(ConfigError):
            build_config(bad)


def test_payload_is_byte_stable():
    cfg = build_config({"suites": "fusion baxter", "n": 3})
    a = json.dumps(run(cfg).payload(), sort_keys=True)
    b = json.dumps(run(cfg).payload(), sort_keys=True)
    assert a == b


def test_empty_report_passes():
    assert SuiteReport({}, []).passed


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hbar_miura", "verify", "fusion", "--n", "2"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["checks"][0]["check"] == "fusion/fusion"
