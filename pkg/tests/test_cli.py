from __future__ import annotations

import json
import subprocess
import sys

import pytest

from sitcalc.acs import ACS_DOMAIN, ACS_SCENARIO, BLOCKS_DOMAIN, LOOP_DOMAIN
from sitcalc.cli import (
    BUDGET_ENV, EXIT_COUNTEREXAMPLE, EXIT_INPUT, EXIT_OK, EXIT_RUNTIME, RunConfig, main,
)

from .conftest import FIXTURES, GOLDEN

NO_POLICY = "fluent n: int {\n  init = 0\n  after go = n\n}\n\naction go\n"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# --------------------------------------------------------------------- run

def test_run_text(capsys):
    code, out, _ = run(capsys, "run", ACS_DOMAIN, ACS_SCENARIO)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("add ev003: Altern")
    assert lines[2] == "delete ev001: RawPlusSupplement  ->  agenda_list = {ev002, ev004}, tempagn_list = {ev003}"


def test_run_jsonl_matches_golden(capsys, tmp_path):
    code, out, _ = run(capsys, "run", ACS_DOMAIN, ACS_SCENARIO, "--format", "jsonl")
    assert code == EXIT_OK and out == (GOLDEN / "acs_trace.jsonl").read_text()
    target = tmp_path / "trace.jsonl"
    assert run(capsys, "run", ACS_DOMAIN, ACS_SCENARIO, "--format", "jsonl", "-o", target)[0] == EXIT_OK
    assert target.read_text() == out


def test_missing_domain_file(capsys, tmp_path):
    code, _, err = run(capsys, "run", tmp_path / "nope.domain", ACS_SCENARIO)
    assert code == EXIT_INPUT and "cannot read" in err


def test_missing_scenario_file(capsys, tmp_path):
    code, _, err = run(capsys, "run", ACS_DOMAIN, tmp_path / "nope.scen")
    assert code == EXIT_INPUT and "cannot read" in err


def test_scenario_against_domain_without_policies(capsys, tmp_path):
    dom = tmp_path / "np.domain"
    dom.write_text(NO_POLICY)
    code, _, err = run(capsys, "run", dom, ACS_SCENARIO)
    assert code == EXIT_INPUT and "UnknownPolicy" in err


def test_syntax_error_is_input_failure(capsys, tmp_path):
    dom = tmp_path / "bad.domain"
    dom.write_text("fluent n: int {\n  init = \n}\n")
    code, _, err = run(capsys, "run", dom, ACS_SCENARIO)
    assert code == EXIT_INPUT and "bad.domain:3:1" in err


def test_non_closed_domain_is_refused_by_run(capsys, tmp_path):
    scen = tmp_path / "x.scen"
    scen.write_text("")
    code, _, err = run(capsys, "run", FIXTURES / "adversarial.domain", scen)
    assert code == EXIT_INPUT and "NotClosed" in err


def test_budget_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(BUDGET_ENV, "1")
    code, _, err = run(capsys, "run", ACS_DOMAIN, ACS_SCENARIO)
    assert code == EXIT_RUNTIME and "IterationBudgetExceeded" in err
    # an explicit flag wins over the environment
    assert run(capsys, "run", ACS_DOMAIN, ACS_SCENARIO, "--budget", "5")[0] == EXIT_OK


def test_budget_flag_is_validated(capsys):
    with pytest.raises(SystemExit) as info:
        main(["run", str(ACS_DOMAIN), str(ACS_SCENARIO), "--budget", "0"])
    assert info.value.code == 2


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(ACS_DOMAIN, budget=0)
    with pytest.raises(ValueError):
        RunConfig(ACS_DOMAIN, depth=-1)


# ----------------------------------------------------------------- analyze

def test_analyze_acs(capsys):
    code, out, _ = run(capsys, "analyze", ACS_DOMAIN)
    assert code == EXIT_OK
    assert "DF:  agenda_list, tempagn_list" in out
    assert out.count("info: Incremental") == 4
    assert "minimal: yes" in out


def test_analyze_jsonl(capsys):
    code, out, _ = run(capsys, "analyze", BLOCKS_DOMAIN, "--format", "jsonl")
    data = json.loads(out)
    assert code == EXIT_OK and data["df"] == ["on", "ontable"] and data["minimal"] is True


def test_analyze_loop(capsys):
    code, out, _ = run(capsys, "analyze", LOOP_DOMAIN)
    assert code == EXIT_OK and "DF:  F1, F2" in out and "minimal: yes" in out


# ------------------------------------------------------------------- check

def test_check_acs(capsys):
    code, out, _ = run(capsys, "check", ACS_DOMAIN, "--samples", "50", "--cases", "200")
    assert code == EXIT_OK
    assert out.startswith("markov: pass") and "composition: pass" in out


def test_check_adversarial_reports_counterexample(capsys):
    code, out, _ = run(capsys, "check", FIXTURES / "adversarial.domain", "--format", "jsonl")
    assert code == EXIT_COUNTEREXAMPLE
    first = json.loads(out.splitlines()[0])
    assert first["verdict"] == "fail" and first["counterexample"]["observable"] == "Poss(act)"


def test_check_depth_zero(capsys):
    assert run(capsys, "check", ACS_DOMAIN, "--depth", "0", "--samples", "20", "--cases", "50")[0] == EXIT_OK


# --------------------------------------------------------------------- fmt

def test_fmt_check_on_canonical_file(capsys):
    assert run(capsys, "fmt", ACS_DOMAIN, "--check")[0] == EXIT_OK


def test_fmt_check_on_non_canonical_file(capsys, tmp_path):
    dom = tmp_path / "messy.domain"
    dom.write_text("action   go   pre true")
    code, _, err = run(capsys, "fmt", dom, "--check")
    assert code == EXIT_INPUT and "not in canonical form" in err


def test_fmt_check_on_malformed_file(capsys, tmp_path):
    dom = tmp_path / "broken.domain"
    dom.write_text("action (")
    assert run(capsys, "fmt", dom, "--check")[0] == EXIT_INPUT


def test_fmt_is_idempotent(capsys, tmp_path):
    dom = tmp_path / "messy.domain"
    dom.write_text("action go pre true\nfluent n: int { init = 0 after go = n + 1 }")
    once = tmp_path / "once.domain"
    twice = tmp_path / "twice.domain"
    assert run(capsys, "fmt", dom, "-o", once)[0] == EXIT_OK
    assert run(capsys, "fmt", once, "-o", twice)[0] == EXIT_OK
    assert once.read_text() == twice.read_text()
    assert run(capsys, "fmt", once, "--check")[0] == EXIT_OK


# ----------------------------------------------------------------- process

def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sitcalc", "run", str(ACS_DOMAIN), str(ACS_SCENARIO)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.count("\n") == 3


def test_help_lists_exit_codes():
    proc = subprocess.run([sys.executable, "-m", "sitcalc", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "runtime failure" in proc.stdout
