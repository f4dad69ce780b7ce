import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from telx.cli import main
from telx.formats import parse_grammar, parse_tbox

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv, **kw):
    code, out, _ = run(capsys, "--json", *argv, **kw)
    return code, json.loads(out)


def test_taqa_alice(capsys):
    code, out, _ = run(capsys, "taqa", DATA / "advisor.tel", DATA / "advisor.abox", "--query", "Happy(alice,2028)")
    assert code == 0 and out.strip() == "Yes"
    code, res = run_json(capsys, "taqa", DATA / "advisor.tel", DATA / "advisor.abox",
                         "--query", "Happy(alice,2026)", "-v")
    assert res["payload"]["verdict"] == "No" and res["payload"]["length"] == 1


def test_taqa_verbose_names_the_test(capsys):
    _, out, _ = run(capsys, "taqa", DATA / "advisor.tel", DATA / "advisor.abox", "--query", "Happy(alice,2028)", "-v")
    assert "nonterminal: N_C_alice_Happy_2026" in out and "length: 3" in out


def test_member_powers_of_four(capsys):
    code, out, _ = run(capsys, "member", DATA / "powers_of_four.cg", "--nt", "N1", "--word", "c^16")
    assert code == 0 and out.strip() == "Yes"


def test_to_grammar_then_member(capsys, monkeypatch):
    _, grammar_text, _ = run(capsys, "to-grammar", DATA / "advisor.tel")
    assert parse_grammar(grammar_text).nonterminal_for("Prof", "Happy") == "N_Prof_Happy"
    _, out, _ = run(capsys, "member", "--nt", "N_Prof_Happy", "--word", "c^2",
                    stdin=grammar_text, monkeypatch=monkeypatch)
    assert out.strip() == "No"
    _, out, _ = run(capsys, "member", "--nt", "N_Prof_Happy", "--word", "c^3",
                    stdin=grammar_text, monkeypatch=monkeypatch)
    assert out.strip() == "Yes"


def test_to_tbox_output_reparses(capsys, tmp_path):
    _, text, err = run(capsys, "to-tbox", DATA / "one_or_four.cg")
    t = parse_tbox(text)
    assert "source concept: A" in err
    path = tmp_path / "t.tel"
    path.write_text(text)
    _, res = run_json(capsys, "shift-set", path, "--lhs", "A", "--rhs", "B1", "--bound", "10")
    assert res["payload"]["shifts"] == [1, 4]
    assert res["diagnostics"]


def test_balance_search_and_budget_diagnostic(capsys, monkeypatch):
    _, g, _ = run(capsys, "to-cfg", DATA / "back_and_forth.tel")
    code, res = run_json(capsys, "member", "--nt", "N_A_E", "--balance", "2", stdin=g, monkeypatch=monkeypatch)
    assert res["payload"] == {"verdict": "Yes", "witness": "ddcccc"}
    code, res = run_json(capsys, "member", "--nt", "N_A_E", "--balance", "3", "--max-len", "12",
                         stdin=g, monkeypatch=monkeypatch)
    assert res["payload"]["verdict"] == "NoWithinBudget"
    assert any("NoWithinBudget" in d for d in res["diagnostics"])


def test_approximate_rigidisation_is_flagged(capsys):
    _, res = run_json(capsys, "to-cfg", DATA / "local_detour.tel")
    assert res["payload"]["exact"] is False and res["diagnostics"]
    _, res = run_json(capsys, "to-cfg", DATA / "back_and_forth.tel")
    assert res["payload"]["exact"] is True and res["diagnostics"] == []


def test_unknown_at_bound_is_flagged(capsys):
    _, res = run_json(capsys, "entails", DATA / "advisor.tel", DATA / "advisor.abox", "--fact", "Happy(alice,2026)")
    assert res["payload"]["verdict"] == "UnknownAtBound"
    assert any("UnknownAtBound" in d for d in res["diagnostics"])


def test_entails_inclusion_and_trace(capsys):
    _, res = run_json(capsys, "entails", DATA / "advisor.tel", "--ci", "Prof [= X^3 Happy")
    assert res["payload"]["verdict"] == "Yes"
    _, res = run_json(capsys, "trace", DATA / "advisor.tel", DATA / "advisor.abox", "--fact", "Happy(alice,2028)")
    steps = res["payload"]["steps"]
    assert len(steps) == 8 and steps[-1]["rule_id"] == "CONJ"


def test_classify_validate_saturate(capsys):
    _, res = run_json(capsys, "classify", DATA / "back_and_forth.tel")
    assert res["payload"] == {"is_future": False, "is_linear": True, "rigid_only": True}
    _, res = run_json(capsys, "validate", DATA / "advisor.tel")
    assert res["payload"] == []
    _, res = run_json(capsys, "saturate", DATA / "advisor.tel", DATA / "advisor.abox", "--lo", "2025", "--hi", "2028")
    assert "Happy(alice, 2028)" in res["payload"]["facts"]


def test_datalog_commands(capsys, tmp_path):
    _, text, _ = run(capsys, "emit-datalog", DATA / "local_detour.tel")
    prog = tmp_path / "p.dl"
    prog.write_text(text)
    _, res = run_json(capsys, "eval-datalog", prog, DATA / "a0.abox", "--lo", "-5", "--hi", "5")
    assert "G(a, 2)" in res["payload"]["facts"]


def test_detect_period(capsys):
    _, res = run_json(capsys, "detect-period", DATA / "advisor.tel", "--lhs", "Prof", "--rhs", "Happy")
    assert res["payload"]["periodic"]["future"] == {"start": 3, "period": 1, "residues": [0]}
    _, res = run_json(capsys, "detect-period", "--samples", "1,4,16,64", "--bound", "70")
    assert res["payload"]["periodic"] is None


@pytest.mark.parametrize("argv", [
    ["taqa", DATA / "advisor.tel", DATA / "advisor.abox", "--query", "Happy(alice,2028)", "-v"],
    ["to-grammar", DATA / "advisor.tel"],
    ["emit-datalog", DATA / "back_and_forth.tel"],
    ["saturate", DATA / "advisor.tel", DATA / "advisor.abox"],
])
def test_json_output_is_deterministic(capsys, argv):
    first = run(capsys, "--json", *argv)[1]
    second = run(capsys, "--json", *argv)[1]
    assert first == second


def test_errors_exit_nonzero(capsys, tmp_path):
    bad = tmp_path / "bad.tel"
    bad.write_text("A [= X^x B\n")
    code, res = run_json(capsys, "classify", bad)
    assert code == 1 and res["status"] == "error" and "line 1" in res["diagnostics"][0]
    code, res = run_json(capsys, "to-grammar", DATA / "back_and_forth.tel")
    assert code == 1 and "B [= X^-2 C" in res["diagnostics"][0]
    code, _, _ = run(capsys, "member", DATA / "powers_of_four.cg", "--nt", "Nope", "--word", "c")
    assert code == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "telx", "member", str(DATA / "powers_of_four.cg"), "--nt", "N1",
                          "--word", "c^64"], capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "Yes"
