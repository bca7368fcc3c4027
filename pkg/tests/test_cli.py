"""End-to-end command-line runs against the fixture corpus."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from helpers import bag_sig, bag_system
from qitbench.cli import main
from qitbench.serialize import signature_from_obj, system_from_obj

FIXTURES = Path(__file__).parent.parent / "fixtures"

BAG = str(FIXTURES / "bag.qit")
BAGPRIME = str(FIXTURES / "bagprime.qit")
COMMVEC = str(FIXTURES / "commvec.qit")
INFTREE = str(FIXTURES / "inftree.qit")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# --- check ---


def test_check_accepts_bag_with_derivation(capsys):
    code, out, _ = run(capsys, "check", BAG)
    assert code == 0
    assert "Bag: ACCEPT" in out
    assert "ElCon" in out and "Target" in out
    assert "EqCon" in out


def test_check_rejects_conditional_equation(capsys):
    code, out, _ = run(capsys, "check", BAGPRIME)
    assert code == 1
    assert "ConditionalEquation" in out


def test_check_structured_reports_span_and_subterm(capsys):
    code, out, _ = run(capsys, "check", str(FIXTURES / "qleft.qit"), "--format", "structured")
    assert code == 1
    obj = json.loads(out)
    bad = next(c for c in obj["constructors"] if c["status"] == "REJECT")
    assert bad["rule"] == "StrictlyPositiveFunction"
    assert bad["line"] >= 2 and bad["col"] >= 1
    assert "(Q -> Nat) -> X" in bad["message"]


def test_check_parse_error_is_positioned(tmp_path, capsys):
    p = tmp_path / "broken.qit"
    p.write_text("qit Foo (X : Set where\n  mk : Foo\n")
    code, _, err = run(capsys, "check", str(p))
    assert code == 1
    assert "broken.qit:1:" in err


# --- eq ---


def test_eq_commuted_spines_are_equal(capsys):
    code, out, _ = run(
        capsys, "eq", BAG,
        "(op cons a (op cons b (op nil)))",
        "(op cons b (op cons a (op nil)))",
        "--X", "a,b",
    )
    assert code == 0
    assert out.strip() == "EQUAL"


def test_eq_distinct_multisets(capsys):
    code, out, _ = run(
        capsys, "eq", BAG,
        "(op cons a (op nil))",
        "(op cons b (op nil))",
        "--X", "a,b",
    )
    assert code == 1
    assert out.strip() == "DISTINCT"


def test_eq_outside_universe_is_unknown(capsys):
    deep = "(op cons a (op cons a (op cons a (op cons a (op nil)))))"
    code, out, _ = run(capsys, "eq", BAG, deep, "(op nil)", "--X", "a,b")
    assert code == 1
    assert out.strip() == "UNKNOWN"


# --- elaborate / enum ---


def test_elaborate_structured_round_trips(capsys):
    code, out, _ = run(capsys, "elaborate", BAG, "--X", "a,b", "--format", "structured")
    assert code == 0
    obj = json.loads(out)
    assert signature_from_obj(obj["signature"]) == bag_sig()
    assert system_from_obj(obj["system"]) == bag_system()


def test_elaborate_is_byte_deterministic(capsys):
    _, first, _ = run(capsys, "elaborate", COMMVEC, "--X", "a,b", "--format", "structured")
    _, second, _ = run(capsys, "elaborate", COMMVEC, "--X", "a,b", "--format", "structured")
    assert first == second


def test_enum_lists_the_depth_bounded_universe(capsys):
    code, out, _ = run(capsys, "enum", BAG, "--X", "a,b")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 7
    assert lines[0] == "(op nil)"


# --- fold / elim ---


def test_fold_length_algebra(capsys):
    code, out, _ = run(
        capsys, "fold", BAG, "--X", "a,b",
        "--algebra", str(FIXTURES / "bag_length.json"),
    )
    assert code == 0
    assert "(op cons a (op cons b (op nil))) -> 2" in out
    assert "hom: ok" in out


def test_fold_rejects_unsatisfying_algebra(tmp_path, capsys):
    alg = {
        "carrier": ["*", "a", "b"],
        "ops": {
            "nil": [[[], "*"]],
            "cons a": [[["*"], "a"], [["a"], "a"], [["b"], "a"]],
            "cons b": [[["*"], "b"], [["a"], "b"], [["b"], "b"]],
        },
    }
    p = tmp_path / "head.json"
    p.write_text(json.dumps(alg))
    code, out, _ = run(capsys, "fold", BAG, "--X", "a,b", "--algebra", str(p))
    assert code == 1
    assert "VIOLATED" in out


def test_elim_parity_is_coherent(capsys):
    code, out, _ = run(capsys, "elim", BAG, "--X", "a,b")
    assert code == 0
    assert "(op nil) -> even" in out
    assert "(op cons a (op nil)) -> odd" in out
    assert "qwcomp: ok (4 instances, 8 environments)" in out


def test_elim_steps_file_matches_builtin(capsys):
    _, builtin, _ = run(capsys, "elim", BAG, "--X", "a,b")
    code, filed, _ = run(
        capsys, "elim", BAG, "--X", "a,b",
        "--steps", str(FIXTURES / "bag_parity_steps.json"),
    )
    assert code == 0
    assert filed == builtin


# --- construct ---


def test_construct_dumps_stages_and_certifies(capsys):
    code, out, _ = run(capsys, "construct", BAG, "--X", "a,b", "--compare-oracle")
    assert code == 0
    assert "stage (sz zero): 0" in out
    assert "colimit: 6 classes" in out
    assert "oracle: bijection over 6 classes" in out


def test_construct_structured_export_is_stable(capsys):
    _, first, _ = run(capsys, "construct", BAG, "--X", "a,b", "--format", "structured")
    _, second, _ = run(capsys, "construct", BAG, "--X", "a,b", "--format", "structured")
    assert first == second
    assert first.startswith("depth 3 height 3")


# --- examples ---


def test_examples_lists_all_six(capsys):
    code, out, _ = run(capsys, "examples")
    assert code == 0
    for name in ("bag", "commvec", "inftree", "wsusp", "wred", "blass"):
        assert name in out


def test_examples_prints_table_bytes(capsys):
    code, out, _ = run(capsys, "examples", "blass")
    assert code == 0
    assert out == (FIXTURES / "tables" / "blass.txt").read_text()


def test_examples_structured_carries_sources(capsys):
    code, out, _ = run(capsys, "examples", "--format", "structured")
    assert code == 0
    obj = json.loads(out)
    by_name = {e["name"]: e for e in obj["examples"]}
    assert by_name["bag"]["source"].startswith("--")
    assert by_name["wred"]["source"] is None
    assert by_name["wred"]["table"][0] == "I = Z"


# --- usage errors ---


def test_missing_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["check"])
    assert e.value.code == 2
    capsys.readouterr()


def test_negative_depth_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["enum", BAG, "-d", "-1"])
    assert e.value.code == 2
    capsys.readouterr()


def test_bad_samples_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["fold", BAG, "--algebra", str(FIXTURES / "bag_length.json"), "--samples", "0"])
    assert e.value.code == 2
    capsys.readouterr()


def test_unknown_carrier_flag_exits_2(capsys):
    code, _, err = run(capsys, "eq", BAG, "(op nil)", "(op nil)", "--Y", "a,b")
    assert code == 2
    assert "no SET parameter" in err


def test_missing_carrier_is_reported(capsys):
    code, _, err = run(capsys, "enum", BAG)
    assert code == 1
    assert "X" in err
