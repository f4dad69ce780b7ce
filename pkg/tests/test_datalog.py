import random

import pytest
from hypothesis import given, settings, strategies as st

from telx.corpus import alice_tbox, back_and_forth_tbox, local_detour_tbox, random_abox, random_tbox
from telx.datalog import (
    ConceptAtom, DatalogProgram, DatalogRule, RoleJoin, emit_datalog, eval_datalog_bounded,
    fitted_shift_sets, parse_program, serialize_program,
)
from telx.formats import parse_abox, parse_tbox
from telx.model import ABox, ConceptFact, Individual, KnowledgeBase, NotLinearFragment, TBox
from telx.saturation import SaturationConfig, saturate, shift_set
from telx.semilinear import SemilinearSet

seeds = st.integers(0, 2**32 - 1)
a = Individual("a")


def test_periodic_rules():
    p = emit_datalog(TBox.of([]), {("A", "B"): SemilinearSet.of((2, [3]))})
    assert [str(r) for r in p.rules] == [
        "F1_A_B(x) <- X^-2 A(x)", "F1_A_B(x) <- X^-3 F1_A_B(x)", "B(x) <- F1_A_B(x)"]


def test_rigid_role_rules():
    p = emit_datalog(parse_tbox("rigid r\nexists r . A [= B"), {})
    assert set(p.rules) == {DatalogRule("B", RoleJoin("r", "A", m)) for m in (None, "DIA", "DIA-")}
    p = emit_datalog(parse_tbox("local r\nexists r . A [= B"), {})
    assert p.rules == (DatalogRule("B", RoleJoin("r", "A")),)


def test_empty_program():
    p = emit_datalog(TBox.of([]), {})
    assert p.rules == ()
    abox = parse_abox("A(a, 0)\nr(a, b, 1)")
    assert eval_datalog_bounded(p, abox, (-5, 5)) == set(abox.facts)


def test_requires_linear():
    with pytest.raises(NotLinearFragment):
        emit_datalog(alice_tbox(), {})


def test_text_round_trip():
    p = emit_datalog(back_and_forth_tbox(), fitted_shift_sets(back_and_forth_tbox(), 10).shifts)
    text = serialize_program(p)
    assert "E(x) <- DIA r(x,y), D(y)" in text
    assert parse_program(text) == p
    with pytest.raises(ValueError):
        parse_program("B(x) <- A(x) & C(x)")


def test_local_detour_program():
    t = local_detour_tbox()
    p = emit_datalog(t, fitted_shift_sets(t, 10).shifts)
    facts = eval_datalog_bounded(p, ABox((ConceptFact("A", a, 0),)), (-5, 5))
    assert ConceptFact("G", a, 2) in facts


def test_alice_pair_program():
    p = emit_datalog(TBox.of([]), {("Prof", "Happy"): SemilinearSet.of((3, [1]))})
    facts = eval_datalog_bounded(p, parse_abox("Prof(a, 0)"), (0, 10))
    assert {f.time for f in facts if f.concept == "Happy"} == set(range(3, 11))
    assert {f.time for f in facts if f.concept == "Happy"} == shift_set(alice_tbox(), "Prof", "Happy", 10)


def test_eventually_needs_a_later_or_earlier_edge():
    p = parse_program("B(x) <- DIA r(x,y), A(y)\nC(x) <- DIA- r(x,y), A(y)")
    abox = parse_abox("r(a, b, 3)\nA(b, 1)\nA(b, 5)")
    facts = eval_datalog_bounded(p, abox, (0, 9))
    assert ConceptFact("B", a, 1) in facts and ConceptFact("B", a, 5) not in facts
    assert ConceptFact("C", a, 5) in facts and ConceptFact("C", a, 1) not in facts


@settings(max_examples=30)
@given(seeds)
def test_program_matches_saturation(seed):
    rng = random.Random(seed)
    t = random_tbox(rng, linear=True)
    fit = fitted_shift_sets(t, 10)
    abox = random_abox(rng, t, times=(-3, 3))
    pad = 30 + t.total_shift()
    sat = saturate(KnowledgeBase(t, abox), SaturationConfig(-15 - pad, 15 + pad, None))
    ours = eval_datalog_bounded(emit_datalog(t, fit.shifts), abox, (-15 - pad, 15 + pad))
    want = {f for f in sat.concept_facts() if -15 <= f.time <= 15}
    got = {f for f in ours if isinstance(f, ConceptFact) and -15 <= f.time <= 15}
    if not fit.unfitted:
        assert got == want
