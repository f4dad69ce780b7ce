import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from telx.corpus import (
    alice_tbox, back_and_forth_tbox, local_detour_tbox, one_or_four_grammar,
    powers_of_four_grammar, random_tbox, random_unary_grammar,
)
from telx.formats import parse_grammar, parse_tbox, serialize_tbox
from telx.grammar import all_language_lengths, enumerate_language, language_lengths, member_unary
from telx.model import (
    Conj, ExistsLeft, ExistsRight, NotFutureFragment, NotLinearFragment, Shift, TBox,
    classify_fragment, validate_normal_form,
)
from telx.saturation import SaturationConfig, ci_config, entails_ci, shift_sets
from telx.translations import (
    exists_shift, grammar_to_tbox, linear_tbox_to_cfg, rigidise, rigidise_linear,
    tbox_to_conjunctive_grammar,
)

seeds = st.integers(0, 2**32 - 1)


def generous(tbox: TBox, bound: int) -> SaturationConfig:
    c = ci_config(tbox, bound)
    return SaturationConfig(c.time_lo, c.time_hi, None)


def all_shift_sets(tbox: TBox, names, bound: int) -> dict:
    cfg = generous(tbox, bound)
    return {a: {b: s for b, s in shift_sets(tbox, a, bound, cfg).items() if b in names and s}
            for a in names}


# rigidise

def test_rigidise_keeps_rigid_tboxes():
    assert rigidise(alice_tbox()) == alice_tbox()


def test_rigidise_single_existential():
    t = rigidise(parse_tbox("local r\nA [= exists r . B"))
    assert set(t.inclusions) == {ExistsRight("A", "r_rig", "B_r"), Shift("B_r", 0, "B")}
    assert classify_fragment(t).rigid_only


def test_rigidise_local_detour():
    t = rigidise(local_detour_tbox())
    assert classify_fragment(t).rigid_only
    assert ExistsRight("B", "r_rig", "C_r") in t.inclusions
    assert Conj("E", "C_r", "E_r_ret") in t.inclusions
    assert ExistsLeft("r_rig", "E_r_ret", "F") in t.inclusions
    assert entails_ci(t, "B", 0, "F", generous(t, 0)) is not None
    assert entails_ci(local_detour_tbox(), "B", 0, "F", generous(t, 0)) is not None


@given(seeds)
def test_rigidise_preserves_shift_sets(seed):
    rng = random.Random(seed)
    t = random_tbox(rng, future=rng.random() < 0.5, linear=rng.random() < 0.5)
    names = set(t.concept_names)
    assert all_shift_sets(t, names, 10) == all_shift_sets(rigidise(t), names, 10)


# TBox to conjunctive grammar

def test_alice_grammar():
    g = tbox_to_conjunctive_grammar(alice_tbox())
    nt = g.nonterminal_for("Prof", "Happy")
    assert nt == "N_Prof_Happy"
    rules = [r for r in g.rules if r.lhs == nt]
    assert any(r.conjuncts == (("N_Prof_Prof",), ("N_Prof_Proud",)) for r in rules)
    assert member_unary(g, nt, 3)
    assert language_lengths(g, nt, 12) == set(range(3, 13))


def test_plain_subsumption_grammar():
    g = tbox_to_conjunctive_grammar(parse_tbox("A [= B"))
    nt = g.nonterminal_for("A", "B")
    assert member_unary(g, nt, 0) and not member_unary(g, nt, 1)


def test_past_shift_is_rejected():
    with pytest.raises(NotFutureFragment):
        tbox_to_conjunctive_grammar(back_and_forth_tbox())


def test_restricting_keys_preserves_languages():
    t = parse_tbox(serialize_tbox(alice_tbox()) + "Q [= X^2 R\nR & Q [= S\n")
    full = tbox_to_conjunctive_grammar(t)
    small = tbox_to_conjunctive_grammar(t, keys=[("Prof", "Happy")])
    assert len(small.rules) < len(full.rules)
    assert language_lengths(small, "N_Prof_Happy", 15) == language_lengths(full, "N_Prof_Happy", 15)


@settings(max_examples=40)
@given(seeds)
def test_grammar_matches_entailment_on_future_tboxes(seed):
    t = random_tbox(random.Random(seed), future=True)
    names = t.concept_names
    keys = [(a, b) for a in names for b in names]
    g = tbox_to_conjunctive_grammar(t, keys=keys)
    lengths = all_language_lengths(g, 10, [g.nonterminal_for(a, b) for a, b in keys])
    sets = all_shift_sets(t, set(names), 10)
    for a, b in keys:
        assert lengths[g.nonterminal_for(a, b)] == {n for n in sets[a].get(b, ()) if n >= 0}


# grammar to TBox

def test_one_or_four_tbox():
    res = grammar_to_tbox(one_or_four_grammar())
    t = res.tbox
    assert res.source_concept == "A"
    expected = {
        Conj("C_B1_B3", "C_B2_B2", "B1"), Shift("A", 1, "B1"), Shift("A", 2, "B2"), Shift("A", 3, "B3"),
        ExistsRight("B1", "r_B1_B3", "A"), Shift("B3", 0, "C_B3"), ExistsLeft("r_B1_B3", "C_B3", "C_B1_B3"),
        ExistsRight("B2", "r_B2_B2", "A"), Shift("B2", 0, "C_B2"), ExistsLeft("r_B2_B2", "C_B2", "C_B2_B2"),
    }
    assert set(t.inclusions) == expected
    assert classify_fragment(t).is_future and classify_fragment(t).rigid_only
    assert entails_ci(t, "A", 4, "B1", generous(t, 4)) is not None
    assert shift_sets(t, "A", 10, generous(t, 10))["B1"] == {1, 4}


def test_epsilon_grammar_tbox():
    res = grammar_to_tbox(parse_grammar("terminals: c\nS -> _"))
    assert res.tbox.inclusions == (Shift("A", 0, "S"),)
    assert shift_sets(res.tbox, "A", 5)["S"] == {0}


@settings(max_examples=40)
@given(seeds)
def test_tbox_matches_grammar(seed):
    g = random_unary_grammar(random.Random(seed))
    res = grammar_to_tbox(g)
    sets = shift_sets(res.tbox, res.source_concept, 10, generous(res.tbox, 10))
    lengths = all_language_lengths(g, 10)
    for nt in g.nonterminals:
        assert sets.get(res.concept_of[nt], set()) == lengths[nt]


@settings(max_examples=25)
@given(seeds)
def test_sequence_concepts_collect_sums(seed):
    g = random_unary_grammar(random.Random(seed))
    res = grammar_to_tbox(g)
    sets = shift_sets(res.tbox, res.source_concept, 10, generous(res.tbox, 10))
    single = {nt: sets.get(res.concept_of[nt], set()) for nt in res.canonical.nonterminals}
    for seq, c in res.helper_concepts.items():
        sums = {0}
        for nt in seq:
            sums = {x + y for x in sums for y in single[nt] if x + y <= 10}
        assert sets.get(c, set()) == sums, seq


@settings(max_examples=25)
@given(seeds)
def test_round_trip_through_tbox_and_back(seed):
    g = random_unary_grammar(random.Random(seed))
    res = grammar_to_tbox(g)
    keys = [(res.source_concept, res.concept_of[nt]) for nt in g.nonterminals]
    g2 = tbox_to_conjunctive_grammar(res.tbox, keys=keys)
    for nt in g.nonterminals:
        assert language_lengths(g2, g2.nonterminal_for(res.source_concept, nt), 12) == \
            language_lengths(g, nt, 12)


def test_powers_of_four_through_tbox():
    res = grammar_to_tbox(powers_of_four_grammar())
    t = res.tbox
    assert shift_sets(t, "A", 20, generous(t, 20))["N1"] == {1, 4, 16}


# linear fragment

def test_rigidise_linear_local_detour():
    t = local_detour_tbox()
    res = rigidise_linear(t)
    shifts = [i for i in t.inclusions if isinstance(i, Shift)]
    assert set(shifts) <= set(res.tbox.inclusions)
    assert Shift("B", 0, "F") in res.tbox.inclusions
    assert not res.exact
    assert classify_fragment(res.tbox).rigid_only
    for s in res.added:
        assert entails_ci(t, s.lhs, 0, s.rhs) is not None


def test_rigidise_linear_adds_two_step_subsumption():
    res = rigidise_linear(parse_tbox("local r\nA [= exists r . B\nexists r . B [= C"))
    assert Shift("A", 0, "C") in res.added
    assert all(isinstance(i, Shift) for i in res.tbox.inclusions)


def test_rigidise_linear_exact_on_rigid_only():
    t = back_and_forth_tbox()
    res = rigidise_linear(t)
    assert res.exact
    assert set(t.inclusions) <= set(res.tbox.inclusions)


def test_rigidise_linear_requires_linear():
    with pytest.raises(NotLinearFragment):
        rigidise_linear(alice_tbox())


def test_back_and_forth_cfg():
    g = linear_tbox_to_cfg(back_and_forth_tbox())
    assert exists_shift(g, ("A", "E"), 2) == "ddcccc"
    lang = enumerate_language(g, 12)["N_A_E"]
    for k in (0, 1, 3):
        assert exists_shift(g, ("A", "E"), k, max_len=12) is None
        assert not any(w.count("c") - w.count("d") == k for w in lang)
    assert any(w.count("c") - w.count("d") == 2 for w in lang)


def test_negative_shift_becomes_d_run():
    g = linear_tbox_to_cfg(parse_tbox("A [= X^-2 B"))
    nt = g.nonterminal_for("A", "B")
    assert any(r.lhs == nt and r.conjuncts == (("d", "d"),) for r in g.rules)
    assert exists_shift(g, nt, -2) == "dd"


def test_local_detour_cfg():
    g = linear_tbox_to_cfg(local_detour_tbox())
    w = exists_shift(g, ("A", "G"), 2)
    assert w is not None and w.count("c") - w.count("d") == 2


def test_exists_shift_empty_word():
    assert exists_shift(parse_grammar("terminals: c d\nN -> _"), "N", 0) == ""


@settings(max_examples=30)
@given(seeds)
def test_cfg_matches_entailment_on_rigid_linear_tboxes(seed):
    t = random_tbox(random.Random(seed), linear=True, rigid_only=True)
    names = t.concept_names
    g = linear_tbox_to_cfg(t)
    sets = all_shift_sets(t, set(names), 4)
    for a, b in product(names, names):
        for n in range(-4, 5):
            w = exists_shift(g, (a, b), n)
            entailed = n in sets[a].get(b, ()) or (a == b and n == 0)
            assert (w is not None) == entailed, (a, b, n, w)
            if w is not None:
                assert w.count("c") - w.count("d") == n


@given(seeds)
def test_translation_outputs_are_in_normal_form(seed):
    rng = random.Random(seed)
    t = random_tbox(rng)
    assert validate_normal_form(rigidise(t)) == []
    lt = random_tbox(rng, linear=True)
    assert validate_normal_form(rigidise_linear(lt).tbox) == []
    assert validate_normal_form(grammar_to_tbox(random_unary_grammar(rng)).tbox) == []
