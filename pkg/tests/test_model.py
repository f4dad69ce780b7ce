import random

import pytest
from hypothesis import given, strategies as st

from telx.corpus import alice_tbox, back_and_forth_tbox, random_abox, random_tbox
from telx.formats import (
    ParseError, parse_abox, parse_tbox, serialize_abox, serialize_tbox,
)
from telx.model import (
    ABox, ConceptFact, Conj, ExistsLeft, ExistsRight, Individual, KnowledgeBase, Null,
    RoleFact, Shift, TBox, classify_fragment, validate_normal_form,
)

seeds = st.integers(0, 2**32 - 1)


def test_alice_is_valid_and_classified():
    t = alice_tbox()
    assert len(t.inclusions) == 5
    assert t.is_rigid("advisorOf")
    assert validate_normal_form(t) == []
    f = classify_fragment(t)
    assert (f.is_future, f.is_linear, f.rigid_only) == (True, False, True)


def test_back_and_forth_fragment():
    f = classify_fragment(back_and_forth_tbox())
    assert (f.is_future, f.is_linear, f.rigid_only) == (False, True, True)


def test_empty_tbox():
    t = TBox.of([])
    assert validate_normal_form(t) == []
    f = classify_fragment(t)
    assert (f.is_future, f.is_linear, f.rigid_only) == (True, True, True)


def test_undeclared_role_is_reported():
    t = TBox((ExistsLeft("r", "A", "B"),), {})
    vs = validate_normal_form(t)
    assert len(vs) == 1 and "r" in vs[0].message


def test_size_counts_shifts_in_unary():
    t = TBox.of([Shift("A", -3, "B"), Conj("A", "B", "C")])
    assert t.total_shift() == 3
    assert t.size() > TBox.of([Shift("A", 0, "B"), Conj("A", "B", "C")]).size()


@pytest.mark.parametrize("line,expected", [
    ("Prof [= X^3 Happy", Shift("Prof", 3, "Happy")),
    ("Prof & Proud [= Happy", Conj("Prof", "Proud", "Happy")),
    ("Prof [= X^-1 Prof", Shift("Prof", -1, "Prof")),
    ("A [= B", Shift("A", 0, "B")),
    ("exists r . A [= B", ExistsLeft("r", "A", "B")),
    ("A [= exists r . B", ExistsRight("A", "r", "B")),
])
def test_parse_single_inclusions(line, expected):
    assert parse_tbox(line).inclusions == (expected,)


@pytest.mark.parametrize("text,fragment", [
    ("A [= X^x B", "non-integer"),
    ("A => B", "operator"),
    ("A [= exists r . B\nrigid r", "after first use"),
    ("A [= X^1", "malformed"),
])
def test_parse_errors_carry_location(text, fragment):
    with pytest.raises(ParseError) as e:
        parse_tbox(text)
    assert e.value.line >= 1 and e.value.column >= 1
    assert fragment in str(e.value)


def test_rigidity_defaults_to_local():
    t = parse_tbox("A [= exists r . B")
    assert t.roles == {"r": False}


@given(seeds)
def test_tbox_round_trip(seed):
    rng = random.Random(seed)
    t = random_tbox(rng, future=rng.random() < 0.5, linear=rng.random() < 0.5)
    assert parse_tbox(serialize_tbox(t)) == t


@given(seeds)
def test_abox_round_trip(seed):
    rng = random.Random(seed)
    t = random_tbox(rng)
    a = random_abox(rng, t, times=(-5, 5))
    assert parse_abox(serialize_abox(a)) == a


@given(seeds, st.data())
def test_fragment_flags_monotone_under_removal(seed, data):
    t = random_tbox(random.Random(seed))
    keep = data.draw(st.lists(st.booleans(), min_size=len(t.inclusions), max_size=len(t.inclusions)))
    smaller = t.with_inclusions([i for i, k in zip(t.inclusions, keep) if k])
    before, after = classify_fragment(t), classify_fragment(smaller)
    for flag in ("is_future", "is_linear", "rigid_only"):
        assert not getattr(before, flag) or getattr(after, flag)


def test_abox_rejects_nulls():
    with pytest.raises(ValueError):
        ABox((ConceptFact("A", Null(0), 0),))


def test_rigidity_conflict_between_components():
    t = parse_tbox("rigid r\nA [= exists r . B")
    a = ABox((RoleFact("r", Individual("a"), Individual("b"), 0),), {"r": False})
    with pytest.raises(ValueError):
        KnowledgeBase(t, a)
