import random
from math import lcm

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_members, min_size_representation
from telx.corpus import alice_tbox, powers_of_four_grammar, random_semilinear
from telx.saturation import SaturationConfig, ci_config, shift_set
from telx.semilinear import (
    LinearSet, SemilinearSet, Tail, decompose, detect_periodicity, from_eventually_periodic,
    member, semilinear_size, to_eventually_periodic,
)
from telx.translations import grammar_to_tbox

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("s,n,expected", [
    (SemilinearSet.of((2, [3])), 8, True),
    (SemilinearSet.of((2, [3])), 7, False),
    (SemilinearSet.of((0, [4, -6])), 2, True),
    (SemilinearSet.of((0, [4, -6])), 3, False),
    (SemilinearSet.of((0, [4, -6])), -100, True),
    (SemilinearSet.of(5), 5, True),
    (SemilinearSet(), 0, False),
])
def test_member_examples(s, n, expected):
    assert member(s, n) is expected


def test_simple_set_decomposition():
    pieces = decompose(SemilinearSet.of((1, [3, 5])))
    kinds = {p.kind for p in pieces}
    assert kinds == {"point", "forward"}
    assert [p for p in pieces if p.kind == "forward"][0].start == 1 + 8


def test_eventually_periodic_examples():
    ep = to_eventually_periodic(SemilinearSet.of((2, [3])))
    assert ep.future == Tail(2, 3, frozenset({2})) and ep.past is None
    assert ep.core == {2}
    ep = to_eventually_periodic(SemilinearSet.of(5))
    assert ep.core == {5} and ep.future is None and ep.past is None
    s = SemilinearSet.of((3, [1]), (-2, [-2]))
    ep = to_eventually_periodic(s)
    assert (ep.future.start, ep.future.period) == (3, 1)
    assert (ep.past.start, ep.past.period) == (2, 2)
    for n in range(-100, 101):
        assert ep.contains(n) == member(s, n)


@settings(max_examples=100)
@given(seeds)
def test_member_matches_brute_force(seed):
    s = random_semilinear(random.Random(seed))
    # offsets up to 10 with unit periods need 110 steps to reach |n| = 100
    ref = brute_members(s, k_max=220)
    for n in range(-100, 101):
        assert member(s, n) == (n in ref), n


@settings(max_examples=100)
@given(seeds)
def test_eventually_periodic_preserves_membership(seed):
    s = random_semilinear(random.Random(seed))
    ep = to_eventually_periodic(s)
    back = from_eventually_periodic(ep)
    for n in range(-200, 201):
        assert ep.contains(n) == member(s, n) == member(back, n), n


def test_detect_alice():
    samples = shift_set(alice_tbox(), "Prof", "Happy", 20)
    ep = detect_periodicity(samples, 20)
    assert ep.future == Tail(3, 1, frozenset({0}))


def test_detect_powers_of_four_fails():
    t = grammar_to_tbox(powers_of_four_grammar()).tbox
    c = ci_config(t, 70)
    samples = shift_set(t, "A", "N1", 70, SaturationConfig(c.time_lo, c.time_hi, None))
    assert samples == {1, 4, 16, 64}
    assert detect_periodicity(samples, 70) is None


def test_detect_single_point():
    ep = detect_periodicity({0}, 10)
    assert ep.core == {0} and ep.future is None and ep.past is None


@given(seeds, st.integers(20, 60))
def test_detection_recovers_sampled_sets(seed, bound):
    s = random_semilinear(random.Random(seed), span=5)
    samples = {n for n in range(-bound, bound + 1) if member(s, n)}
    ep = detect_periodicity(samples, bound)
    if ep is not None:
        for n in range(-bound, bound + 1):
            assert ep.contains(n) == (n in samples)


def test_size_metric():
    assert LinearSet(-2, (3, -4)).size() == 9
    assert semilinear_size(SemilinearSet.of((2, [3]), 5)) == 10


def test_detected_sizes_are_minimal_on_toy_sets():
    rng = random.Random(4)
    for _ in range(60):
        comps = []
        for _ in range(rng.randint(1, 2)):
            p = rng.randint(0, 10)
            comps.append(LinearSet(rng.randint(0, 10), (p,) if p else ()))
        s = SemilinearSet(tuple(comps))
        period = lcm(*(c.periods[0] for c in comps if c.periods)) if any(c.periods for c in comps) else 1
        bound = max(60, 2 * (period + 10) + 10)
        samples = {n for n in range(-bound, bound + 1) if member(s, n)}
        ep = detect_periodicity(samples, bound)
        assert ep is not None
        ours = from_eventually_periodic(ep)
        assert ours.size() <= min_size_representation(samples, -bound, bound), (s, ours)
