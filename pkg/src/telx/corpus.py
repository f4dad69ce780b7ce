"""Named example knowledge bases and grammars, plus seeded random generators for tests."""

from __future__ import annotations

import random

from .formats import parse_abox, parse_grammar, parse_tbox
from .grammar import Grammar, Rule
from .model import (
    ABox, ConceptFact, Conj, ExistsLeft, ExistsRight, Individual, Inclusion,
    RoleFact, Shift, TBox,
)
from .semilinear import LinearSet, SemilinearSet

ALICE_TBOX = """\
rigid advisorOf
Prof [= X^1 Prof
Prof [= exists advisorOf . PhD
PhD [= X^3 Graduate
exists advisorOf . Graduate [= Proud
Prof & Proud [= Happy
"""

ALICE_ABOX = "Prof(Alice, 2025)\n"

ANBNCN_GRAMMAR = """\
terminals: a b c
start: S
S -> A B & D C
A -> a A | _
B -> b B c | _
C -> c C | _
D -> a D b | _
"""

POWERS_OF_FOUR_GRAMMAR = """\
terminals: c
start: N1
N1 -> N1 N3 & N2 N2 | c
N2 -> N1 N1 & N2 N6 | c^2
N3 -> N1 N2 & N6 N6 | c^3
N6 -> N1 N2 & N3 N3
"""

ONE_OR_FOUR_GRAMMAR = """\
terminals: c
start: B1
B1 -> B1 B3 & B2 B2 | c
B2 -> c^2
B3 -> c^3
"""

# a rigid-role detour through the past: A [= X^2 E
BACK_AND_FORTH_TBOX = """\
rigid r
A [= exists r . B
B [= X^-2 C
C [= X^4 D
exists r . D [= E
"""

# the local role makes B [= F hold only because the detour returns at the same time
LOCAL_DETOUR_TBOX = """\
local r
A [= X^1 B
F [= X^1 G
C [= X^-3 D
D [= X^3 E
B [= exists r . C
exists r . E [= F
"""


def alice_tbox() -> TBox:
    return parse_tbox(ALICE_TBOX)


def alice_abox() -> ABox:
    return parse_abox(ALICE_ABOX)


def anbncn_grammar() -> Grammar:
    return parse_grammar(ANBNCN_GRAMMAR)


def powers_of_four_grammar() -> Grammar:
    return parse_grammar(POWERS_OF_FOUR_GRAMMAR)


def one_or_four_grammar() -> Grammar:
    return parse_grammar(ONE_OR_FOUR_GRAMMAR)


def back_and_forth_tbox() -> TBox:
    return parse_tbox(BACK_AND_FORTH_TBOX)


def local_detour_tbox() -> TBox:
    return parse_tbox(LOCAL_DETOUR_TBOX)


def random_tbox(rng: random.Random, *, future: bool = False, linear: bool = False,
                rigid_only: bool = False, max_concepts: int = 6, max_roles: int = 3,
                max_inclusions: int = 8, max_shift: int = 3) -> TBox:
    concepts = [f"A{i}" for i in range(rng.randint(2, max_concepts))]
    roles = {f"r{i}": rigid_only or rng.random() < 0.5 for i in range(rng.randint(1, max_roles))}
    lo = 0 if future else -max_shift
    kinds = ["shift", "shift", "er", "el"] + ([] if linear else ["conj"])
    incs: list[Inclusion] = []
    for _ in range(rng.randint(1, max_inclusions)):
        kind = rng.choice(kinds)
        c = rng.choice
        if kind == "shift":
            incs.append(Shift(c(concepts), rng.randint(lo, max_shift), c(concepts)))
        elif kind == "conj":
            incs.append(Conj(c(concepts), c(concepts), c(concepts)))
        elif kind == "er":
            incs.append(ExistsRight(c(concepts), c(list(roles)), c(concepts)))
        else:
            incs.append(ExistsLeft(c(list(roles)), c(concepts), c(concepts)))
    used = {getattr(i, "role", None) for i in incs}
    return TBox.of(incs, rigid=[r for r, v in roles.items() if v and r in used],
                   local=[r for r, v in roles.items() if not v and r in used],
                   concepts=concepts)


def random_abox(rng: random.Random, tbox: TBox, *, max_individuals: int = 3,
                max_facts: int = 5, times: tuple[int, int] = (0, 3)) -> ABox:
    inds = [Individual(f"i{k}") for k in range(rng.randint(1, max_individuals))]
    concepts = sorted(tbox.concept_names)
    roles = sorted(tbox.roles)
    facts = []
    for _ in range(rng.randint(1, max_facts)):
        t = rng.randint(*times)
        if roles and rng.random() < 0.35:
            facts.append(RoleFact(rng.choice(roles), rng.choice(inds), rng.choice(inds), t))
        else:
            facts.append(ConceptFact(rng.choice(concepts), rng.choice(inds), t))
    return ABox(tuple(facts), dict(tbox.roles))


def random_unary_grammar(rng: random.Random, *, max_nonterminals: int = 4,
                         max_rules: int = 7, max_run: int = 3) -> Grammar:
    nts = [f"N{i}" for i in range(1, rng.randint(1, max_nonterminals) + 1)]

    def conjunct() -> tuple[str, ...]:
        roll = rng.random()
        if roll < 0.3:
            return ("c",) * rng.randint(1, max_run)
        if roll < 0.4:
            return ()
        if roll < 0.55:
            return (rng.choice(nts),)
        return tuple(rng.choice(nts) for _ in range(2))

    rules = []
    for _ in range(rng.randint(1, max_rules)):
        n = 2 if rng.random() < 0.3 else 1
        rules.append(Rule(rng.choice(nts), tuple(conjunct() for _ in range(n))))
    # every nonterminal gets at least one base case so languages are rarely empty
    for nt in nts:
        if rng.random() < 0.7:
            rules.append(Rule(nt, (("c",) * rng.randint(1, max_run),)))
    return Grammar(tuple(nts), ("c",), tuple(rules), nts[0])


def random_semilinear(rng: random.Random, *, span: int = 10, max_components: int = 3,
                      max_periods: int = 3) -> SemilinearSet:
    comps = []
    for _ in range(rng.randint(1, max_components)):
        periods = tuple(rng.randint(-span, span) for _ in range(rng.randint(0, max_periods)))
        comps.append(LinearSet(rng.randint(-span, span), periods))
    return SemilinearSet(tuple(comps))
