"""Temporal atomic queries over future TBoxes, answered through a unary grammar.

The ABox is folded into the TBox: each individual ``a`` gets a marker
``C_a`` holding at the earliest ABox time ``l``, concepts are copied per
timestamp ``A_k`` (``k`` clamped to ``m + 1`` beyond the last ABox time
``m``), and ABox edges become rigid roles ``r_a_b`` between markers. Then
``A(a, n)`` is entailed iff ``c^(n - l)`` is in the language of
``N_{C_a, A_n}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from .grammar import Grammar, member_unary
from .model import (
    ABox, ConceptFact, Conj, ExistsLeft, ExistsRight, Individual, KnowledgeBase,
    RoleFact, Shift, TBox, fresh_name, require_future,
)
from .saturation import DerivationTrace, SaturationConfig, default_config, entails_fact
from .translations import tbox_to_conjunctive_grammar


class EmptyABox(ValueError):
    pass


@dataclass(frozen=True)
class TaqaQuery:
    concept: str
    individual: Individual
    time: int

    def as_fact(self) -> ConceptFact:
        return ConceptFact(self.concept, self.individual, self.time)


@dataclass(frozen=True)
class IndexedTBox:
    tprime: TBox
    tabox: TBox
    l: int
    m: int
    concept_index: Mapping[tuple[str, int], str]
    anchor_concepts: Mapping[Individual, str]
    anchor_roles: Mapping[tuple[str, Individual, Individual], str]

    def concept_at(self, concept: str, k: int) -> str | None:
        return self.concept_index.get((concept, min(k, self.m + 1)))

    def combined(self) -> TBox:
        roles = dict(self.tprime.roles)
        roles.update(self.tabox.roles)
        return TBox(self.tprime.inclusions + self.tabox.inclusions, roles,
                    self.tprime.extra_concepts | self.tabox.extra_concepts)


def _index_name(concept: str, k: int) -> str:
    return f"{concept}_{k}" if k >= 0 else f"{concept}_m{-k}"


@lru_cache(maxsize=32)
def build_query_tbox(tbox: TBox, abox: ABox) -> IndexedTBox:
    require_future(tbox)
    if not abox.facts:
        raise EmptyABox("the ABox has no facts")
    kb = KnowledgeBase(tbox, abox)
    l, m = min(abox.times), max(abox.times)
    taken = set(tbox.concept_names) | set(tbox.roles) | set(abox.roles)
    concepts = list(tbox.concept_names)
    for f in abox.facts:
        if isinstance(f, ConceptFact) and f.concept not in concepts:
            concepts.append(f.concept)
    for f in abox.facts:
        if isinstance(f, RoleFact):
            taken.add(f.role)
    ks = range(l, m + 2)
    index = {}
    for a in concepts:
        for k in ks:
            index[(a, k)] = fresh_name(_index_name(a, k), taken)

    def at(a: str, k: int) -> str:
        return index[(a, min(k, m + 1))]

    prime = []
    for k in ks:
        for inc in tbox.inclusions:
            if isinstance(inc, Shift):
                prime.append(Shift(at(inc.lhs, k), inc.delta, at(inc.rhs, k + inc.delta)))
            elif isinstance(inc, Conj):
                prime.append(Conj(at(inc.lhs1, k), at(inc.lhs2, k), at(inc.rhs, k)))
            elif isinstance(inc, ExistsRight):
                prime.append(ExistsRight(at(inc.lhs, k), inc.role, at(inc.filler, k)))
            else:
                prime.append(ExistsLeft(inc.role, at(inc.filler, k), at(inc.rhs, k)))
    tprime = TBox(tuple(prime), dict(tbox.roles), frozenset(index.values()))

    anchors = {a: fresh_name(f"C_{a.name}", taken) for a in abox.individuals}
    anchor_roles: dict[tuple[str, Individual, Individual], str] = {}
    tab = []
    returns = [i for i in tbox.inclusions if isinstance(i, ExistsLeft)]
    for f in abox.facts:
        if isinstance(f, ConceptFact):
            tab.append(Shift(anchors[f.subject], f.time - l, at(f.concept, f.time)))
            continue
        key = (f.role, f.subject, f.object)
        if key not in anchor_roles:
            anchor_roles[key] = fresh_name(f"{f.role}_{f.subject.name}_{f.object.name}", taken)
        rab = anchor_roles[key]
        tab.append(ExistsRight(anchors[f.subject], rab, anchors[f.object]))
        rigid = kb.is_rigid(f.role)
        for inc in returns:
            if inc.role != f.role:
                continue
            for k in (ks if rigid else (f.time,)):
                tab.append(ExistsLeft(rab, at(inc.filler, k), at(inc.rhs, k)))
    tabox = TBox(tuple(tab), {r: True for r in anchor_roles.values()}, frozenset(anchors.values()))
    return IndexedTBox(tprime, tabox, l, m, index, anchors, anchor_roles)


@lru_cache(maxsize=32)
def _query_grammar(tbox: TBox, abox: ABox, key: tuple[str, str]) -> Grammar:
    return tbox_to_conjunctive_grammar(build_query_tbox(tbox, abox).combined(), keys=[key])


@dataclass(frozen=True)
class TaqaReduction:
    """What the grammar route tested: nonterminal and word length (None if decided early)."""

    answer: bool
    nonterminal: str | None
    length: int | None
    reason: str


def taqa_reduction(tbox: TBox, abox: ABox, q: TaqaQuery) -> TaqaReduction:
    require_future(tbox)
    if not abox.facts:
        return TaqaReduction(False, None, None, "empty ABox")
    if q.individual not in abox.individuals:
        return TaqaReduction(False, None, None, "individual does not occur in the ABox")
    ix = build_query_tbox(tbox, abox)
    if q.time < ix.l:
        return TaqaReduction(False, None, None, "query time precedes every ABox timestamp")
    target = ix.concept_at(q.concept, q.time)
    if target is None:
        return TaqaReduction(False, None, None, "concept occurs in neither TBox nor ABox")
    key = (ix.anchor_concepts[q.individual], target)
    g = _query_grammar(tbox, abox, key)
    nt = g.nonterminal_for(*key)
    n = q.time - ix.l
    return TaqaReduction(member_unary(g, nt, n), nt, n, "grammar membership")


def answer_taqa_grammar(tbox: TBox, abox: ABox, q: TaqaQuery) -> bool:
    """Complete answer for future TBoxes."""
    return taqa_reduction(tbox, abox, q).answer


def taqa_config(kb: KnowledgeBase, q: TaqaQuery) -> SaturationConfig:
    """Default window stretched to cover the query time, with unbounded null chains."""
    base = default_config(kb)
    return SaturationConfig(min(base.time_lo, q.time), max(base.time_hi, q.time), None)


def answer_taqa_saturation(kb: KnowledgeBase, q: TaqaQuery,
                           cfg: SaturationConfig | None = None) -> DerivationTrace | None:
    """A derivation of the query fact, or None when unknown within ``cfg``."""
    if cfg is None:
        cfg = taqa_config(kb, q)
    return entails_fact(kb, q.as_fact(), cfg)
