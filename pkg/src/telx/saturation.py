"""Bounded forward-chaining saturation with the five derivation rules.

Rules, for a term ``a`` and time ``n``::

    RIGID   r(a,b,n)                        |- r(a,b,k)   (r rigid, any k)
    SHIFT   A(a,n), A [= X^k B              |- B(a,n+k)
    CONJ    A(a,n), A'(a,n), A & A' [= B    |- B(a,n)
    RETURN  r(a,b,n), A(b,n), exists r.A [= B  |- B(a,n)
    EXISTS  A(a,n), A [= exists r.B         |- r(a,b,n), B(b,n)  (b fresh)

Facts are kept as integer bitmasks over the time window, one mask per
(term, concept). Anonymous elements are shared: every null introduced with
filler B at time t (and, when chains are bounded, the same remaining depth)
derives exactly the same facts, because nothing flows from a parent into a
null. One node per such key keeps saturation polynomial. Literal traces,
with one fresh null per (subject, inclusion, time), are unfolded on demand
from the reasons recorded when each fact was first derived.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union

from .model import (
    ABox, ConceptFact, Conj, ExistsLeft, ExistsRight, Fact, Inclusion,
    Individual, KnowledgeBase, Null, RoleFact, Shift, TBox, Term,
)


@dataclass(frozen=True)
class SaturationConfig:
    time_lo: int
    time_hi: int
    max_chain_depth: int | None = None
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.time_lo > self.time_hi:
            raise ValueError("time_lo must not exceed time_hi")
        if self.max_chain_depth is not None and self.max_chain_depth < 0:
            raise ValueError("max_chain_depth must be nonnegative")
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")


def default_config(kb: KnowledgeBase, queried_shift: int = 0) -> SaturationConfig:
    """Window padded by the total shift on both sides, depth = #ExistsRight + 1."""
    times = kb.abox.times or (0,)
    s = kb.tbox.total_shift()
    depth = sum(isinstance(i, ExistsRight) for i in kb.tbox.inclusions) + 1
    return SaturationConfig(min(times) - s + min(0, queried_shift),
                            max(times) + s + max(0, queried_shift), depth)


class RuleId(str, Enum):
    RIGID = "RIGID"
    SHIFT = "SHIFT"
    CONJ = "CONJ"
    RETURN = "RETURN"
    EXISTS = "EXISTS"


Formula = Union[Fact, Inclusion]


@dataclass(frozen=True)
class RuleApplication:
    rule_id: RuleId
    premises: tuple[Formula, ...]
    conclusions: tuple[Fact, ...]

    def __str__(self) -> str:
        prem = ", ".join(str(p) for p in self.premises)
        conc = ", ".join(str(c) for c in self.conclusions)
        return f"[{self.rule_id.value}] {prem} |- {conc}"


@dataclass(frozen=True)
class DerivationTrace:
    initial: tuple[Formula, ...]
    steps: tuple[RuleApplication, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            "initial": [str(f) for f in self.initial],
            "steps": [{"rule_id": s.rule_id.value,
                       "premises": [str(p) for p in s.premises],
                       "conclusions": [str(c) for c in s.conclusions]} for s in self.steps],
        }


class _Edge:
    __slots__ = ("mask", "reason")

    def __init__(self, mask: int, reason: tuple):
        self.mask = mask
        self.reason = reason


class _Node:
    __slots__ = ("id", "individual", "depth", "masks", "edges", "parents", "expanded")

    def __init__(self, nid: int, individual: Individual | None, depth: int | None):
        self.id = nid
        self.individual = individual
        self.depth = depth
        self.masks: dict[str, int] = {}
        self.edges: dict[tuple[str, int], _Edge] = {}
        self.parents: set[int] = set()
        self.expanded: dict[int, int] = {}


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Engine:
    def __init__(self, kb: KnowledgeBase, cfg: SaturationConfig):
        self.kb = kb
        self.cfg = cfg
        self.lo = cfg.time_lo
        self.W = cfg.time_hi - cfg.time_lo + 1
        self.full = (1 << self.W) - 1
        self.nodes: list[_Node] = []
        self.null_keys: dict[tuple, int] = {}
        self.individuals: dict[Individual, int] = {}
        self.reason: dict[tuple[int, str, int], tuple] = {}
        self.warnings: dict[str, None] = {}
        self.steps = 0
        self.out_of_budget = False
        incs = kb.tbox.inclusions
        self.incs = incs
        self.shifts: dict[str, list] = {}
        self.conj: dict[str, list] = {}
        self.exr: dict[str, list] = {}
        self.exl: dict[str, list] = {}
        for idx, inc in enumerate(incs):
            if isinstance(inc, Shift):
                self.shifts.setdefault(inc.lhs, []).append((inc.delta, inc.rhs, idx))
            elif isinstance(inc, Conj):
                self.conj.setdefault(inc.lhs1, []).append((inc.lhs2, inc.rhs, idx))
                if inc.lhs1 != inc.lhs2:
                    self.conj.setdefault(inc.lhs2, []).append((inc.lhs1, inc.rhs, idx))
            elif isinstance(inc, ExistsRight):
                self.exr.setdefault(inc.lhs, []).append((inc.role, inc.filler, idx))
            elif isinstance(inc, ExistsLeft):
                self.exl.setdefault(inc.role, []).append((inc.filler, inc.rhs, idx))

    def warn(self, msg: str) -> None:
        self.warnings.setdefault(msg, None)

    def individual_node(self, a: Individual) -> _Node:
        nid = self.individuals.get(a)
        if nid is None:
            nid = self.individuals[a] = len(self.nodes)
            self.nodes.append(_Node(nid, a, self.cfg.max_chain_depth))
        return self.nodes[nid]

    def add(self, node: _Node, concept: str, mask: int, reason: tuple) -> bool:
        old = node.masks.get(concept, 0)
        new = mask & ~old
        if not new:
            return False
        if self.out_of_budget:
            return False
        node.masks[concept] = old | new
        for i in _bits(new):
            self.reason[(node.id, concept, i)] = reason
            self.steps += 1
        if self.steps >= self.cfg.max_steps:
            self.out_of_budget = True
        return True

    def child(self, parent: _Node, filler: str, i: int, idx: int) -> _Node | None:
        if parent.depth is not None and parent.depth == 0:
            self.warn("max_chain_depth reached: existential restrictions left unexpanded")
            return None
        depth = None if parent.depth is None else parent.depth - 1
        key = (filler, i, depth)
        nid = self.null_keys.get(key)
        if nid is None:
            nid = self.null_keys[key] = len(self.nodes)
            node = _Node(nid, None, depth)
            self.nodes.append(node)
            self.add(node, filler, 1 << i, ("seed", parent.id, idx, i))
        return self.nodes[nid]

    def load_abox(self) -> None:
        kb = self.kb
        for f in kb.abox.facts:
            i = f.time - self.lo
            if not 0 <= i < self.W:
                self.warn(f"ABox fact {f} lies outside the window and is ignored")
                continue
            node = self.individual_node(f.subject)
            if isinstance(f, ConceptFact):
                self.add(node, f.concept, 1 << i, ("abox",))
            else:
                obj = self.individual_node(f.object)
                mask = self.full if kb.is_rigid(f.role) else 1 << i
                e = node.edges.get((f.role, obj.id))
                if e is None:
                    node.edges[(f.role, obj.id)] = _Edge(mask, ("abox", f.time))
                else:
                    e.mask |= mask
                obj.parents.add(node.id)
        for a in kb.abox.individuals:
            self.individual_node(a)

    def process(self, node: _Node) -> bool:
        """Apply all rules at ``node`` until nothing changes locally."""
        touched = False
        W, full = self.W, self.full
        while not self.out_of_budget:
            changed = False
            for a, m in list(node.masks.items()):
                for delta, b, idx in self.shifts.get(a, ()):
                    if delta >= 0:
                        sh = m << delta
                        if sh >> W:
                            self.warn(f"window too small: SHIFT by {self.incs[idx]} leaves the window")
                    else:
                        if m & ((1 << -delta) - 1):
                            self.warn(f"window too small: SHIFT by {self.incs[idx]} leaves the window")
                        sh = m >> -delta
                    changed |= self.add(node, b, sh & full, ("shift", idx, delta))
                for other, b, idx in self.conj.get(a, ()):
                    both = m & node.masks.get(other, 0)
                    if both:
                        changed |= self.add(node, b, both, ("conj", idx))
                for role, filler, idx in self.exr.get(a, ()):
                    todo = m & ~node.expanded.get(idx, 0)
                    if not todo:
                        continue
                    node.expanded[idx] = node.expanded.get(idx, 0) | todo
                    rigid = self.kb.is_rigid(role)
                    for i in _bits(todo):
                        ch = self.child(node, filler, i, idx)
                        if ch is None:
                            continue
                        emask = full if rigid else 1 << i
                        e = node.edges.get((role, ch.id))
                        if e is None:
                            node.edges[(role, ch.id)] = _Edge(emask, ("exists", idx, i))
                            changed = True
                        elif emask & ~e.mask:
                            e.mask |= emask
                            changed = True
                        if node.id not in ch.parents:
                            ch.parents.add(node.id)
                            self.queue_push(ch.id)
            for (role, cid), e in list(node.edges.items()):
                lefts = self.exl.get(role)
                if not lefts:
                    continue
                ch = self.nodes[cid]
                for filler, b, idx in lefts:
                    got = ch.masks.get(filler, 0) & e.mask
                    if got:
                        changed |= self.add(node, b, got, ("return", idx, role, cid))
            if not changed:
                break
            touched = True
        return touched

    def queue_push(self, nid: int) -> None:
        if nid not in self.inq:
            self.inq.add(nid)
            self.queue.append(nid)

    def run(self) -> None:
        self.queue: deque[int] = deque()
        self.inq: set[int] = set()
        self.load_abox()
        for n in self.nodes:
            self.queue_push(n.id)
        while self.queue and not self.out_of_budget:
            nid = self.queue.popleft()
            self.inq.discard(nid)
            node = self.nodes[nid]
            if self.process(node):
                for p in sorted(node.parents):
                    self.queue_push(p)
        if self.out_of_budget:
            self.warn("max_steps exhausted before reaching the fixpoint")


class TraceError(ValueError):
    pass


class _Explainer:
    """Unfolds recorded reasons into a literal derivation with fresh nulls."""

    def __init__(self, eng: _Engine):
        self.eng = eng
        self.steps: list[RuleApplication] = []
        self.known: set[Fact] = set(eng.kb.abox.facts)
        self.node_of: dict[Term, int] = dict(eng.individuals)
        self.nulls: dict[tuple[Term, int, int], Null] = {}

    def emit(self, rule: RuleId, premises, conclusions) -> None:
        self.steps.append(RuleApplication(rule, tuple(premises), tuple(conclusions)))
        self.known.update(conclusions)

    def concept(self, term: Term, concept: str, i: int) -> ConceptFact:
        eng = self.eng
        f = ConceptFact(concept, term, eng.lo + i)
        if f in self.known:
            return f
        why = eng.reason[(self.node_of[term], concept, i)]
        kind = why[0]
        if kind == "shift":
            _, idx, delta = why
            inc = eng.incs[idx]
            p = self.concept(term, inc.lhs, i - delta)
            self.emit(RuleId.SHIFT, (p, inc), (f,))
        elif kind == "conj":
            inc = eng.incs[why[1]]
            p1 = self.concept(term, inc.lhs1, i)
            p2 = self.concept(term, inc.lhs2, i)
            self.emit(RuleId.CONJ, (p1, p2, inc), (f,))
        elif kind == "return":
            _, idx, role, cid = why
            inc = eng.incs[idx]
            rf, b = self.role(term, role, cid, i)
            p = self.concept(b, inc.filler, i)
            self.emit(RuleId.RETURN, (rf, p, inc), (f,))
        else:
            raise AssertionError(f"unexplained fact {f} ({kind})")
        return f

    def role(self, term: Term, role: str, cid: int, i: int) -> tuple[RoleFact, Term]:
        eng = self.eng
        e = eng.nodes[self.node_of[term]].edges[(role, cid)]
        why = e.reason
        if why[0] == "abox":
            b = eng.nodes[cid].individual
            t0 = why[1]
            base = RoleFact(role, term, b, t0)
        else:
            _, idx, i0 = why
            inc = eng.incs[idx]
            key = (term, idx, i0)
            b = self.nulls.get(key)
            if b is None:
                p = self.concept(term, inc.lhs, i0)
                b = Null(len(self.nulls))
                self.nulls[key] = b
                self.node_of[b] = cid
                t0 = eng.lo + i0
                self.emit(RuleId.EXISTS, (p, inc),
                          (RoleFact(role, term, b, t0), ConceptFact(inc.filler, b, t0)))
            base = RoleFact(role, term, b, eng.lo + i0)
        f = RoleFact(role, term, b, eng.lo + i)
        if f not in self.known:
            if base not in self.known or not eng.kb.is_rigid(role):
                raise AssertionError(f"unexplained role fact {f}")
            self.emit(RuleId.RIGID, (base,), (f,))
        return f, b


@dataclass
class SaturationResult:
    kb: KnowledgeBase
    config: SaturationConfig
    exhausted: bool
    warnings: list[str]
    _engine: _Engine = field(repr=False)

    def _index(self, t: int) -> int | None:
        i = t - self.config.time_lo
        return i if 0 <= i < self._engine.W else None

    def _term(self, node: _Node) -> Term:
        return node.individual if node.individual is not None else Null(node.id)

    def holds(self, fact: Fact) -> bool:
        eng = self._engine
        i = self._index(fact.time)
        nid = eng.individuals.get(fact.subject) if isinstance(fact.subject, Individual) else None
        if i is None or nid is None:
            return False
        node = eng.nodes[nid]
        if isinstance(fact, ConceptFact):
            return bool(node.masks.get(fact.concept, 0) >> i & 1)
        oid = eng.individuals.get(fact.object)
        e = node.edges.get((fact.role, oid))
        return e is not None and bool(e.mask >> i & 1)

    def times(self, individual: Individual, concept: str) -> set[int]:
        eng = self._engine
        nid = eng.individuals.get(individual)
        if nid is None:
            return set()
        return {eng.lo + i for i in _bits(eng.nodes[nid].masks.get(concept, 0))}

    def concept_facts(self, individuals_only: bool = True) -> set[ConceptFact]:
        eng = self._engine
        out = set()
        for node in eng.nodes:
            if individuals_only and node.individual is None:
                continue
            term = self._term(node)
            for c, m in node.masks.items():
                out.update(ConceptFact(c, term, eng.lo + i) for i in _bits(m))
        return out

    def role_facts_compact(self) -> list[tuple[str, Term, Term, tuple[int, ...] | None]]:
        """Role edges; ``None`` times mark a rigid role that holds everywhere."""
        eng = self._engine
        out = []
        for node in eng.nodes:
            for (role, cid), e in node.edges.items():
                times = None if e.mask == eng.full and self.kb.is_rigid(role) else \
                    tuple(eng.lo + i for i in _bits(e.mask))
                out.append((role, self._term(node), self._term(eng.nodes[cid]), times))
        return out

    @property
    def facts(self) -> set[Fact]:
        """All facts in the window, nulls included, rigid roles expanded."""
        eng = self._engine
        out: set[Fact] = set(self.concept_facts(individuals_only=False))
        for node in eng.nodes:
            for (role, cid), e in node.edges.items():
                s, o = self._term(node), self._term(eng.nodes[cid])
                out.update(RoleFact(role, s, o, eng.lo + i) for i in _bits(e.mask))
        return out

    def explain(self, goals: Fact | Iterable[Fact]) -> DerivationTrace:
        """A literal derivation of the goals, which must hold."""
        goals = [goals] if isinstance(goals, (ConceptFact, RoleFact)) else list(goals)
        eng = self._engine
        ex = _Explainer(eng)
        for g in goals:
            if not self.holds(g):
                raise KeyError(f"{g} is not derived")
            i = g.time - eng.lo
            if isinstance(g, ConceptFact):
                ex.concept(g.subject, g.concept, i)
            else:
                ex.role(g.subject, g.role, eng.individuals[g.object], i)
        initial = tuple(self.kb.abox.facts) + tuple(self.kb.tbox.inclusions)
        return DerivationTrace(initial, tuple(ex.steps))

    @property
    def trace(self) -> DerivationTrace:
        """Derivation of every concept fact about individuals."""
        goals = sorted(self.concept_facts(), key=lambda f: (f.subject.name, f.time, f.concept))
        return self.explain(goals)


def saturate(kb: KnowledgeBase, cfg: SaturationConfig | None = None) -> SaturationResult:
    if cfg is None:
        cfg = default_config(kb)
    eng = _Engine(kb, cfg)
    eng.run()
    return SaturationResult(kb, cfg, not eng.out_of_budget, list(eng.warnings), eng)


def _terms(f: Formula) -> tuple:
    if isinstance(f, ConceptFact):
        return (f.subject,)
    if isinstance(f, RoleFact):
        return (f.subject, f.object)
    return ()


def replay(kb: KnowledgeBase, trace: DerivationTrace) -> set[Fact]:
    """Check every step against the rule shapes; return the derived facts.

    Raises TraceError naming the first bad step.
    """
    tbox = set(kb.tbox.inclusions)
    known: set[Fact] = set(kb.abox.facts)
    seen_terms: set = {t for f in kb.abox.facts for t in _terms(f)}

    def bad(k, msg):
        raise TraceError(f"step {k}: {msg}")

    for k, st in enumerate(trace.steps):
        facts = [p for p in st.premises if isinstance(p, (ConceptFact, RoleFact))]
        incs = [p for p in st.premises if not isinstance(p, (ConceptFact, RoleFact))]
        for p in facts:
            if p not in known:
                bad(k, f"premise {p} not yet derived")
        for i in incs:
            if i not in tbox:
                bad(k, f"inclusion {i} not in the TBox")
        c = st.conclusions
        r = st.rule_id
        if r is RuleId.RIGID:
            ok = (len(facts) == 1 and not incs and len(c) == 1 and isinstance(facts[0], RoleFact)
                  and isinstance(c[0], RoleFact) and kb.is_rigid(facts[0].role)
                  and (c[0].role, c[0].subject, c[0].object) == (facts[0].role, facts[0].subject, facts[0].object))
        elif r is RuleId.SHIFT:
            ok = (len(facts) == 1 and len(incs) == 1 and isinstance(incs[0], Shift) and len(c) == 1
                  and isinstance(facts[0], ConceptFact) and facts[0].concept == incs[0].lhs
                  and c[0] == ConceptFact(incs[0].rhs, facts[0].subject, facts[0].time + incs[0].delta))
        elif r is RuleId.CONJ:
            ok = (len(facts) == 2 and len(incs) == 1 and isinstance(incs[0], Conj) and len(c) == 1
                  and all(isinstance(f, ConceptFact) for f in facts)
                  and {facts[0].concept, facts[1].concept} == {incs[0].lhs1, incs[0].lhs2}
                  and facts[0].subject == facts[1].subject and facts[0].time == facts[1].time
                  and c[0] == ConceptFact(incs[0].rhs, facts[0].subject, facts[0].time))
        elif r is RuleId.RETURN:
            rf = [f for f in facts if isinstance(f, RoleFact)]
            cf = [f for f in facts if isinstance(f, ConceptFact)]
            ok = (len(rf) == 1 and len(cf) == 1 and len(incs) == 1 and isinstance(incs[0], ExistsLeft)
                  and rf[0].role == incs[0].role and cf[0].concept == incs[0].filler
                  and cf[0].subject == rf[0].object and cf[0].time == rf[0].time and len(c) == 1
                  and c[0] == ConceptFact(incs[0].rhs, rf[0].subject, rf[0].time))
        elif r is RuleId.EXISTS:
            ok = (len(facts) == 1 and len(incs) == 1 and isinstance(incs[0], ExistsRight)
                  and isinstance(facts[0], ConceptFact) and facts[0].concept == incs[0].lhs and len(c) == 2)
            if ok:
                rfs = [f for f in c if isinstance(f, RoleFact)]
                cfs = [f for f in c if isinstance(f, ConceptFact)]
                a, n = facts[0].subject, facts[0].time
                ok = (len(rfs) == 1 and len(cfs) == 1 and rfs[0].role == incs[0].role
                      and rfs[0].subject == a and rfs[0].time == n and isinstance(rfs[0].object, Null)
                      and cfs[0] == ConceptFact(incs[0].filler, rfs[0].object, n))
                if ok and rfs[0].object in seen_terms:
                    bad(k, f"null {rfs[0].object} is not fresh")
        else:
            ok = False
        if not ok:
            bad(k, f"does not match rule {r.value}: {st}")
        for f in list(st.premises) + list(c):
            seen_terms.update(_terms(f))
        known.update(c)
    return known


def check_trace(kb: KnowledgeBase, trace: DerivationTrace, goal: Fact | None = None) -> bool:
    try:
        known = replay(kb, trace)
    except TraceError:
        return False
    return goal is None or goal in known


def entails_fact(kb: KnowledgeBase, goal: Fact, cfg: SaturationConfig | None = None) -> DerivationTrace | None:
    """A witnessing trace for ``goal``, or None when it is not derived within ``cfg``.

    None means unknown at this bound, not a semantic no.
    """
    if cfg is None:
        cfg = default_config(kb)
    if goal in kb.abox.facts:
        return DerivationTrace(tuple(kb.abox.facts) + tuple(kb.tbox.inclusions), ())
    res = saturate(kb, cfg)
    if not res.holds(goal):
        return None
    return res.explain(goal)


ANCHOR = Individual("a*")


def ci_config(tbox: TBox, bound: int) -> SaturationConfig:
    s = tbox.total_shift()
    depth = sum(isinstance(i, ExistsRight) for i in tbox.inclusions) + 1
    return SaturationConfig(-s - bound, s + bound, depth)


def _ci_kb(tbox: TBox, lhs: str) -> KnowledgeBase:
    return KnowledgeBase(tbox, ABox((ConceptFact(lhs, ANCHOR, 0),)))


def entails_ci(tbox: TBox, lhs: str, delta: int, rhs: str,
               cfg: SaturationConfig | None = None) -> DerivationTrace | None:
    """Decide ``lhs [= X^delta rhs`` from ``lhs(a*, 0)``; None means unknown at bound."""
    if cfg is None:
        cfg = ci_config(tbox, abs(delta))
    return entails_fact(_ci_kb(tbox, lhs), ConceptFact(rhs, ANCHOR, delta), cfg)


def shift_sets(tbox: TBox, lhs: str, bound: int, cfg: SaturationConfig | None = None) -> dict[str, set[int]]:
    """For every concept B, the derived shifts ``n`` with ``|n| <= bound``, from one saturation."""
    if cfg is None:
        cfg = ci_config(tbox, bound)
    res = saturate(_ci_kb(tbox, lhs), cfg)
    node = res._engine.nodes[res._engine.individuals[ANCHOR]]
    out = {}
    for c, m in node.masks.items():
        out[c] = {n for i in _bits(m) if abs(n := cfg.time_lo + i) <= bound}
    return out


def shift_set(tbox: TBox, lhs: str, rhs: str, bound: int, cfg: SaturationConfig | None = None) -> set[int]:
    """Lower approximation of ``{n : |n| <= bound, tbox entails lhs [= X^n rhs}``."""
    return shift_sets(tbox, lhs, bound, cfg).get(rhs, set())
