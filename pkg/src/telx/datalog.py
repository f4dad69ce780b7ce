"""Linear temporal Datalog programs for linear TBoxes, and their bounded evaluation.

Given the shift set of every concept pair as a union of linear sets, each
component ``b + N*p1 + ...`` of the pair (A, B) yields::

    F(x) <- X^-b A(x)
    F(x) <- X^-p F(x)        (one rule per period)
    B(x) <- F(x)

and every ``exists r.A [= B`` yields ``B(x) <- r(x,y), A(y)``, plus
``DIA`` (some later time) and ``DIA-`` (some earlier time) variants when
``r`` is rigid. A body atom ``X^k P(x)`` holds at time t when ``P(x)``
holds at ``t + k``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .model import (
    ABox, ConceptFact, ExistsLeft, Fact, Individual, TBox, fresh_name,
    require_linear,
)
from .saturation import SaturationConfig, shift_sets
from .semilinear import SemilinearSet, detect_periodicity, from_eventually_periodic


@dataclass(frozen=True)
class ConceptAtom:
    predicate: str
    shift: int = 0

    def __str__(self) -> str:
        pre = f"X^{self.shift} " if self.shift else ""
        return f"{pre}{self.predicate}(x)"


@dataclass(frozen=True)
class RoleJoin:
    """``[modality] role(x,y), filler(y)``; modality is None, ``DIA`` or ``DIA-``."""

    role: str
    filler: str
    modality: str | None = None

    def __str__(self) -> str:
        pre = f"{self.modality} " if self.modality else ""
        return f"{pre}{self.role}(x,y), {self.filler}(y)"


@dataclass(frozen=True)
class DatalogRule:
    head: str
    body: ConceptAtom | RoleJoin

    def __str__(self) -> str:
        return f"{self.head}(x) <- {self.body}"


@dataclass(frozen=True)
class DatalogProgram:
    rules: tuple[DatalogRule, ...] = ()
    auxiliary: frozenset[str] = frozenset()

    def __str__(self) -> str:
        return serialize_program(self)


def emit_datalog(tbox: TBox, shifts: Mapping[tuple[str, str], SemilinearSet]) -> DatalogProgram:
    require_linear(tbox)
    rules: list[DatalogRule] = []
    for inc in tbox.inclusions:
        if isinstance(inc, ExistsLeft):
            rules.append(DatalogRule(inc.rhs, RoleJoin(inc.role, inc.filler)))
            if tbox.is_rigid(inc.role):
                rules.append(DatalogRule(inc.rhs, RoleJoin(inc.role, inc.filler, "DIA")))
                rules.append(DatalogRule(inc.rhs, RoleJoin(inc.role, inc.filler, "DIA-")))
    taken = set(tbox.concept_names) | set(tbox.roles)
    for a, b in shifts:
        taken.update((a, b))
    aux = []
    for (a, b), sset in shifts.items():
        for i, comp in enumerate(sset.components, 1):
            f = fresh_name(f"F{i}_{a}_{b}", taken)
            aux.append(f)
            rules.append(DatalogRule(f, ConceptAtom(a, -comp.offset)))
            for p in comp.periods:
                if p != 0:
                    rules.append(DatalogRule(f, ConceptAtom(f, -p)))
            rules.append(DatalogRule(b, ConceptAtom(f)))
    return DatalogProgram(tuple(dict.fromkeys(rules)), frozenset(aux))


def serialize_program(p: DatalogProgram) -> str:
    lines = [f"aux {' '.join(sorted(p.auxiliary))}"] if p.auxiliary else []
    lines.extend(str(r) for r in p.rules)
    return "\n".join(lines) + ("\n" if lines else "")


_NAME = r"[A-Za-z_][A-Za-z0-9_']*"
_CONCEPT_RULE = re.compile(rf"^({_NAME})\(x\)\s*<-\s*(?:X\^([+-]?\d+)\s+)?({_NAME})\(x\)$")
_ROLE_RULE = re.compile(rf"^({_NAME})\(x\)\s*<-\s*(?:(DIA-?)\s+)?({_NAME})\(x,\s*y\),\s*({_NAME})\(y\)$")


def parse_program(text: str) -> DatalogProgram:
    rules, aux = [], set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("aux "):
            aux.update(line[4:].split())
            continue
        m = _CONCEPT_RULE.match(line)
        if m:
            head, k, body = m.groups()
            rules.append(DatalogRule(head, ConceptAtom(body, int(k) if k else 0)))
            continue
        m = _ROLE_RULE.match(line)
        if m:
            head, mod, role, filler = m.groups()
            rules.append(DatalogRule(head, RoleJoin(role, filler, mod)))
            continue
        raise ValueError(f"line {lineno}: malformed rule {line!r}")
    return DatalogProgram(tuple(rules), frozenset(aux))


def eval_datalog_bounded(p: DatalogProgram, abox: ABox, window: tuple[int, int],
                         include_auxiliary: bool = False) -> set[Fact]:
    """Least fixpoint with every derived head timestamp inside ``window``.

    ``DIA r`` at t is read through an auxiliary relation ``r'(t) <- r(t+1)``,
    ``r'(t) <- r'(t+1)`` (mirrored for ``DIA-``), itself restricted to the window.
    """
    lo, hi = window
    facts: dict[str, set[tuple[Individual, int]]] = {}
    roles: dict[str, set[tuple[Individual, Individual, int]]] = {}
    for f in abox.facts:
        if isinstance(f, ConceptFact):
            facts.setdefault(f.concept, set()).add((f.subject, f.time))
        else:
            roles.setdefault(f.role, set()).add((f.subject, f.object, f.time))

    def eventually(role: str, sign: int) -> set[tuple[Individual, Individual, int]]:
        base = roles.get(role, set())
        out: set = set()
        frontier = {(a, b, t - sign) for a, b, t in base if lo <= t - sign <= hi}
        while frontier:
            out |= frontier
            frontier = {(a, b, t - sign) for a, b, t in frontier if lo <= t - sign <= hi} - out
        return out

    role_views = {}
    for r in p.rules:
        if isinstance(r.body, RoleJoin):
            key = (r.body.role, r.body.modality)
            if key not in role_views:
                if r.body.modality is None:
                    rel = roles.get(r.body.role, set())
                else:
                    rel = eventually(r.body.role, 1 if r.body.modality == "DIA" else -1)
                idx: dict[tuple[Individual, int], set[Individual]] = {}
                for a, b, t in rel:
                    idx.setdefault((b, t), set()).add(a)
                role_views[key] = idx

    changed = True
    while changed:
        changed = False
        for r in p.rules:
            new = set()
            if isinstance(r.body, ConceptAtom):
                for a, t in facts.get(r.body.predicate, ()):
                    s = t - r.body.shift
                    if lo <= s <= hi:
                        new.add((a, s))
            else:
                idx = role_views[(r.body.role, r.body.modality)]
                for b, t in facts.get(r.body.filler, ()):
                    for a in idx.get((b, t), ()):
                        if lo <= t <= hi:
                            new.add((a, t))
            cur = facts.setdefault(r.head, set())
            if not new <= cur:
                cur |= new
                changed = True
    out: set[Fact] = set(abox.facts)
    for pred, pairs in facts.items():
        if pred in p.auxiliary and not include_auxiliary:
            continue
        out.update(ConceptFact(pred, a, t) for a, t in pairs)
    return out


@dataclass(frozen=True)
class FittedShifts:
    """Shift sets per concept pair; ``unfitted`` pairs kept only as their sampled points."""

    shifts: Mapping[tuple[str, str], SemilinearSet]
    unfitted: tuple[tuple[str, str], ...]
    bound: int


def fitted_shift_sets(tbox: TBox, bound: int, cfg: SaturationConfig | None = None) -> FittedShifts:
    """Sample every pair's shift set on [-bound, bound] and fit an eventually periodic form.

    Trivial pairs (only ``A [= A`` at shift 0) are left out.
    """
    out: dict[tuple[str, str], SemilinearSet] = {}
    unfitted = []
    for a in tbox.concept_names:
        for b, samples in sorted(shift_sets(tbox, a, bound, cfg).items()):
            if not samples or (a == b and samples == {0}):
                continue
            ep = detect_periodicity(samples, bound)
            if ep is None:
                unfitted.append((a, b))
                out[(a, b)] = SemilinearSet.of(*sorted(samples))
            else:
                out[(a, b)] = from_eventually_periodic(ep)
    return FittedShifts(out, tuple(unfitted), bound)
