"""Translations between TBoxes and grammars, and role rigidisation.

``tbox_to_conjunctive_grammar`` builds one nonterminal ``N_A_B`` per concept
pair so that ``c^n`` is in its language iff ``A [= X^n B`` is entailed.
``grammar_to_tbox`` goes the other way for unary conjunctive grammars.
``linear_tbox_to_cfg`` handles past shifts with a second letter ``d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping

import numpy as np

from .grammar import Grammar, Rule, _binarize, to_unary_canonical, _require_unary
from .model import (
    Conj, ExistsLeft, ExistsRight, Shift, TBox, classify_fragment, fresh_name,
    require_future, require_linear,
)
from .saturation import SaturationConfig, ci_config, shift_sets


def _taken(tbox: TBox) -> set[str]:
    return set(tbox.concept_names) | set(tbox.roles)


def rigidise(tbox: TBox) -> TBox:
    """Replace local roles by fresh rigid ones, guarding returns with marker concepts.

    ``A [= exists r.B`` becomes ``A [= exists r'.B_r`` and ``B_r [= B``; each
    ``exists r.A [= B`` becomes ``A & C_r [= A'_r`` and ``exists r'.A'_r [= B``
    for every marker ``C_r``. Markers are only created for fillers of
    existentials over ``r``; no other marker can ever be derived.
    """
    local = [r for r in tbox.used_roles if not tbox.is_rigid(r)]
    if not local:
        return tbox
    taken = _taken(tbox)
    new_role = {r: fresh_name(f"{r}_rig", taken) for r in local}
    marker: dict[tuple[str, str], str] = {}
    primed: dict[tuple[str, str], str] = {}
    fillers: dict[str, list[str]] = {r: [] for r in local}
    for inc in tbox.inclusions:
        if isinstance(inc, ExistsRight) and inc.role in new_role and inc.filler not in fillers[inc.role]:
            fillers[inc.role].append(inc.filler)
    for r in local:
        for b in fillers[r]:
            marker[(b, r)] = fresh_name(f"{b}_{r}", taken)
    out = []
    for inc in tbox.inclusions:
        if isinstance(inc, ExistsRight) and inc.role in new_role:
            br = marker[(inc.filler, inc.role)]
            out.append(ExistsRight(inc.lhs, new_role[inc.role], br))
            out.append(Shift(br, 0, inc.filler))
        elif isinstance(inc, ExistsLeft) and inc.role in new_role:
            r = inc.role
            key = (inc.filler, r)
            if key not in primed:
                primed[key] = fresh_name(f"{inc.filler}_{r}_ret", taken)
            ar = primed[key]
            for b in fillers[r]:
                out.append(Conj(inc.filler, marker[(b, r)], ar))
            out.append(ExistsLeft(new_role[r], ar, inc.rhs))
        else:
            out.append(inc)
    roles = {r: rig for r, rig in tbox.roles.items() if r not in new_role}
    roles.update({nr: True for nr in new_role.values()})
    return TBox(tuple(out), roles, frozenset(tbox.concept_names))


def _reachability(tbox: TBox) -> dict[str, set[str]]:
    """Over-approximate ``B reachable from A``: a necessary condition for any entailed shift."""
    names = tbox.concept_names
    succ: dict[str, set[str]] = {a: set() for a in names}
    exr, exl = [], []
    for inc in tbox.inclusions:
        if isinstance(inc, Shift):
            succ[inc.lhs].add(inc.rhs)
        elif isinstance(inc, Conj):
            succ[inc.lhs1].add(inc.rhs)
            succ[inc.lhs2].add(inc.rhs)
        elif isinstance(inc, ExistsRight):
            exr.append(inc)
        else:
            exl.append(inc)

    def closure() -> dict[str, set[str]]:
        reach = {}
        for a in names:
            seen = {a}
            stack = [a]
            while stack:
                x = stack.pop()
                for y in succ[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            reach[a] = seen
        return reach

    reach = closure()
    while True:
        added = False
        for er in exr:
            for el in exl:
                if er.role == el.role and el.filler in reach[er.filler] and el.rhs not in succ[er.lhs]:
                    succ[er.lhs].add(el.rhs)
                    added = True
        if not added:
            return reach
        reach = closure()


class _PairGrammarBuilder:
    """Shared construction of the concept-pair grammars."""

    def __init__(self, tbox: TBox, terminals: tuple[str, ...], with_conj: bool):
        self.tbox = tbox
        self.names = tbox.concept_names
        self.reach = _reachability(tbox)
        self.with_conj = with_conj
        self.terminals = terminals
        taken = set(terminals)
        self.nt: dict[tuple[str, str], str] = {}
        for a, b in product(self.names, self.names):
            self.nt[(a, b)] = fresh_name(f"N_{a}_{b}", taken)
        self.shifts = [i for i in tbox.inclusions if isinstance(i, Shift)]
        self.conjs: dict[str, list[Conj]] = {}
        for i in tbox.inclusions:
            if isinstance(i, Conj):
                self.conjs.setdefault(i.rhs, []).append(i)
        self.downup: dict[str, list[tuple[str, str]]] = {}
        exl = [i for i in tbox.inclusions if isinstance(i, ExistsLeft)]
        for er in tbox.inclusions:
            if isinstance(er, ExistsRight):
                for el in exl:
                    if el.role == er.role:
                        self.downup.setdefault(er.lhs, []).append((er.filler, el.filler, el.rhs))

    def live(self, a: str, b: str) -> bool:
        return b in self.reach[a]

    def rules_for(self, a: str, b: str) -> list[Rule]:
        n = self.nt[(a, b)]
        if not self.live(a, b):
            return []
        rules = []
        if a == b:
            rules.append(Rule(n, ((),)))
        for s in self.shifts:
            if s.lhs == a and s.rhs == b:
                if s.delta == 0:
                    rules.append(Rule(n, ((),)))
                elif s.delta > 0:
                    rules.append(Rule(n, (("c",) * s.delta,)))
                else:
                    rules.append(Rule(n, (("d",) * -s.delta,)))
        if self.with_conj:
            for cj in self.conjs.get(b, ()):
                if self.live(a, cj.lhs1) and self.live(a, cj.lhs2):
                    rules.append(Rule(n, ((self.nt[(a, cj.lhs1)],), (self.nt[(a, cj.lhs2)],))))
        for c, d, rhs in self.downup.get(a, ()):
            if rhs == b and self.live(c, d):
                rules.append(Rule(n, ((self.nt[(c, d)],),)))
        for c in sorted(self.reach[a]):
            if self.live(c, b):
                rules.append(Rule(n, ((self.nt[(a, c)], self.nt[(c, b)]),)))
        return rules

    def build(self, keys: Iterable[tuple[str, str]] | None) -> Grammar:
        if keys is None:
            pairs = [(a, b) for a, b in product(self.names, self.names)]
            rules = [r for a, b in pairs for r in self.rules_for(a, b)]
        else:
            inv = {v: k for k, v in self.nt.items()}
            todo = [k for k in keys if k in self.nt]
            seen = set(todo)
            pairs, rules = [], []
            while todo:
                k = todo.pop()
                pairs.append(k)
                for r in self.rules_for(*k):
                    rules.append(r)
                    for conj in r.conjuncts:
                        for s in conj:
                            if s in inv and inv[s] not in seen:
                                seen.add(inv[s])
                                todo.append(inv[s])
            pairs.sort()
            order = {k: i for i, k in enumerate(product(self.names, self.names))}
            rules.sort(key=lambda r: order[inv[r.lhs]])
        nts = tuple(self.nt[p] for p in pairs)
        keymap = {self.nt[p]: p for p in pairs}
        return Grammar(nts, self.terminals, tuple(rules), None, keymap)


def tbox_to_conjunctive_grammar(tbox: TBox, require_future_fragment: bool = True,
                                keys: Iterable[tuple[str, str]] | None = None) -> Grammar:
    """Unary conjunctive grammar whose ``N_A_B`` derives ``c^n`` iff the TBox entails ``A [= X^n B``.

    Local roles are rigidised first, so the keys range over the concepts of
    the rigidised TBox. ``keys`` restricts the output to the nonterminals
    those keys depend on. Nonterminals whose target concept is unreachable
    from the source concept are kept but get no rules, since their language
    is empty.
    """
    if require_future_fragment:
        require_future(tbox)
    return _PairGrammarBuilder(rigidise(tbox), ("c",), True).build(keys)


@dataclass(frozen=True)
class GrammarToTboxResult:
    tbox: TBox
    source_concept: str
    concept_of: Mapping[str, str]
    helper_concepts: Mapping[tuple[str, ...], str]
    helper_roles: Mapping[tuple[str, ...], str]
    canonical: Grammar


def grammar_to_tbox(g: Grammar) -> GrammarToTboxResult:
    """Future TBox with ``T |= A [= X^n B_N`` iff ``c^n`` is in the language of N.

    ``C_i`` collects the shifts reachable by concatenating the languages of
    the index sequence ``i``; each sequence longer than one is split off its
    head with a fresh rigid role.
    """
    _require_unary(g)
    cg = to_unary_canonical(g)
    c = cg.terminals[0]
    taken = set(cg.nonterminals)
    source = fresh_name("A", taken)
    concept_of = {n: n for n in cg.nonterminals}
    seqs: list[tuple[str, ...]] = []
    for r in cg.rules:
        for conj in r.conjuncts:
            if conj and conj[0] != c:
                for j in range(len(conj)):
                    if conj[j:] not in seqs:
                        seqs.append(conj[j:])
    helper_c = {s: fresh_name("C_" + "_".join(s), taken) for s in seqs}
    helper_r = {s: fresh_name("r_" + "_".join(s), taken) for s in seqs if len(s) > 1}
    incs = []
    for r in cg.rules:
        b = concept_of[r.lhs]
        if len(r.conjuncts) == 1:
            (conj,) = r.conjuncts
            if not conj:
                incs.append(Shift(source, 0, b))
            elif conj[0] == c:
                incs.append(Shift(source, len(conj), b))
            else:
                incs.append(Shift(helper_c[conj], 0, b))
        else:
            a1, a2 = r.conjuncts
            incs.append(Conj(helper_c[a1], helper_c[a2], b))
    for s in seqs:
        if len(s) > 1:
            head, tail = s[0], s[1:]
            incs.append(ExistsRight(concept_of[head], helper_r[s], source))
            incs.append(ExistsLeft(helper_r[s], helper_c[tail], helper_c[s]))
        else:
            incs.append(Shift(concept_of[s[0]], 0, helper_c[s]))
    tbox = TBox.of(incs, rigid=helper_r.values(), concepts=[source, *concept_of.values()])
    return GrammarToTboxResult(tbox, source, concept_of, helper_c, helper_r, cg)


@dataclass(frozen=True)
class RigidiseLinearResult:
    tbox: TBox
    exact: bool
    added: tuple[Shift, ...]


def rigidise_linear(tbox: TBox, oracle_cfg: SaturationConfig | None = None) -> RigidiseLinearResult:
    """Drop local-role inclusions and add every subsumption ``A [= B`` the oracle certifies.

    Exact when the input uses rigid roles only. Otherwise the added
    subsumptions are those found within ``oracle_cfg``.
    """
    require_linear(tbox)
    names = tbox.concept_names
    kept = [i for i in tbox.inclusions
            if not (isinstance(i, (ExistsLeft, ExistsRight)) and not tbox.is_rigid(i.role))]
    present = set(kept)
    if oracle_cfg is None:
        oracle_cfg = ci_config(tbox, 0)
    added = []
    for a in names:
        sets = shift_sets(tbox, a, 0, oracle_cfg)
        for b in names:
            if b != a and 0 in sets.get(b, ()):
                s = Shift(a, 0, b)
                if s not in present:
                    added.append(s)
                    present.add(s)
    roles = {r: True for r, rig in tbox.roles.items() if rig}
    out = TBox(tuple(kept) + tuple(added), roles, frozenset(names))
    return RigidiseLinearResult(out, classify_fragment(tbox).rigid_only, tuple(added))


def linear_tbox_to_cfg(tbox: TBox, oracle_cfg: SaturationConfig | None = None,
                       keys: Iterable[tuple[str, str]] | None = None) -> Grammar:
    """Context-free grammar over ``{c, d}``: ``T |= A [= X^n B`` iff some word of
    ``N_A_B`` has ``#c - #d = n``."""
    require_linear(tbox)
    rl = rigidise_linear(tbox, oracle_cfg)
    return _PairGrammarBuilder(rl.tbox, ("c", "d"), False).build(keys)


def _eliminate_eps_units(g: Grammar) -> tuple[Grammar, set[str]]:
    """Binary grammar without ε or unit conjuncts, plus the nullable nonterminals."""
    b = _binarize(g).grammar
    terms = set(b.terminals)
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for r in b.rules:
            (conj,) = r.conjuncts
            if r.lhs not in nullable and all(s in nullable for s in conj):
                nullable.add(r.lhs)
                changed = True
    direct: dict[str, set[tuple[str, ...]]] = {n: set() for n in b.nonterminals}
    units: dict[str, set[str]] = {n: set() for n in b.nonterminals}
    for r in b.rules:
        (conj,) = r.conjuncts
        options = [conj]
        if len(conj) == 2:
            if conj[1] in nullable:
                options.append((conj[0],))
            if conj[0] in nullable:
                options.append((conj[1],))
        for o in options:
            if len(o) == 0:
                continue
            if len(o) == 1 and o[0] not in terms:
                if o[0] != r.lhs:
                    units[r.lhs].add(o[0])
            else:
                direct[r.lhs].add(o)
    rules = []
    for n in b.nonterminals:
        seen = {n}
        stack = [n]
        while stack:
            x = stack.pop()
            for y in units[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        bodies = set()
        for y in seen:
            bodies |= direct[y]
        rules.extend(Rule(n, (body,)) for body in sorted(bodies))
    return Grammar(b.nonterminals, b.terminals, tuple(rules)), nullable


def _bool_conv2(a: np.ndarray, b: np.ndarray, size: int) -> np.ndarray:
    shape = (2 * size + 2, 2 * size + 2)
    fa = np.fft.rfft2(a.astype(float), shape)
    fb = np.fft.rfft2(b.astype(float), shape)
    out = np.fft.irfft2(fa * fb, shape)[: size + 1, : size + 1]
    return out > 0.5


@lru_cache(maxsize=32)
def parikh_table(g: Grammar, max_len: int, max_balance: int | None = None):
    """For each nonterminal, a boolean array ``P[i, j]``: some nonempty word has i c's and j d's.

    Only words with ``i + j <= max_len`` and ``|i - j| <= max_balance`` are tracked.
    Returns the table (helpers included), the nullable nonterminals of ``g``
    and the ε-free binary grammar the table was computed on.
    """
    if any(len(r.conjuncts) != 1 for r in g.rules):
        raise ValueError("exists_shift needs a context-free grammar")
    if max_balance is None:
        max_balance = max_len
    eg, nullable = _eliminate_eps_units(g)
    idx = {t: k for k, t in enumerate(("c", "d"))}
    i, j = np.indices((max_len + 1, max_len + 1))
    budget = (i + j <= max_len) & (np.abs(i - j) <= max_balance)
    P = {n: np.zeros((max_len + 1, max_len + 1), dtype=bool) for n in eg.nonterminals}
    pairs = []
    for r in eg.rules:
        (conj,) = r.conjuncts
        if len(conj) == 1:
            cell = [0, 0]
            cell[idx[conj[0]]] = 1
            if max_len >= 1 and budget[cell[0], cell[1]]:
                P[r.lhs][cell[0], cell[1]] = True
        else:
            pairs.append((r.lhs, conj[0], conj[1]))
    uses: dict[str, list[tuple[str, str, str]]] = {}
    for p in pairs:
        uses.setdefault(p[1], []).append(p)
        if p[2] != p[1]:
            uses.setdefault(p[2], []).append(p)
    dirty = {n for n in eg.nonterminals if P[n].any()}
    while dirty:
        todo = dict.fromkeys(p for n in sorted(dirty) for p in uses.get(n, ()))
        dirty = set()
        for x, y, z in todo:
            if not P[y].any() or not P[z].any():
                continue
            new = _bool_conv2(P[y], P[z], max_len) & budget
            if (new & ~P[x]).any():
                P[x] |= new
                dirty.add(x)
    for arr in P.values():
        arr.flags.writeable = False
    return P, nullable & set(g.nonterminals), eg


def exists_shift(g: Grammar, key: str | tuple[str, str], n: int,
                 max_len: int | None = None, max_balance: int | None = None) -> str | None:
    """A shortest word of the nonterminal with ``#c - #d = n``, or None within the budget.

    Among shortest words the lexicographically least one is returned.
    """
    nt = g.nonterminal_for(*key) if isinstance(key, tuple) else key
    if nt is None or nt not in g.nonterminals:
        raise KeyError(f"unknown nonterminal {key}")
    if max_len is None:
        max_len = default_exists_budget(g)
    P, nullable, eg = parikh_table(g, max_len, max_balance)
    if n == 0 and nt in nullable:
        return ""
    table = P[nt]
    for length in range(1, max_len + 1):
        if (length + n) % 2:
            continue
        ci = (length + n) // 2
        di = length - ci
        if ci < 0 or di < 0:
            continue
        if table[ci, di]:
            return _best_word(eg, P, nt, ci, di)
    return None


def _best_word(eg: Grammar, P: dict[str, np.ndarray], nt: str, ci: int, di: int) -> str:
    by_lhs: dict[str, list[tuple[str, ...]]] = {}
    for r in eg.rules:
        by_lhs.setdefault(r.lhs, []).append(r.conjuncts[0])
    memo: dict[tuple[str, int, int], str] = {}

    def best(x: str, i: int, j: int) -> str:
        key = (x, i, j)
        if key in memo:
            return memo[key]
        found = None
        for body in by_lhs.get(x, ()):
            if len(body) == 1:
                t = body[0]
                if (t == "c" and (i, j) == (1, 0)) or (t == "d" and (i, j) == (0, 1)):
                    cand = t
                else:
                    continue
            else:
                y, z = body
                py, pz = P[y], P[z]
                cand = None
                for i1 in range(i + 1):
                    for j1 in range(j + 1):
                        if (i1, j1) in ((0, 0), (i, j)):
                            continue
                        if py[i1, j1] and pz[i - i1, j - j1]:
                            w = best(y, i1, j1) + best(z, i - i1, j - j1)
                            if cand is None or w < cand:
                                cand = w
                if cand is None:
                    continue
            if found is None or cand < found:
                found = cand
        assert found is not None
        memo[key] = found
        return found

    return best(nt, ci, di)


def default_exists_budget(g: Grammar) -> int:
    """``4 * (total shift + |concepts|^2)`` recovered from a pair grammar."""
    concepts = {a for k in g.keys.values() for a in k}
    total = 0
    for r in g.rules:
        for conj in r.conjuncts:
            if conj and all(s in g.terminals for s in conj):
                total += len(conj)
    return 4 * (total + len(concepts) ** 2)
