"""Conjunctive grammars: data model, normal forms and membership testing.

A rule ``N -> a1 & ... & an`` holds for a word ``w`` when every conjunct
derives ``w``. Membership is decided by a substring-indexed table over the
binary normal form. Each cell is a boolean vector over nonterminals, filled
by iterating the cell's rules to a fixpoint so that unit and epsilon
conjuncts close up inside the cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import fresh_name

Conjunct = tuple[str, ...]


@dataclass(frozen=True)
class Rule:
    lhs: str
    conjuncts: tuple[Conjunct, ...]

    def __post_init__(self):
        conj = tuple(tuple(c) for c in self.conjuncts)
        if not conj:
            raise ValueError(f"rule for {self.lhs} has no conjuncts")
        object.__setattr__(self, "conjuncts", conj)

    def __str__(self) -> str:
        return f"{self.lhs} -> " + " & ".join(" ".join(c) if c else "_" for c in self.conjuncts)


@dataclass(frozen=True)
class Grammar:
    """Nonterminals and terminals are tuples of names; terminals are single characters.

    ``keys`` is an optional sidecar mapping generated nonterminals to the
    concept pair they stand for. It does not take part in equality.
    """

    nonterminals: tuple[str, ...]
    terminals: tuple[str, ...]
    rules: tuple[Rule, ...]
    start: str | None = None
    keys: Mapping[str, tuple[str, str]] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nonterminals", tuple(dict.fromkeys(self.nonterminals)))
        object.__setattr__(self, "terminals", tuple(dict.fromkeys(self.terminals)))
        object.__setattr__(self, "rules", tuple(dict.fromkeys(self.rules)))
        nts, ts = set(self.nonterminals), set(self.terminals)
        if nts & ts:
            raise ValueError(f"symbols both terminal and nonterminal: {sorted(nts & ts)}")
        for t in ts:
            if len(t) != 1:
                raise ValueError(f"terminal {t!r} is not a single character")
        for r in self.rules:
            if r.lhs not in nts:
                raise ValueError(f"undeclared nonterminal {r.lhs}")
            for c in r.conjuncts:
                for s in c:
                    if s not in nts and s not in ts:
                        raise ValueError(f"undeclared symbol {s!r} in rule {r}")
        if self.start is not None and self.start not in nts:
            raise ValueError(f"undeclared start symbol {self.start}")

    def __hash__(self) -> int:
        return hash((self.nonterminals, self.terminals, self.rules, self.start))

    def rules_for(self, nt: str) -> list[Rule]:
        return [r for r in self.rules if r.lhs == nt]

    def key_of(self, nt: str) -> tuple[str, str] | None:
        return self.keys.get(nt)

    def nonterminal_for(self, lhs: str, rhs: str) -> str | None:
        for nt, k in self.keys.items():
            if k == (lhs, rhs):
                return nt
        return None


class GrammarClass(str, Enum):
    CONJUNCTIVE = "conjunctive"
    CONTEXT_FREE = "context_free"
    REGULAR = "regular"


def classify(g: Grammar) -> GrammarClass:
    if any(len(r.conjuncts) > 1 for r in g.rules):
        return GrammarClass.CONJUNCTIVE
    terms = set(g.terminals)
    for r in g.rules:
        (c,) = r.conjuncts
        if not (len(c) == 0 or (len(c) == 2 and c[0] in terms and c[1] not in terms)):
            return GrammarClass.CONTEXT_FREE
    return GrammarClass.REGULAR


class NotUnary(ValueError):
    pass


def _require_unary(g: Grammar) -> str:
    if len(g.terminals) != 1:
        raise NotUnary(f"grammar has {len(g.terminals)} terminals, expected 1")
    return g.terminals[0]


def to_unary_canonical(g: Grammar) -> Grammar:
    """Rewrite a unary grammar so each rule is ``ε``, ``c^n``, ``α`` or ``α & β``.

    α and β are nonempty strings of nonterminals. Helpers are introduced for
    terminal runs inside mixed conjuncts, for terminal or empty conjuncts of
    multi-conjunct rules, and to nest rules with more than two conjuncts.
    """
    c = _require_unary(g)
    taken = set(g.nonterminals) | set(g.terminals)
    nts = list(g.nonterminals)
    rules: list[Rule] = []
    run_helper: dict[int, str] = {}

    def helper_for_run(n: int) -> str:
        if n not in run_helper:
            h = fresh_name(f"H_{c}{n}" if n else "H_eps", taken)
            nts.append(h)
            rules.append(Rule(h, ((c,) * n,)))
            run_helper[n] = h
        return run_helper[n]

    def nonterminal_string(conj: Conjunct) -> Conjunct:
        out, run = [], 0
        for s in conj:
            if s == c:
                run += 1
                continue
            if run:
                out.append(helper_for_run(run))
                run = 0
            out.append(s)
        if run:
            out.append(helper_for_run(run))
        return tuple(out)

    for r in g.rules:
        if len(r.conjuncts) == 1:
            (conj,) = r.conjuncts
            if all(s == c for s in conj):
                rules.append(r)
            else:
                rules.append(Rule(r.lhs, (nonterminal_string(conj),)))
            continue
        parts = []
        for conj in r.conjuncts:
            if all(s == c for s in conj):
                parts.append((helper_for_run(len(conj)),))
            else:
                parts.append(nonterminal_string(conj))
        lhs = r.lhs
        while len(parts) > 2:
            h = fresh_name(f"{r.lhs}_and", taken)
            nts.append(h)
            rules.append(Rule(lhs, (parts[0], (h,))))
            lhs, parts = h, parts[1:]
        rules.append(Rule(lhs, tuple(parts)))
    return Grammar(tuple(nts), g.terminals, tuple(rules), g.start, dict(g.keys))


@dataclass(frozen=True)
class _Binarized:
    grammar: Grammar
    helpers: frozenset[str]
    origin: Mapping[Rule, Rule]  # binary rule -> original rule (helpers map to None)


def _binarize(g: Grammar) -> _Binarized:
    taken = set(g.nonterminals) | set(g.terminals)
    nts = list(g.nonterminals)
    helpers: set[str] = set()
    rules: list[Rule] = []
    origin: dict[Rule, Rule] = {}
    term_helper: dict[str, str] = {}
    chain_helper: dict[Conjunct, str] = {}
    tset = set(g.terminals)

    def new_helper(base: str) -> str:
        h = fresh_name(base, taken)
        nts.append(h)
        helpers.add(h)
        return h

    def as_nt(s: str) -> str:
        if s not in tset:
            return s
        if s not in term_helper:
            h = new_helper(f"T_{s}")
            term_helper[s] = h
            rules.append(Rule(h, ((s,),)))
        return term_helper[s]

    def chain(suffix: Conjunct) -> str:
        if suffix not in chain_helper:
            h = new_helper("H")
            chain_helper[suffix] = h
            rules.append(Rule(h, (binary(suffix),)))
        return chain_helper[suffix]

    def binary(conj: Conjunct) -> Conjunct:
        if len(conj) <= 1:
            return conj
        if len(conj) == 2:
            return (as_nt(conj[0]), as_nt(conj[1]))
        return (as_nt(conj[0]), chain(conj[1:]))

    for r in g.rules:
        b = Rule(r.lhs, tuple(binary(c) for c in r.conjuncts))
        origin.setdefault(b, r)
        rules.append(b)
    bg = Grammar(tuple(nts), g.terminals, tuple(rules), g.start, dict(g.keys))
    return _Binarized(bg, frozenset(helpers), origin)


def to_binary_normal(g: Grammar) -> Grammar:
    """Every conjunct becomes ε, one terminal, one nonterminal or two nonterminals."""
    return _binarize(g).grammar


_EPS, _TERM, _UNIT, _PAIR = 0, 1, 2, 3


class _Compiled:
    """Array form of a binary grammar for vectorized cell evaluation."""

    def __init__(self, b: _Binarized):
        g = b.grammar
        self.binarized = b
        self.grammar = g
        self.index = {n: i for i, n in enumerate(g.nonterminals)}
        self.tindex = {t: i for i, t in enumerate(g.terminals)}
        self.N = len(g.nonterminals)
        conj_ids: dict[Conjunct, int] = {}
        kinds, arg1, arg2 = [], [], []
        flat, starts, lhs = [], [], []
        for r in g.rules:
            starts.append(len(flat))
            lhs.append(self.index[r.lhs])
            for c in r.conjuncts:
                if c not in conj_ids:
                    conj_ids[c] = len(kinds)
                    if len(c) == 0:
                        kinds.append(_EPS); arg1.append(0); arg2.append(0)
                    elif len(c) == 1 and c[0] in self.tindex:
                        kinds.append(_TERM); arg1.append(self.tindex[c[0]]); arg2.append(0)
                    elif len(c) == 1:
                        kinds.append(_UNIT); arg1.append(self.index[c[0]]); arg2.append(0)
                    else:
                        kinds.append(_PAIR); arg1.append(self.index[c[0]]); arg2.append(self.index[c[1]])
                flat.append(conj_ids[c])
        self.conj_ids = conj_ids
        self.kind = np.array(kinds, dtype=np.int8)
        a1, a2 = np.array(arg1, dtype=np.intp), np.array(arg2, dtype=np.intp)
        self.eps = np.flatnonzero(self.kind == _EPS)
        self.term = np.flatnonzero(self.kind == _TERM)
        self.term_char = a1[self.term]
        self.unit = np.flatnonzero(self.kind == _UNIT)
        self.unit_arg = a1[self.unit]
        self.pair = np.flatnonzero(self.kind == _PAIR)
        self.pair_y = a1[self.pair]
        self.pair_z = a2[self.pair]
        self.C = len(kinds)
        self.flat = np.array(flat, dtype=np.intp)
        self.starts = np.array(starts, dtype=np.intp)
        self.rule_lhs = np.array(lhs, dtype=np.intp)

        self.lhs_onehot = np.zeros((len(lhs), self.N), dtype=np.int32)
        self.lhs_onehot[np.arange(len(lhs)), self.rule_lhs] = 1

    def close_cells(self, static: np.ndarray, left0: np.ndarray | None,
                    right0: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
        """Iterate a batch of cells (one per row) to their fixpoints.

        ``static`` holds conjunct verdicts that do not depend on the cell
        itself (terminals, ε, proper splits). Pairs may also split with an
        empty part: ``left0``/``right0`` are the nullable vectors, or None for
        the empty cell where both parts refer to the cell itself.
        Returns the cell vectors and the round in which each entry was set.
        """
        M = static.shape[0]
        cell = np.zeros((M, self.N), dtype=bool)
        rank = np.full((M, self.N), -1, dtype=np.int64)
        if not len(self.rule_lhs):
            return cell, rank
        rnd = 0
        while True:
            ok = static.copy()
            ok[:, self.unit] |= cell[:, self.unit_arg]
            if left0 is None:
                ok[:, self.pair] |= cell[:, self.pair_y] & cell[:, self.pair_z]
            else:
                ok[:, self.pair] |= (left0[self.pair_y] & cell[:, self.pair_z]) | \
                    (cell[:, self.pair_y] & right0[self.pair_z])
            rule_ok = np.logical_and.reduceat(ok[:, self.flat], self.starts, axis=1)
            new = (rule_ok.astype(np.int32) @ self.lhs_onehot) > 0
            added = new & ~cell
            if not added.any():
                return cell, rank
            rank[added] = rnd
            rnd += 1
            cell |= new

    def close_cell(self, static: np.ndarray, left0: np.ndarray | None,
                   right0: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
        cell, rank = self.close_cells(static[None, :], left0, right0)
        return cell[0], rank[0]


_COMPILED: dict[Grammar, _Compiled] = {}


def _compile(g: Grammar) -> _Compiled:
    comp = _COMPILED.get(g)
    if comp is None:
        if len(_COMPILED) > 64:
            _COMPILED.clear()
        comp = _COMPILED[g] = _Compiled(_binarize(g))
    return comp


@dataclass(frozen=True)
class TraceStep:
    """``nonterminal(word)`` derived by ``rule`` with one partition per conjunct.

    ``parts[i]`` lists the subwords matched by the symbols of conjunct ``i``.
    """

    nonterminal: str
    word: str
    rule: Rule
    parts: tuple[tuple[str, ...], ...]

    def __str__(self) -> str:
        body = "; ".join(
            ", ".join(f"{s}({u or 'ε'})" for s, u in zip(c, p)) or "ε"
            for c, p in zip(self.rule.conjuncts, self.parts))
        return f"{body} |- {self.nonterminal}({self.word or 'ε'})"


@dataclass(frozen=True)
class GrammarTrace:
    steps: tuple[TraceStep, ...]

    @property
    def goal(self) -> tuple[str, str]:
        s = self.steps[-1]
        return s.nonterminal, s.word

    def __len__(self) -> int:
        return len(self.steps)


def check_grammar_trace(g: Grammar, trace: GrammarTrace) -> bool:
    """Replay a trace: each step must instantiate a rule of ``g`` on known premises."""
    known: set[tuple[str, str]] = set()
    terms = set(g.terminals)
    rules = set(g.rules)
    for st in trace.steps:
        if st.rule not in rules or st.rule.lhs != st.nonterminal:
            return False
        if len(st.parts) != len(st.rule.conjuncts):
            return False
        for conj, part in zip(st.rule.conjuncts, st.parts):
            if len(conj) != len(part) or "".join(part) != st.word:
                return False
            for s, u in zip(conj, part):
                if s in terms:
                    if u != s:
                        return False
                elif (s, u) not in known:
                    return False
        known.add((st.nonterminal, st.word))
    return True


class _Table:
    """Membership table for one word over a compiled grammar."""

    def __init__(self, comp: _Compiled, word: str):
        self.comp = comp
        self.word = word
        n = len(word)
        N = comp.N
        self.V = np.zeros((n + 1, n + 1, N), dtype=bool)
        self.R = np.full((n + 1, n + 1, N), -1, dtype=np.int64)
        codes = [comp.tindex.get(ch, -1) for ch in word]
        static = np.zeros(comp.C, dtype=bool)
        static[comp.eps] = True
        e, er = comp.close_cell(static, None, None)
        for i in range(n + 1):
            self.V[i, i], self.R[i, i] = e, er
        for span in range(1, n + 1):
            starts = np.arange(0, n - span + 1)
            ends = starts + span
            static = np.zeros((len(starts), comp.C), dtype=bool)
            if span == 1:
                ch = np.array([codes[i] for i in starts], dtype=np.intp)
                static[:, comp.term] = (comp.term_char[None, :] == ch[:, None]) & (ch[:, None] >= 0)
            elif len(comp.pair):
                mids = starts[:, None] + np.arange(1, span)[None, :]
                left = self.V[starts[:, None], mids][:, :, comp.pair_y]
                right = self.V[mids, ends[:, None]][:, :, comp.pair_z]
                static[:, comp.pair] = (left & right).any(axis=1)
            cells, ranks = comp.close_cells(static, e, e)
            self.V[starts, ends], self.R[starts, ends] = cells, ranks

    def holds(self, nt: int, i: int, j: int) -> bool:
        return bool(self.V[i, j, nt])

    def witness(self, x: int, i: int, j: int):
        """First rule and split (leftmost) deriving nonterminal x on w[i:j]."""
        comp = self.comp
        g = comp.grammar
        r = self.R[i, j, x]
        word = self.word
        name = g.nonterminals[x]

        def before(y: int, a: int, b: int) -> bool:
            if not self.V[a, b, y]:
                return False
            if (a, b) == (i, j):
                return self.R[a, b, y] < r
            return True

        for rule in g.rules:
            if rule.lhs != name:
                continue
            parts = []
            for c in rule.conjuncts:
                if len(c) == 0:
                    if i != j:
                        break
                    parts.append(())
                elif len(c) == 1 and c[0] in comp.tindex:
                    if j != i + 1 or word[i] != c[0]:
                        break
                    parts.append(((c[0], i, j),))
                elif len(c) == 1:
                    y = comp.index[c[0]]
                    if not before(y, i, j):
                        break
                    parts.append(((c[0], i, j),))
                else:
                    y, z = comp.index[c[0]], comp.index[c[1]]
                    for m in range(i, j + 1):
                        if before(y, i, m) and before(z, m, j):
                            parts.append(((c[0], i, m), (c[1], m, j)))
                            break
                    else:
                        break
            else:
                return rule, parts
        raise AssertionError("no witness found for a derived entry")

    def trace(self, x: int) -> GrammarTrace:
        comp = self.comp
        b = comp.binarized
        steps: list[TraceStep] = []
        done: set[tuple[int, int, int]] = set()
        memo: dict[tuple[int, int, int], tuple] = {}
        word = self.word

        def wit(y, i, j):
            key = (y, i, j)
            if key not in memo:
                memo[key] = self.witness(y, i, j)
            return memo[key]

        def flatten(sym: str, i: int, j: int) -> list[tuple[str, int, int]]:
            if sym in b.helpers:
                _, parts = wit(comp.index[sym], i, j)
                out = []
                for s, a, c in parts[0]:
                    out.extend(flatten(s, a, c))
                return out
            return [(sym, i, j)]

        def visit(y: int, i: int, j: int):
            if (y, i, j) in done:
                return
            rule, parts = wit(y, i, j)
            orig = b.origin[rule]
            flat = []
            for p in parts:
                seq = []
                for s, a, c in p:
                    seq.extend(flatten(s, a, c))
                flat.append(seq)
            for seq in flat:
                for s, a, c in seq:
                    if s in comp.index:
                        visit(comp.index[s], a, c)
            done.add((y, i, j))
            steps.append(TraceStep(
                comp.grammar.nonterminals[y], word[i:j], orig,
                tuple(tuple(word[a:c] for _, a, c in seq) for seq in flat)))

        visit(x, 0, len(word))
        return GrammarTrace(tuple(steps))


def _check_nt(g: Grammar, nt: str) -> None:
    if nt not in g.nonterminals:
        raise KeyError(f"unknown nonterminal {nt}")


@lru_cache(maxsize=128)
def _table(g: Grammar, word: str) -> _Table:
    return _Table(_compile(g), word)


def member(g: Grammar, nt: str, word: str) -> bool:
    """Whether ``word`` is in the language of ``nt``."""
    _check_nt(g, nt)
    t = _table(g, word)
    return t.holds(t.comp.index[nt], 0, len(word))


def member_trace(g: Grammar, nt: str, word: str) -> GrammarTrace | None:
    """A derivation of ``nt(word)`` in terms of the rules of ``g``, or None."""
    _check_nt(g, nt)
    t = _table(g, word)
    x = t.comp.index[nt]
    if not t.holds(x, 0, len(word)):
        return None
    return t.trace(x)


def unary_table(g: Grammar, bound: int) -> tuple[np.ndarray, tuple[str, ...]]:
    """Boolean table ``T[n, i]``: does nonterminal i derive c^n, for n ≤ bound."""
    _require_unary(g)
    comp = _compile(g)
    N = comp.N
    V = np.zeros((bound + 1, N), dtype=bool)
    static = np.zeros(comp.C, dtype=bool)
    static[comp.eps] = True
    V[0], _ = comp.close_cell(static, None, None)
    e = V[0]
    for n in range(1, bound + 1):
        static = np.zeros(comp.C, dtype=bool)
        if n == 1:
            static[comp.term] = True
        if n > 1 and len(comp.pair):
            left = V[1:n][:, comp.pair_y]
            right = V[n - 1:0:-1][:, comp.pair_z]
            static[comp.pair] = (left & right).any(axis=0)
        V[n], _ = comp.close_cell(static, e, e)
    return V, comp.grammar.nonterminals


def member_unary(g: Grammar, nt: str, n: int) -> bool:
    _check_nt(g, nt)
    if n < 0:
        return False
    V, names = unary_table(g, n)
    return bool(V[n, names.index(nt)])


def language_lengths(g: Grammar, nt: str, bound: int) -> set[int]:
    _check_nt(g, nt)
    V, names = unary_table(g, bound)
    return {int(n) for n in np.flatnonzero(V[:, names.index(nt)])}


def all_language_lengths(g: Grammar, bound: int, nts: Iterable[str] | None = None) -> dict[str, set[int]]:
    V, names = unary_table(g, bound)
    wanted = names if nts is None else tuple(nts)
    return {nt: {int(n) for n in np.flatnonzero(V[:, names.index(nt)])} for nt in wanted}


def enumerate_language(g: Grammar, max_len: int) -> dict[str, set[str]]:
    """Reference semantics: least fixpoint of the proposition rules over words ≤ max_len.

    Exponential in ``max_len``; meant as a test oracle for small alphabets.
    """
    lang: dict[str, set[str]] = {n: set() for n in g.nonterminals}
    terms = set(g.terminals)

    def conj_words(conj: Sequence[str]) -> set[str]:
        acc = {""}
        for s in conj:
            opts = {s} if s in terms else lang[s]
            acc = {u + v for u in acc for v in opts if len(u) + len(v) <= max_len}
            if not acc:
                break
        return acc

    changed = True
    while changed:
        changed = False
        for r in g.rules:
            words = None
            for c in r.conjuncts:
                cw = conj_words(c)
                words = cw if words is None else words & cw
                if not words:
                    break
            new = words - lang[r.lhs]
            if new:
                lang[r.lhs] |= new
                changed = True
    return lang
