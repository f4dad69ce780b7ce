"""Text formats for TBoxes, ABoxes, grammars and words.

TBox lines::

    rigid advisorOf
    Prof [= X^1 Prof
    Prof & Proud [= Happy
    Prof [= exists advisorOf . Student
    exists advisorOf . Dr [= Proud

``local r`` and ``concept A`` declare a local role or an isolated concept.
ABox lines are ``Prof(Alice, 2025)`` and ``advisorOf(Alice, Bob, 2025)``.
Grammar files have ``terminals:``, ``start:``, optional ``nonterminals:``,
rules ``N -> A B & c D | _`` and ``key N A B`` sidecar lines.
``#`` starts a comment everywhere.
"""

from __future__ import annotations

import re

from .grammar import Grammar, Rule
from .model import (
    ABox, ConceptFact, Conj, ExistsLeft, ExistsRight, Individual, RoleFact,
    Shift, TBox, concepts_of,
)

NAME = r"[A-Za-z_][A-Za-z0-9_']*"
_TOKEN = re.compile(rf"\s*(?:(?P<sub>\[=)|(?P<shift>X\^(?P<n>\S*))|(?P<amp>&)|(?P<dot>\.)"
                    rf"|(?P<name>{NAME})|(?P<bad>\S+))")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _tokens(text: str, lineno: int) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = m.start() + len(m.group(0)) - len(m.group(0).lstrip()) + 1
        if m.group("sub"):
            out.append(("sub", "[=", col))
        elif m.group("shift") is not None:
            n = m.group("n")
            if not re.fullmatch(r"[+-]?\d+", n):
                raise ParseError(f"non-integer shift {n!r}", lineno, col)
            out.append(("shift", n, col))
        elif m.group("amp"):
            out.append(("amp", "&", col))
        elif m.group("dot"):
            out.append(("dot", ".", col))
        elif m.group("name"):
            out.append(("name", m.group("name"), col))
        else:
            raise ParseError(f"unknown operator {m.group('bad')!r}", lineno, col)
        pos = m.end()
    return out


def _parse_inclusion(toks, lineno):
    kinds = [k for k, _, _ in toks]
    vals = [v for _, v, _ in toks]

    def fail(msg="malformed inclusion"):
        col = toks[0][2] if toks else 1
        raise ParseError(msg, lineno, col)

    if "sub" not in kinds:
        fail("missing '[='")
    i = kinds.index("sub")
    left, right = list(zip(kinds[:i], vals[:i])), list(zip(kinds[i + 1:], vals[i + 1:]))
    lk = [k for k, _ in left]
    rk = [k for k, _ in right]
    if lk == ["name"] and rk == ["name"]:
        return Shift(left[0][1], 0, right[0][1])
    if lk == ["name"] and rk == ["shift", "name"]:
        return Shift(left[0][1], int(right[0][1]), right[1][1])
    if lk == ["name", "amp", "name"] and rk == ["name"]:
        return Conj(left[0][1], left[2][1], right[0][1])
    if lk == ["name", "name", "dot", "name"] and left[0][1] == "exists" and rk == ["name"]:
        return ExistsLeft(left[1][1], left[3][1], right[0][1])
    if lk == ["name"] and rk == ["name", "name", "dot", "name"] and right[0][1] == "exists":
        return ExistsRight(left[0][1], right[1][1], right[3][1])
    fail()


def parse_tbox(text: str) -> TBox:
    roles: dict[str, bool] = {}
    used: set[str] = set()
    concepts: list[str] = []
    incs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        words = line.split()
        if words[0] in ("rigid", "local", "concept") and "[=" not in words:
            if len(words) != 2 or not re.fullmatch(NAME, words[1]):
                raise ParseError(f"malformed {words[0]} declaration", lineno, 1)
            name = words[1]
            if words[0] == "concept":
                concepts.append(name)
                continue
            rigid = words[0] == "rigid"
            if name in used and roles.get(name) != rigid:
                raise ParseError(f"rigidity of {name} declared after first use", lineno, 1)
            if name in roles and roles[name] != rigid:
                raise ParseError(f"conflicting rigidity for {name}", lineno, 1)
            roles[name] = rigid
            continue
        inc = _parse_inclusion(_tokens(line, lineno), lineno)
        if isinstance(inc, (ExistsLeft, ExistsRight)):
            used.add(inc.role)
            roles.setdefault(inc.role, False)
        incs.append(inc)
    return TBox(tuple(incs), roles, frozenset(concepts))


def serialize_tbox(t: TBox) -> str:
    lines = []
    for r, rig in t.roles.items():
        lines.append(f"{'rigid' if rig else 'local'} {r}")
    used = set()
    for inc in t.inclusions:
        used.update(concepts_of(inc))
    for c in sorted(t.extra_concepts - used):
        lines.append(f"concept {c}")
    lines.extend(str(i) for i in t.inclusions)
    return "\n".join(lines) + "\n"


_FACT = re.compile(rf"^\s*({NAME})\s*\(\s*({NAME})\s*,\s*(?:({NAME})\s*,\s*)?([+-]?\d+)\s*\)\s*$")


def parse_fact(text: str, lineno: int = 1):
    m = _FACT.match(text)
    if not m:
        raise ParseError(f"malformed fact {text.strip()!r}", lineno, 1)
    pred, a, b, t = m.groups()
    if b is None:
        return ConceptFact(pred, Individual(a), int(t))
    return RoleFact(pred, Individual(a), Individual(b), int(t))


def parse_abox(text: str) -> ABox:
    facts = []
    roles: dict[str, bool] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        words = line.split()
        if words[0] in ("rigid", "local") and len(words) == 2 and "(" not in line:
            roles[words[1]] = words[0] == "rigid"
            continue
        facts.append(parse_fact(line, lineno))
    return ABox(tuple(facts), roles)


def serialize_abox(a: ABox) -> str:
    lines = [f"{'rigid' if rig else 'local'} {r}" for r, rig in a.roles.items()]
    lines.extend(str(f) for f in a.facts)
    return "\n".join(lines) + "\n"


def _expand_token(tok: str, terminals: set[str], nonterminals: set[str]) -> list[str]:
    if tok in nonterminals:
        return [tok]
    m = re.fullmatch(r"(.)\^(\d+)", tok)
    if m and m.group(1) in terminals:
        return [m.group(1)] * int(m.group(2))
    if tok and all(ch in terminals for ch in tok):
        return list(tok)
    raise ValueError(tok)


def parse_grammar(text: str) -> Grammar:
    terminals: list[str] = []
    declared: list[str] = []
    start = None
    keys: dict[str, tuple[str, str]] = {}
    raw_rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("terminals:"):
            terminals = line[len("terminals:"):].split()
            for t in terminals:
                if len(t) != 1:
                    raise ParseError(f"terminal {t!r} must be one character", lineno, 1)
        elif line.startswith("nonterminals:"):
            declared = line[len("nonterminals:"):].split()
        elif line.startswith("start:"):
            start = line[len("start:"):].strip() or None
        elif line.startswith("key "):
            parts = line.split()
            if len(parts) != 4:
                raise ParseError("key lines need a nonterminal and two concepts", lineno, 1)
            keys[parts[1]] = (parts[2], parts[3])
        elif "->" in line:
            lhs, rhs = line.split("->", 1)
            lhs = lhs.strip()
            if not re.fullmatch(NAME, lhs):
                raise ParseError(f"bad nonterminal {lhs!r}", lineno, 1)
            raw_rules.append((lineno, lhs, rhs))
        else:
            raise ParseError(f"unrecognized line {line!r}", lineno, 1)
    nts = list(dict.fromkeys(declared + [lhs for _, lhs, _ in raw_rules]))
    tset, nset = set(terminals), set(nts)
    rules = []
    for lineno, lhs, rhs in raw_rules:
        for alt in rhs.split("|"):
            conjs = []
            for conj in alt.split("&"):
                toks = conj.split()
                if toks == ["_"] or not toks:
                    if not toks and (len(alt.split("&")) > 1 or alt.strip() == ""):
                        raise ParseError("empty conjunct; write _ for ε", lineno, 1)
                    conjs.append(())
                    continue
                syms = []
                for tok in toks:
                    try:
                        syms.extend(_expand_token(tok, tset, nset))
                    except ValueError:
                        raise ParseError(f"undeclared symbol {tok!r}", lineno, 1) from None
                conjs.append(tuple(syms))
            rules.append(Rule(lhs, tuple(conjs)))
    try:
        return Grammar(tuple(nts), tuple(terminals), tuple(rules), start, keys)
    except ValueError as e:
        raise ParseError(str(e), 1, 1) from None


def _conj_text(conj) -> str:
    if not conj:
        return "_"
    out, i = [], 0
    while i < len(conj):
        j = i
        while j < len(conj) and conj[j] == conj[i]:
            j += 1
        run = j - i
        if run > 1 and len(conj[i]) == 1:
            out.append(f"{conj[i]}^{run}")
        else:
            out.extend(conj[i:j])
        i = j
    return " ".join(out)


def serialize_grammar(g: Grammar) -> str:
    lines = [f"terminals: {' '.join(g.terminals)}"]
    if g.start is not None:
        lines.append(f"start: {g.start}")
    lines.append(f"nonterminals: {' '.join(g.nonterminals)}")
    for r in g.rules:
        lines.append(f"{r.lhs} -> " + " & ".join(_conj_text(c) for c in r.conjuncts))
    for nt in g.nonterminals:
        if nt in g.keys:
            a, b = g.keys[nt]
            lines.append(f"key {nt} {a} {b}")
    return "\n".join(lines) + "\n"


def parse_word(text: str) -> str:
    """``c^16``, ``a^2b^2c^2``, ``aabbcc``, ``_`` or the empty string."""
    text = text.strip()
    if text in ("", "_"):
        return ""
    out = []
    for m in re.finditer(r"(.)(?:\^(\d+))?", text):
        ch, n = m.group(1), m.group(2)
        if ch == "^":
            raise ValueError(f"malformed word {text!r}")
        out.append(ch * (int(n) if n is not None else 1))
    return "".join(out)
