"""Semilinear subsets of the integers and eventually periodic normal forms.

A linear set ``{b + k1*p1 + ... + kl*pl : ki >= 0}`` decomposes into simple
pieces. With only positive periods it is ``b + g*S`` for the numerical
semigroup ``S`` generated by ``p/g``, which is a finite set plus a tail
``{s + g*k}`` past the Frobenius number. Negative-only periods mirror this.
Mixed signs give the full residue class ``b + g*Z``, since ``k*p + j*q``
ranges over all multiples of ``gcd(p, q)`` when ``p > 0 > q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from math import gcd, lcm
from typing import Iterable


@dataclass(frozen=True)
class LinearSet:
    offset: int
    periods: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(self.periods))

    def size(self) -> int:
        return abs(self.offset) + sum(abs(p) for p in self.periods)

    def __str__(self) -> str:
        if not self.periods:
            return f"{{{self.offset}}}"
        return f"{{{self.offset} + N*{list(self.periods)}}}"


@dataclass(frozen=True)
class SemilinearSet:
    components: tuple[LinearSet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def of(cls, *parts: tuple[int, Iterable[int]] | int) -> "SemilinearSet":
        comps = []
        for p in parts:
            if isinstance(p, int):
                comps.append(LinearSet(p))
            else:
                comps.append(LinearSet(p[0], tuple(p[1])))
        return cls(tuple(comps))

    def size(self) -> int:
        return sum(c.size() for c in self.components)

    def __str__(self) -> str:
        return " | ".join(str(c) for c in self.components) or "{}"


def semilinear_size(s: SemilinearSet) -> int:
    return s.size()


@dataclass(frozen=True)
class SimpleSet:
    """One of: a point, a forward tail ``{start + period*k}``, a backward tail
    ``{start - period*k}``, or a two-sided class ``start + period*Z``."""

    kind: str  # "point" | "forward" | "backward" | "both"
    start: int
    period: int = 0

    def contains(self, n: int) -> bool:
        if self.kind == "point":
            return n == self.start
        d = n - self.start
        if self.kind == "forward":
            return d >= 0 and d % self.period == 0
        if self.kind == "backward":
            return d <= 0 and d % self.period == 0
        return d % self.period == 0


@lru_cache(maxsize=4096)
def _semigroup(gens: tuple[int, ...]) -> tuple[frozenset[int], int]:
    """Elements below the conductor and the conductor of a numerical semigroup (gcd 1)."""
    small = min(gens)
    bound = (small - 1) * (max(gens) - 1) if small > 1 else 0
    reach = [False] * (bound + 1)
    reach[0] = True
    for v in range(1, bound + 1):
        reach[v] = any(v >= g and reach[v - g] for g in gens)
    conductor = bound
    while conductor > 0 and reach[conductor - 1]:
        conductor -= 1
    return frozenset(v for v in range(conductor) if reach[v]), conductor


def simple_sets(ls: LinearSet) -> list[SimpleSet]:
    periods = [p for p in ls.periods if p != 0]
    b = ls.offset
    if not periods:
        return [SimpleSet("point", b)]
    g = reduce(gcd, (abs(p) for p in periods))
    pos = any(p > 0 for p in periods)
    neg = any(p < 0 for p in periods)
    if pos and neg:
        return [SimpleSet("both", b % g, g)]
    sign = 1 if pos else -1
    gens = tuple(sorted({abs(p) // g for p in periods}))
    below, conductor = _semigroup(gens)
    out = [SimpleSet("point", b + sign * g * v) for v in sorted(below)]
    out.append(SimpleSet("forward" if pos else "backward", b + sign * g * conductor, g))
    return out


def decompose(s: SemilinearSet) -> list[SimpleSet]:
    out: list[SimpleSet] = []
    for c in s.components:
        for piece in simple_sets(c):
            if piece not in out:
                out.append(piece)
    return out


def member(s: SemilinearSet, n: int) -> bool:
    return any(piece.contains(n) for piece in decompose(s))


@dataclass(frozen=True)
class Tail:
    """Membership for ``n`` past ``start`` (in the tail's direction) by ``|n| mod period``."""

    start: int
    period: int
    residues: frozenset[int]


@dataclass(frozen=True)
class EventuallyPeriodic:
    """``core`` plus optional periodic tails.

    ``future`` covers ``n >= m_F`` with ``n mod p_F`` in its residues;
    ``past`` covers ``n <= -m_P`` with ``(-n) mod p_P`` in its residues.
    """

    core: frozenset[int] = frozenset()
    future: Tail | None = None
    past: Tail | None = None

    def contains(self, n: int) -> bool:
        if n in self.core:
            return True
        f, p = self.future, self.past
        if f is not None and n >= f.start and n % f.period in f.residues:
            return True
        if p is not None and -n >= p.start and (-n) % p.period in p.residues:
            return True
        return False

    def __contains__(self, n: int) -> bool:
        return self.contains(n)

    def to_json(self) -> dict:
        def tail(t):
            return None if t is None else {"start": t.start, "period": t.period, "residues": sorted(t.residues)}
        return {"core": sorted(self.core), "future": tail(self.future), "past": tail(self.past)}


def to_eventually_periodic(s: SemilinearSet) -> EventuallyPeriodic:
    pieces = decompose(s)
    if not pieces:
        return EventuallyPeriodic()
    fwd = [p for p in pieces if p.kind in ("forward", "both")]
    bwd = [p for p in pieces if p.kind in ("backward", "both")]
    anchors = [p.start for p in pieces]
    future = past = None
    if fwd:
        p_f = reduce(lcm, (p.period for p in fwd))
        blockers = [p.start + 1 for p in pieces if p.kind in ("point", "backward")]
        m_f = max([p.start for p in fwd if p.kind == "forward"] + blockers + [min(anchors)])
        res = frozenset(r for r in range(p_f) if any(q.contains(m_f + ((r - m_f) % p_f)) for q in fwd))
        if res:
            future = Tail(m_f, p_f, res)
    if bwd:
        p_p = reduce(lcm, (p.period for p in bwd))
        blockers = [-(p.start - 1) for p in pieces if p.kind in ("point", "forward")]
        m_p = max([-p.start for p in bwd if p.kind == "backward"] + blockers + [-max(anchors)])
        res = frozenset(r for r in range(p_p)
                        if any(q.contains(-(m_p + ((r - m_p) % p_p))) for q in bwd))
        if res:
            past = Tail(m_p, p_p, res)
    lo = -past.start if past else min(anchors)
    hi = future.start if future else max(anchors)
    core = frozenset(n for n in range(min(lo, hi), max(lo, hi) + 1)
                     if any(q.contains(n) for q in pieces))
    return EventuallyPeriodic(core, future, past)


def _tail_components(t: Tail, core: set[int]) -> list[tuple[int, int]]:
    """(start, period) pairs covering a tail, measured away from zero.

    Residue classes are merged into the coarsest divisor of the period they
    fill completely, and each start is pulled back over core points that
    continue its progression; those points are removed from ``core``.
    """
    out = []
    left = set(t.residues)
    for d in range(1, t.period + 1):
        if t.period % d or not left:
            continue
        for r in range(d):
            cls = {x for x in range(r, t.period, d)}
            if cls <= t.residues and cls & left:
                left -= cls
                start = t.start + ((r - t.start) % d)
                while start - d in core:
                    start -= d
                    core.discard(start)
                out.append((start, d))
    return out


def from_eventually_periodic(ep: EventuallyPeriodic) -> SemilinearSet:
    """A semilinear representation: merged tail classes plus the leftover core points."""
    core = set(ep.core)
    comps = []
    if ep.future is not None:
        comps += [LinearSet(s, (d,)) for s, d in _tail_components(ep.future, core)]
    if ep.past is not None:
        mirrored = {-n for n in core}
        past = _tail_components(ep.past, mirrored)
        core = {-n for n in mirrored}
        comps += [LinearSet(-s, (-d,)) for s, d in past]
    for c in comps:
        core = {n for n in core if not any(p.contains(n) for p in simple_sets(c))}
    comps.extend(LinearSet(n) for n in sorted(core))
    return SemilinearSet(tuple(comps))


def _fits(samples: set[int], bound: int, start: int, period: int, sign: int) -> bool:
    """Membership constant along ``period`` steps from ``start`` inside the sample window."""
    for n in range(start, bound - period + 1):
        if ((sign * n) in samples) != ((sign * (n + period)) in samples):
            return False
    return True


def _detect_side(samples: set[int], bound: int, sign: int) -> tuple[int, int] | None:
    for p in range(1, bound // 2 + 1):
        for m in range(0, bound // 2 + 1):
            if m + 2 * p > bound:
                break
            if _fits(samples, bound, m, p, sign):
                return m, p
    return None


def detect_periodicity(samples: Iterable[int], bound: int) -> EventuallyPeriodic | None:
    """Fit the smallest period, then the smallest threshold, to a complete sample on [-bound, bound].

    A side fits with ``(m, p)`` when membership is ``p``-periodic from ``m``
    on within the window, with ``m + 2p <= bound`` and ``m <= bound / 2``.
    A side whose pattern is empty contributes no tail. Returns None when no
    side fits. The result is certified only against the sampled window.
    """
    s = {n for n in samples if -bound <= n <= bound}
    fut = _detect_side(s, bound, 1)
    pst = _detect_side(s, bound, -1)
    if fut is None or pst is None:
        return None
    future = past = None
    m_f, p_f = fut
    res = frozenset(n % p_f for n in range(m_f, m_f + p_f) if n in s)
    if res:
        future = Tail(m_f, p_f, res)
    m_p, p_p = pst
    res = frozenset(n % p_p for n in range(m_p, m_p + p_p) if -n in s)
    if res:
        past = Tail(m_p, p_p, res)
    core = frozenset(n for n in s if -m_p <= n <= m_f)
    return EventuallyPeriodic(core, future, past)
