"""Brute-force references shared by the test modules."""

import numpy as np

from telx.semilinear import LinearSet, SemilinearSet


def brute_members(s: SemilinearSet, k_max: int = 100, n_max: int = 100) -> set[int]:
    """``{n : |n| <= n_max}`` reachable with every coefficient at most ``k_max``."""
    out = set()
    for comp in s.components:
        span = abs(comp.offset) + k_max * sum(abs(p) for p in comp.periods)
        reach = np.zeros(2 * span + 1, dtype=bool)
        reach[comp.offset + span] = True
        for p in comp.periods:
            if p == 0:
                continue
            acc = reach.copy()
            step = reach
            for _ in range(k_max):
                step = np.roll(step, p)
                acc |= step
            reach = acc
        idx = np.flatnonzero(reach) - span
        out.update(int(n) for n in idx if abs(n) <= n_max)
    return out


def min_size_representation(target: set[int], lo: int, hi: int, span: int = 10) -> int:
    """Least size of a union of at most two sets ``{b}`` or ``{b + N*p}`` with
    ``0 <= b, p <= span`` matching ``target`` on [lo, hi]."""
    width = hi - lo + 1
    goal = np.zeros(width, dtype=bool)
    for n in target:
        if lo <= n <= hi:
            goal[n - lo] = True
    cands = []
    for b in range(span + 1):
        for p in range(span + 1):
            v = np.zeros(width, dtype=bool)
            if p == 0:
                if lo <= b <= hi:
                    v[b - lo] = True
            else:
                v[np.arange(b, hi + 1, p) - lo] = True
            if not (v & ~goal).any():
                cands.append((b + p, v))
    best = None
    for i, (s1, v1) in enumerate(cands):
        if (v1 == goal).all():
            best = s1 if best is None else min(best, s1)
        for s2, v2 in cands[i:]:
            if ((v1 | v2) == goal).all():
                best = s1 + s2 if best is None else min(best, s1 + s2)
    return best
