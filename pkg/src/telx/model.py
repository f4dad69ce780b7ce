"""Knowledge-base syntax: terms, facts, normal-form inclusions, TBoxes and ABoxes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union


@dataclass(frozen=True, order=True)
class Individual:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Null:
    index: int

    def __str__(self) -> str:
        return f"_:n{self.index}"


Term = Union[Individual, Null]


@dataclass(frozen=True)
class ConceptFact:
    concept: str
    subject: Term
    time: int

    def __str__(self) -> str:
        return f"{self.concept}({self.subject}, {self.time})"


@dataclass(frozen=True)
class RoleFact:
    role: str
    subject: Term
    object: Term
    time: int

    def __str__(self) -> str:
        return f"{self.role}({self.subject}, {self.object}, {self.time})"


Fact = Union[ConceptFact, RoleFact]


@dataclass(frozen=True)
class Shift:
    """``lhs ⊑ ○^delta rhs``; delta 0 is plain subsumption."""

    lhs: str
    delta: int
    rhs: str

    def __str__(self) -> str:
        if self.delta == 0:
            return f"{self.lhs} [= {self.rhs}"
        return f"{self.lhs} [= X^{self.delta} {self.rhs}"


@dataclass(frozen=True)
class Conj:
    lhs1: str
    lhs2: str
    rhs: str

    def __str__(self) -> str:
        return f"{self.lhs1} & {self.lhs2} [= {self.rhs}"


@dataclass(frozen=True)
class ExistsLeft:
    """``∃role.filler ⊑ rhs``."""

    role: str
    filler: str
    rhs: str

    def __str__(self) -> str:
        return f"exists {self.role} . {self.filler} [= {self.rhs}"


@dataclass(frozen=True)
class ExistsRight:
    """``lhs ⊑ ∃role.filler``."""

    lhs: str
    role: str
    filler: str

    def __str__(self) -> str:
        return f"{self.lhs} [= exists {self.role} . {self.filler}"


Inclusion = Union[Shift, Conj, ExistsLeft, ExistsRight]
INCLUSION_TYPES = (Shift, Conj, ExistsLeft, ExistsRight)


def concepts_of(inc: Inclusion) -> tuple[str, ...]:
    if isinstance(inc, Shift):
        return (inc.lhs, inc.rhs)
    if isinstance(inc, Conj):
        return (inc.lhs1, inc.lhs2, inc.rhs)
    if isinstance(inc, ExistsLeft):
        return (inc.filler, inc.rhs)
    return (inc.lhs, inc.filler)


def role_of(inc: Inclusion) -> str | None:
    if isinstance(inc, (ExistsLeft, ExistsRight)):
        return inc.role
    return None


def _dedupe(items: Iterable) -> tuple:
    return tuple(dict.fromkeys(items))


@dataclass(frozen=True)
class TBox:
    """A finite set of normal-form inclusions plus role declarations.

    ``roles`` maps every declared role to its rigidity. Inclusions keep their
    insertion order (duplicates dropped) so that everything downstream is
    deterministic. ``extra_concepts`` declares concept names that occur in no
    inclusion; translations use it to keep their key spaces total.
    Use :meth:`of` to auto-declare roles as local.
    """

    inclusions: tuple[Inclusion, ...] = ()
    roles: Mapping[str, bool] = field(default_factory=dict)
    extra_concepts: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "inclusions", _dedupe(self.inclusions))
        object.__setattr__(self, "roles", dict(sorted(self.roles.items())))
        used = {c for inc in self.inclusions for c in concepts_of(inc)}
        object.__setattr__(self, "extra_concepts", frozenset(self.extra_concepts) - used)

    def __hash__(self) -> int:
        return hash((self.inclusions, tuple(self.roles.items()), self.extra_concepts))

    @classmethod
    def of(cls, inclusions: Iterable[Inclusion], rigid: Iterable[str] = (),
           local: Iterable[str] = (), concepts: Iterable[str] = ()) -> "TBox":
        inclusions = tuple(inclusions)
        roles = {r: False for r in local}
        for inc in inclusions:
            r = role_of(inc)
            if r is not None:
                roles.setdefault(r, False)
        for r in rigid:
            roles[r] = True
        return cls(inclusions, roles, frozenset(concepts))

    @property
    def concept_names(self) -> tuple[str, ...]:
        names = set(self.extra_concepts)
        for inc in self.inclusions:
            names.update(concepts_of(inc))
        return tuple(sorted(names))

    @property
    def used_roles(self) -> tuple[str, ...]:
        return tuple(sorted({r for inc in self.inclusions if (r := role_of(inc)) is not None}))

    def is_rigid(self, role: str) -> bool:
        return self.roles.get(role, False)

    @property
    def rigid_roles(self) -> frozenset[str]:
        return frozenset(r for r, rig in self.roles.items() if rig)

    def size(self) -> int:
        """Symbol count with shift deltas counted in unary."""
        total = 0
        for inc in self.inclusions:
            if isinstance(inc, Shift):
                total += 2 + abs(inc.delta)
            else:
                total += 3
        return total

    def total_shift(self) -> int:
        return sum(abs(i.delta) for i in self.inclusions if isinstance(i, Shift))

    def with_inclusions(self, extra: Iterable[Inclusion]) -> "TBox":
        return TBox(self.inclusions + tuple(extra), self.roles, self.extra_concepts)


@dataclass(frozen=True)
class ABox:
    facts: tuple[Fact, ...] = ()
    roles: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        facts = _dedupe(self.facts)
        for f in facts:
            terms = (f.subject,) if isinstance(f, ConceptFact) else (f.subject, f.object)
            if any(not isinstance(t, Individual) for t in terms):
                raise ValueError(f"ABox facts must be over individuals: {f}")
            if not isinstance(f.time, int):
                raise ValueError(f"non-integer timestamp in {f}")
        object.__setattr__(self, "facts", facts)
        object.__setattr__(self, "roles", dict(sorted(self.roles.items())))

    def __hash__(self) -> int:
        return hash((self.facts, tuple(self.roles.items())))

    @property
    def individuals(self) -> tuple[Individual, ...]:
        seen = {}
        for f in self.facts:
            seen[f.subject] = None
            if isinstance(f, RoleFact):
                seen[f.object] = None
        return tuple(seen)

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(sorted({f.time for f in self.facts}))


@dataclass(frozen=True)
class KnowledgeBase:
    tbox: TBox
    abox: ABox

    def __post_init__(self):
        for r, rig in self.abox.roles.items():
            if r in self.tbox.roles and self.tbox.roles[r] != rig:
                raise ValueError(f"role {r} declared with conflicting rigidity")

    def is_rigid(self, role: str) -> bool:
        if role in self.tbox.roles:
            return self.tbox.roles[role]
        return self.abox.roles.get(role, False)


@dataclass(frozen=True)
class Violation:
    index: int | None
    message: str

    def __str__(self) -> str:
        where = "" if self.index is None else f"inclusion {self.index}: "
        return where + self.message


def _is_name(x) -> bool:
    return isinstance(x, str) and x != ""


def validate_normal_form(tbox: TBox) -> list[Violation]:
    out = []
    for i, inc in enumerate(tbox.inclusions):
        if not isinstance(inc, INCLUSION_TYPES):
            out.append(Violation(i, f"not a normal-form inclusion: {inc!r}"))
            continue
        for name in concepts_of(inc):
            if not _is_name(name):
                out.append(Violation(i, f"bad concept name {name!r}"))
        if isinstance(inc, Shift) and (isinstance(inc.delta, bool) or not isinstance(inc.delta, int)):
            out.append(Violation(i, f"non-integer shift {inc.delta!r}"))
        r = role_of(inc)
        if r is not None:
            if not _is_name(r):
                out.append(Violation(i, f"bad role name {r!r}"))
            elif r not in tbox.roles:
                out.append(Violation(i, f"undeclared role {r}"))
    return out


@dataclass(frozen=True)
class Fragment:
    is_future: bool
    is_linear: bool
    rigid_only: bool


def classify_fragment(tbox: TBox) -> Fragment:
    incs = tbox.inclusions
    return Fragment(
        is_future=all(i.delta >= 0 for i in incs if isinstance(i, Shift)),
        is_linear=not any(isinstance(i, Conj) for i in incs),
        rigid_only=all(tbox.is_rigid(r) for r in tbox.used_roles),
    )


class FragmentError(ValueError):
    """Raised when a TBox lies outside the fragment an operation requires."""

    def __init__(self, message: str, inclusion: Inclusion | None = None):
        super().__init__(message if inclusion is None else f"{message}: {inclusion}")
        self.inclusion = inclusion


class NotFutureFragment(FragmentError):
    pass


class NotLinearFragment(FragmentError):
    pass


def require_future(tbox: TBox) -> None:
    for inc in tbox.inclusions:
        if isinstance(inc, Shift) and inc.delta < 0:
            raise NotFutureFragment("negative shift", inc)


def require_linear(tbox: TBox) -> None:
    for inc in tbox.inclusions:
        if isinstance(inc, Conj):
            raise NotLinearFragment("conjunction in linear fragment", inc)


def fresh_name(base: str, taken: set[str]) -> str:
    """Return ``base`` or a primed variant not in ``taken``, and reserve it."""
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name
