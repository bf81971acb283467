"""Data model for the context ontology: names, class expressions, axioms, assertions.

Values are immutable after construction. ABox updates produce a new Ontology
that shares the declaration tables (interned ids stay stable).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

from .errors import NamespaceClash, UnknownName

NAME_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

#: Prefix reserved for names introduced internally (normalization, individual
#: encoding). The parser never accepts it.
FRESH_PREFIX = "_N"

#: Name string used for the universal concept in normal forms and reasoner output.
TOP_NAME = "Top"

#: Words with grammatical meaning in the text format; not declarable.
RESERVED_WORDS = frozenset({"Top", "and", "some"})


# --- class expressions -------------------------------------------------------


@dataclass(frozen=True)
class Top:
    """The universal concept."""

    def __repr__(self) -> str:
        return "Top"


TOP = Top()


@dataclass(frozen=True)
class Atomic:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Some:
    """Existential restriction: things related by `role` to some `filler`."""

    role: str
    filler: "ClassExpression"

    def __repr__(self) -> str:
        return f"some({self.role}, {self.filler!r})"


@dataclass(frozen=True)
class And:
    """Conjunction of two or more distinct conjuncts. Build with conj()."""

    conjuncts: tuple["ClassExpression", ...]

    def __post_init__(self) -> None:
        if len(self.conjuncts) < 2:
            raise ValueError("And requires >= 2 conjuncts; use conj() to construct")

    def __repr__(self) -> str:
        inner = ", ".join(repr(c) for c in self.conjuncts)
        return f"and({inner})"


ClassExpression = Union[Top, Atomic, And, Some]


def conj(parts: Iterable[ClassExpression]) -> ClassExpression:
    """Conjunction constructor: flattens nested Ands and drops duplicate conjuncts.

    Collapses to the single remaining conjunct (or Top for an empty input).
    """
    flat: list[ClassExpression] = []
    seen: set[ClassExpression] = set()

    def push(e: ClassExpression) -> None:
        if isinstance(e, And):
            for c in e.conjuncts:
                push(c)
        elif e not in seen:
            seen.add(e)
            flat.append(e)

    for p in parts:
        push(p)
    if not flat:
        return TOP
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def expr_names(expr: ClassExpression) -> Iterator[tuple[str, str]]:
    """Yield ("class"|"role", name) pairs for every name occurring in `expr`."""
    if isinstance(expr, Atomic):
        yield ("class", expr.name)
    elif isinstance(expr, Some):
        yield ("role", expr.role)
        yield from expr_names(expr.filler)
    elif isinstance(expr, And):
        for c in expr.conjuncts:
            yield from expr_names(c)


# --- axioms and assertions ---------------------------------------------------


@dataclass(frozen=True)
class SubClassOf:
    sub: ClassExpression
    sup: ClassExpression


@dataclass(frozen=True)
class EquivalentTo:
    """Sugar for two SubClassOf axioms; kept distinct so files round-trip."""

    a: ClassExpression
    b: ClassExpression


@dataclass(frozen=True)
class SubRoleOf:
    sub: str
    sup: str


TBoxAxiom = Union[SubClassOf, EquivalentTo, SubRoleOf]


@dataclass(frozen=True)
class TypeAssertion:
    individual: str
    cls: ClassExpression


@dataclass(frozen=True)
class RoleAssertion:
    role: str
    subject: str
    object: str


ABoxAssertion = Union[TypeAssertion, RoleAssertion]


# --- declarations ------------------------------------------------------------

KIND_CLASS = "class"
KIND_ROLE = "role"
KIND_INDIVIDUAL = "individual"
KINDS = (KIND_CLASS, KIND_ROLE, KIND_INDIVIDUAL)


class Declarations:
    """Three disjoint name tables, each interning names to dense ids.

    Ids are assigned in declaration order and stay stable for the lifetime of
    the loaded ontology (ABox deltas share the same tables).
    """

    __slots__ = ("_tables",)

    def __init__(self) -> None:
        self._tables: dict[str, dict[str, int]] = {k: {} for k in KINDS}

    def declare(self, kind: str, name: str) -> int:
        table = self._tables[kind]
        if name in table:
            return table[name]
        for other, t in self._tables.items():
            if other != kind and name in t:
                raise NamespaceClash(name, declared_as=other, wanted=kind)
        table[name] = len(table)
        return table[name]

    def has(self, kind: str, name: str) -> bool:
        return name in self._tables[kind]

    def id_of(self, kind: str, name: str) -> int:
        try:
            return self._tables[kind][name]
        except KeyError:
            raise UnknownName(name, kind) from None

    def names(self, kind: str) -> tuple[str, ...]:
        return tuple(self._tables[kind])

    def count(self, kind: str) -> int:
        return len(self._tables[kind])

    def kind_of(self, name: str) -> str | None:
        for kind, table in self._tables.items():
            if name in table:
                return kind
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Declarations):
            return NotImplemented
        return all(
            set(self._tables[k]) == set(other._tables[k]) for k in KINDS
        )

    __hash__ = None  # type: ignore[assignment]


# --- the ontology value ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Ontology:
    """A declared context model: TBox axioms plus ABox assertions.

    tbox/abox preserve input order (for deterministic downstream numbering)
    but compare with set semantics.
    """

    declarations: Declarations
    tbox: tuple[TBoxAxiom, ...]
    abox: tuple[ABoxAssertion, ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ontology):
            return NotImplemented
        return (
            self.declarations == other.declarations
            and set(self.tbox) == set(other.tbox)
            and set(self.abox) == set(other.abox)
        )

    @property
    def class_names(self) -> tuple[str, ...]:
        return self.declarations.names(KIND_CLASS)

    @property
    def role_names(self) -> tuple[str, ...]:
        return self.declarations.names(KIND_ROLE)

    @property
    def individual_names(self) -> tuple[str, ...]:
        return self.declarations.names(KIND_INDIVIDUAL)

    def check_assertion(self, assertion: ABoxAssertion) -> None:
        """Raise UnknownName unless every name in `assertion` is declared."""
        d = self.declarations
        if isinstance(assertion, TypeAssertion):
            if not d.has(KIND_INDIVIDUAL, assertion.individual):
                raise UnknownName(assertion.individual, KIND_INDIVIDUAL)
            for kind, name in expr_names(assertion.cls):
                if not d.has(kind, name):
                    raise UnknownName(name, kind)
        else:
            if not d.has(KIND_ROLE, assertion.role):
                raise UnknownName(assertion.role, KIND_ROLE)
            for ind in (assertion.subject, assertion.object):
                if not d.has(KIND_INDIVIDUAL, ind):
                    raise UnknownName(ind, KIND_INDIVIDUAL)

    def apply_abox_delta(
        self,
        add: Iterable[ABoxAssertion] = (),
        remove: Iterable[ABoxAssertion] = (),
    ) -> "Ontology":
        """Set-semantics ABox update; the TBox and declarations are untouched.

        Removing an absent assertion is a no-op. Declarations are shared, so
        interned ids remain stable across deltas.
        """
        add = tuple(add)
        remove_set = set(remove)
        for assertion in add:
            self.check_assertion(assertion)
        for assertion in remove_set:
            self.check_assertion(assertion)
        kept = [a for a in self.abox if a not in remove_set]
        present = set(kept)
        for assertion in add:
            if assertion not in present:
                present.add(assertion)
                kept.append(assertion)
        return Ontology(self.declarations, self.tbox, tuple(kept))


def apply_abox_delta(
    ontology: Ontology,
    add: Iterable[ABoxAssertion] = (),
    remove: Iterable[ABoxAssertion] = (),
) -> Ontology:
    return ontology.apply_abox_delta(add, remove)
