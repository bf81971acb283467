"""TBox normalization into the four axiom shapes the saturation engine consumes.

Normal forms (A, B atomic names or Top):

    NF1  A ⊑ B
    NF2  A1 ⊓ A2 ⊑ B
    NF3  A ⊑ ∃r.B
    NF4  ∃r.A ⊑ B

Every complex subexpression C is replaced by a fresh name F defined in both
directions (F ⊑ C and C ⊑ F), which keeps the extension conservative:
subsumptions between original names are unchanged. Fresh names are numbered
deterministically in input order and carry the reserved `_N` prefix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    And,
    Atomic,
    ClassExpression,
    EquivalentTo,
    FRESH_PREFIX,
    Ontology,
    RoleAssertion,
    Some,
    SubClassOf,
    SubRoleOf,
    TOP_NAME,
    Top,
    TypeAssertion,
)

#: Prefix for the class name encoding one individual during realization.
INDIVIDUAL_PREFIX = FRESH_PREFIX + "ind_"


def individual_class(individual: str) -> str:
    return INDIVIDUAL_PREFIX + individual


@dataclass
class NormalizedAxioms:
    """One batch of normal-form axioms (a whole TBox or an ABox encoding)."""

    nf1: list[tuple[str, str]] = field(default_factory=list)
    nf2: list[tuple[str, str, str]] = field(default_factory=list)
    nf3: list[tuple[str, str, str]] = field(default_factory=list)
    nf4: list[tuple[str, str, str]] = field(default_factory=list)
    role_subs: list[tuple[str, str]] = field(default_factory=list)
    fresh: dict[str, ClassExpression] = field(default_factory=dict)

    @property
    def axiom_count(self) -> int:
        return (
            len(self.nf1)
            + len(self.nf2)
            + len(self.nf3)
            + len(self.nf4)
            + len(self.role_subs)
        )

    def class_names(self) -> list[str]:
        """All class names mentioned, in a fixed deterministic order."""
        out: list[str] = []
        seen: set[str] = set()

        def push(n: str) -> None:
            if n not in seen:
                seen.add(n)
                out.append(n)

        for a, b in self.nf1:
            push(a)
            push(b)
        for a1, a2, b in self.nf2:
            push(a1)
            push(a2)
            push(b)
        for a, _r, b in self.nf3:
            push(a)
            push(b)
        for _r, a, b in self.nf4:
            push(a)
            push(b)
        return out

    def role_names(self) -> list[str]:
        out: list[str] = []
        seen: set[str] = set()
        for _a, r, _b in self.nf3:
            if r not in seen:
                seen.add(r)
                out.append(r)
        for r, _a, _b in self.nf4:
            if r not in seen:
                seen.add(r)
                out.append(r)
        for r, s in self.role_subs:
            for n in (r, s):
                if n not in seen:
                    seen.add(n)
                    out.append(n)
        return out


class Normalizer:
    """Stateful rewriter; one instance per ontology so fresh numbering is stable.

    A second batch (the ABox encoding) may be normalized with the same
    instance: the fresh-name memo and counter carry over, so shared
    subexpressions reuse their names.
    """

    def __init__(self) -> None:
        self._memo: dict[ClassExpression, str] = {}
        self._next = 1
        self.out = NormalizedAxioms()

    def fork(self) -> "Normalizer":
        """A child normalizer for one extra batch (e.g. an ABox encoding).

        The child reuses names already assigned here but emits nothing into
        this instance; the parent's numbering is unaffected, so repeated
        forks from the same parent are deterministic.
        """
        child = Normalizer()
        child._memo = dict(self._memo)
        child._next = self._next
        return child

    def add_axiom(self, axiom) -> None:
        if isinstance(axiom, SubClassOf):
            self._emit(axiom.sub, axiom.sup)
        elif isinstance(axiom, EquivalentTo):
            self._emit(axiom.a, axiom.b)
            self._emit(axiom.b, axiom.a)
        elif isinstance(axiom, SubRoleOf):
            self.out.role_subs.append((axiom.sub, axiom.sup))
        else:
            raise TypeError(f"not a TBox axiom: {axiom!r}")

    def add_assertion(self, assertion) -> None:
        """Encode an ABox assertion as axioms over the individual's class name."""
        if isinstance(assertion, TypeAssertion):
            self._emit(Atomic(individual_class(assertion.individual)), assertion.cls)
        elif isinstance(assertion, RoleAssertion):
            self.out.nf3.append(
                (
                    individual_class(assertion.subject),
                    assertion.role,
                    individual_class(assertion.object),
                )
            )
        else:
            raise TypeError(f"not an ABox assertion: {assertion!r}")

    # internal -----------------------------------------------------------

    def _name_of(self, expr: ClassExpression) -> str:
        if isinstance(expr, Top):
            return TOP_NAME
        if isinstance(expr, Atomic):
            return expr.name
        name = self._memo.get(expr)
        if name is None:
            name = f"{FRESH_PREFIX}{self._next}"
            self._next += 1
            self._memo[expr] = name
            self.out.fresh[name] = expr
            fresh_atom = Atomic(name)
            self._emit(fresh_atom, expr)
            self._emit(expr, fresh_atom)
        return name

    def _emit(self, sub: ClassExpression, sup: ClassExpression) -> None:
        if isinstance(sup, And):
            for c in sup.conjuncts:
                self._emit(sub, c)
            return
        if isinstance(sup, Some):
            a = self._name_of(sub)
            b = self._name_of(sup.filler)
            self.out.nf3.append((a, sup.role, b))
            return
        # sup is atomic or Top
        b = self._name_of(sup)
        if isinstance(sub, (Atomic, Top)):
            self.out.nf1.append((self._name_of(sub), b))
        elif isinstance(sub, Some):
            x = self._name_of(sub.filler)
            self.out.nf4.append((sub.role, x, b))
        else:  # And on the left: reduce conjuncts to names, then binarize
            parts = [self._name_of(c) for c in sub.conjuncts]
            while len(parts) > 2:
                merged = self._name_of(And((Atomic(parts[0]), Atomic(parts[1]))))
                parts = [merged] + parts[2:]
            if len(parts) == 2:
                self.out.nf2.append((parts[0], parts[1], b))
            else:
                self.out.nf1.append((parts[0], b))


def normalize(ontology: Ontology) -> NormalizedAxioms:
    """Normalize the TBox of `ontology` (the ABox is not touched)."""
    n = Normalizer()
    for axiom in ontology.tbox:
        n.add_axiom(axiom)
    return n.out
