"""Saturation over normal-form axioms, plus ABox realization.

The engine computes the least fixpoint of five completion rules over
subsumer sets S and role-link sets R:

    CR1  X ∈ S(A)  and  X ⊑ B            =>  B ∈ S(A)
    CR2  X1, X2 ∈ S(A)  and  X1 ⊓ X2 ⊑ B  =>  B ∈ S(A)
    CR3  X ∈ S(A)  and  X ⊑ ∃r.B          =>  (A, B) ∈ R(r)
    CR4  (A, B) ∈ R(r), Y ∈ S(B), ∃r.Y ⊑ C =>  C ∈ S(A)
    CR5  (A, B) ∈ R(r)  and  r ⊑ s         =>  (A, B) ∈ R(s)

with S(A) initialized to {A, Top} for every class name, fresh ones included.
The worklist is FIFO and names are interned in input order, so runs are
reproducible. Individuals are realized by encoding each one as a fresh class
name and reading its subsumer set back, filtered to declared class names.

Realization against an unchanged TBox reuses the TBox fixpoint as a frozen
base and saturates only the assertion layer on top of it. That shortcut is
sound only while assertion encodings keep fresh names on their left-hand
sides, which holds exactly when every type assertion uses an atomic class;
anything richer falls back to a full run.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ResourceLimit, UnknownName
from .model import (
    ABoxAssertion,
    Atomic,
    KIND_CLASS,
    KIND_INDIVIDUAL,
    Ontology,
    TOP_NAME,
    TypeAssertion,
)
from .normalize import (
    NormalizedAxioms,
    Normalizer,
    individual_class,
    normalize,
)

DEFAULT_FACT_LIMIT = 10_000_000

_SUB = 0
_LINK = 1


class _Interner:
    __slots__ = ("names", "ids")

    def __init__(self) -> None:
        self.names: list[str] = []
        self.ids: dict[str, int] = {}

    def intern(self, name: str) -> int:
        i = self.ids.get(name)
        if i is None:
            i = len(self.names)
            self.ids[name] = i
            self.names.append(name)
        return i

    def clone(self) -> "_Interner":
        c = _Interner.__new__(_Interner)
        c.names = list(self.names)
        c.ids = dict(self.ids)
        return c

    def __len__(self) -> int:
        return len(self.names)


class SaturationState:
    """Fixpoint view: subsumer sets and role links, keyed by name."""

    def __init__(self, classes: _Interner, roles: _Interner, S, R, fact_count: int):
        self._classes = classes
        self._roles = roles
        self._S = S
        self._R = R
        self.fact_count = fact_count
        self._s_by_name: dict[str, frozenset[str]] | None = None

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(self._classes.names)

    @property
    def role_names(self) -> tuple[str, ...]:
        return tuple(self._roles.names)

    def has_class(self, name: str) -> bool:
        return name in self._classes.ids

    def subsumers(self, name: str) -> frozenset[str]:
        """All derived superclasses of `name`, including itself and Top."""
        cid = self._classes.ids.get(name)
        if cid is None:
            raise UnknownName(name, KIND_CLASS)
        names = self._classes.names
        return frozenset(names[i] for i in self._S[cid])

    def is_subsumed(self, sub: str, sup: str) -> bool:
        sub_id = self._classes.ids.get(sub)
        sup_id = self._classes.ids.get(sup)
        if sub_id is None:
            raise UnknownName(sub, KIND_CLASS)
        if sup_id is None:
            raise UnknownName(sup, KIND_CLASS)
        return sup_id in self._S[sub_id]

    @property
    def subsumptions(self) -> dict[str, frozenset[str]]:
        """Materialized S as a name-keyed map (cached)."""
        if self._s_by_name is None:
            names = self._classes.names
            self._s_by_name = {
                names[a]: frozenset(names[b] for b in s)
                for a, s in enumerate(self._S)
            }
        return self._s_by_name

    def role_links(self, role: str) -> frozenset[tuple[str, str]]:
        rid = self._roles.ids.get(role)
        if rid is None:
            raise UnknownName(role, "role")
        names = self._classes.names
        return frozenset((names[a], names[b]) for a, b in self._R.get(rid, ()))


def is_subsumed(state: SaturationState, sub: str, sup: str) -> bool:
    return state.is_subsumed(sub, sup)


class _Engine:
    """Worklist saturation engine. Build, load axioms, run, read state."""

    def __init__(self, fact_limit: int = DEFAULT_FACT_LIMIT):
        self.classes = _Interner()
        self.roles = _Interner()
        self.classes.intern(TOP_NAME)  # id 0
        self.nf1: dict[int, list[int]] = {}
        self.nf2: dict[int, list[tuple[int, int]]] = {}
        self.nf3: dict[int, list[tuple[int, int]]] = {}
        self.nf4: dict[int, dict[int, list[int]]] = {}
        self.rsub: dict[int, list[int]] = {}
        self.S: list[set[int]] = []
        self.R: dict[int, set[tuple[int, int]]] = {}
        self.links_in: dict[int, list[tuple[int, int]]] = {}
        self.queue: deque = deque()
        self.fact_count = 0
        self.fact_limit = fact_limit
        self.frozen_below = 0
        self._initialized = 0

    # loading ------------------------------------------------------------

    def add_axioms(self, batch: NormalizedAxioms, *, shared_indexes: bool = False) -> None:
        """Index one batch. With shared_indexes, appends never mutate lists
        that a base engine may still own (copy-on-append)."""
        c = self.classes.intern
        r = self.roles.intern

        def put(d, k, v):
            if shared_indexes:
                cur = d.get(k)
                d[k] = [v] if cur is None else cur + [v]
            else:
                d.setdefault(k, []).append(v)

        for a, b in batch.nf1:
            put(self.nf1, c(a), c(b))
        for a1, a2, b in batch.nf2:
            i1, i2, ib = c(a1), c(a2), c(b)
            put(self.nf2, i1, (i2, ib))
            if i2 != i1:
                put(self.nf2, i2, (i1, ib))
        for a, role, b in batch.nf3:
            put(self.nf3, c(a), (r(role), c(b)))
        for role, a, b in batch.nf4:
            rid = r(role)
            if shared_indexes:
                m = self.nf4.get(rid)
                m = {} if m is None else dict(m)
                self.nf4[rid] = m
            else:
                m = self.nf4.setdefault(rid, {})
            put(m, c(a), c(b))
        for sub, sup in batch.role_subs:
            put(self.rsub, r(sub), r(sup))

    def ensure_classes(self, names: Iterable[str]) -> None:
        for n in names:
            self.classes.intern(n)

    # public id helpers ----------------------------------------------------

    def class_set(self, name: str) -> set[int] | None:
        cid = self.classes.ids.get(name)
        return None if cid is None else self.S[cid]

    # saturation -----------------------------------------------------------

    def run(self) -> None:
        S = self.S
        R = self.R
        links_in = self.links_in
        queue = self.queue
        nf1, nf2, nf3, nf4 = self.nf1, self.nf2, self.nf3, self.nf4
        rsub = self.rsub
        frozen = self.frozen_below
        limit = self.fact_limit
        count = self.fact_count
        top = 0
        empty: tuple = ()

        def add_s(a: int, b: int) -> None:
            nonlocal count
            s = S[a]
            if b not in s:
                if a < frozen:
                    raise RuntimeError("attempted write into frozen base state")
                s.add(b)
                count += 1
                if count > limit:
                    self.fact_count = count
                    raise ResourceLimit(count, limit)
                queue.append((_SUB, a, b, 0))

        def add_r(rid: int, a: int, b: int) -> None:
            nonlocal count
            rs = R.get(rid)
            if rs is None:
                rs = R[rid] = set()
            pair = (a, b)
            if pair not in rs:
                rs.add(pair)
                count += 1
                if count > limit:
                    self.fact_count = count
                    raise ResourceLimit(count, limit)
                links_in.setdefault(b, []).append((rid, a))
                queue.append((_LINK, rid, a, b))

        # initialize S(A) = {A, Top} for classes not yet seeded
        n = len(self.classes)
        while len(S) < n:
            S.append(set())
        for a in range(max(self._initialized, frozen), n):
            add_s(a, a)
            if a != top:
                add_s(a, top)
        self._initialized = n

        while queue:
            tag, x, y, z = queue.popleft()
            if tag == _SUB:
                a, new = x, y
                for b in nf1.get(new, empty):
                    add_s(a, b)
                pairs = nf2.get(new)
                if pairs:
                    sa = S[a]
                    for other, b in pairs:
                        if other in sa:
                            add_s(a, b)
                for rid, b in nf3.get(new, empty):
                    add_r(rid, a, b)
                incoming = links_in.get(a)
                if incoming:
                    # list may grow while iterating (self-links); extra passes
                    # are redundant but harmless
                    for rid, src in incoming:
                        m = nf4.get(rid)
                        if m:
                            for cid in m.get(new, empty):
                                add_s(src, cid)
            else:
                rid, a, b = x, y, z
                m = nf4.get(rid)
                if m:
                    for bp in list(S[b]):
                        for cid in m.get(bp, empty):
                            add_s(a, cid)
                for sup in rsub.get(rid, empty):
                    add_r(sup, a, b)

        self.fact_count = count

    def overlay(self, fact_limit: int | None = None) -> "_Engine":
        """A new engine that treats this one's fixpoint as a frozen base."""
        eng = _Engine.__new__(_Engine)
        eng.classes = self.classes.clone()
        eng.roles = self.roles.clone()
        eng.nf1 = dict(self.nf1)
        eng.nf2 = dict(self.nf2)
        eng.nf3 = dict(self.nf3)
        eng.nf4 = dict(self.nf4)
        eng.rsub = dict(self.rsub)
        eng.S = list(self.S)
        eng.R = {}
        eng.links_in = {}
        eng.queue = deque()
        eng.fact_count = self.fact_count
        eng.fact_limit = fact_limit if fact_limit is not None else self.fact_limit
        eng.frozen_below = len(self.S)
        eng._initialized = len(self.S)
        return eng

    def state(self) -> SaturationState:
        return SaturationState(self.classes, self.roles, self.S, self.R, self.fact_count)


def saturate(
    axioms: NormalizedAxioms,
    extra_class_names: Sequence[str] = (),
    fact_limit: int = DEFAULT_FACT_LIMIT,
) -> SaturationState:
    """Saturate one normal-form axiom batch to its least fixpoint."""
    eng = _Engine(fact_limit)
    eng.add_axioms(axioms)
    eng.ensure_classes(extra_class_names)
    eng.run()
    return eng.state()


# --- realization --------------------------------------------------------------


@dataclass
class Realization:
    """Per-individual derived types, restricted to declared class names."""

    types: dict[str, frozenset[str]]
    declared_classes: frozenset[str]

    def types_of(self, individual: str) -> frozenset[str]:
        try:
            return self.types[individual]
        except KeyError:
            raise UnknownName(individual, KIND_INDIVIDUAL) from None

    def instances_of(self, cls: str) -> tuple[str, ...]:
        if cls not in self.declared_classes:
            raise UnknownName(cls, KIND_CLASS)
        return tuple(sorted(i for i, ts in self.types.items() if cls in ts))

    def pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset(
            (ind, cls) for ind, ts in self.types.items() for cls in ts
        )


def instances_of(realization: Realization, cls: str) -> tuple[str, ...]:
    return realization.instances_of(cls)


class Reasoner:
    """Cached normalization plus TBox fixpoint for one ontology.

    realize() answers against any ABox over the same declarations; the
    TBox layer is saturated once and reused.
    """

    def __init__(self, ontology: Ontology, fact_limit: int = DEFAULT_FACT_LIMIT):
        self.ontology = ontology
        self.fact_limit = fact_limit
        self._normalizer = Normalizer()
        for axiom in ontology.tbox:
            self._normalizer.add_axiom(axiom)
        self._tbox_axioms = self._normalizer.out
        self._tbox_engine: _Engine | None = None

    @property
    def normalized_tbox(self) -> NormalizedAxioms:
        return self._tbox_axioms

    def _base(self) -> _Engine:
        if self._tbox_engine is None:
            eng = _Engine(self.fact_limit)
            eng.add_axioms(self._tbox_axioms)
            eng.ensure_classes(self.ontology.class_names)
            eng.run()
            self._tbox_engine = eng
        return self._tbox_engine

    def tbox_state(self) -> SaturationState:
        return self._base().state()

    def is_subsumed(self, sub: str, sup: str) -> bool:
        decl = self.ontology.declarations
        for name in (sub, sup):
            if name != TOP_NAME and not decl.has(KIND_CLASS, name):
                raise UnknownName(name, KIND_CLASS)
        return self._base().state().is_subsumed(sub, sup)

    def realize(
        self,
        abox: Sequence[ABoxAssertion] | None = None,
        *,
        force_full: bool = False,
    ) -> Realization:
        if abox is None:
            abox = self.ontology.abox
        for assertion in abox:
            self.ontology.check_assertion(assertion)
        atomic_only = not force_full and all(
            isinstance(a.cls, Atomic) for a in abox if isinstance(a, TypeAssertion)
        )
        norm = self._normalizer.fork()
        batch = norm.out
        for assertion in abox:
            norm.add_assertion(assertion)

        individuals = self.ontology.individual_names
        ind_classes = [individual_class(i) for i in individuals]

        if atomic_only:
            eng = self._base().overlay()
            eng.add_axioms(batch, shared_indexes=True)
        else:
            eng = _Engine(self.fact_limit)
            eng.add_axioms(self._tbox_axioms)
            eng.add_axioms(batch)
            eng.ensure_classes(self.ontology.class_names)
        eng.ensure_classes(ind_classes)
        eng.run()

        names = eng.classes.names
        declared = frozenset(self.ontology.class_names)
        types: dict[str, frozenset[str]] = {}
        for ind, enc in zip(individuals, ind_classes):
            s = eng.class_set(enc)
            if s is None:
                types[ind] = frozenset()
            else:
                types[ind] = frozenset(
                    names[i] for i in s if names[i] in declared
                )
        return Realization(types, declared)


def realize(ontology: Ontology, fact_limit: int = DEFAULT_FACT_LIMIT) -> Realization:
    """One-shot realization of an ontology's own ABox."""
    return Reasoner(ontology, fact_limit).realize()


# --- classification output helpers -------------------------------------------


def direct_hierarchy(
    state: SaturationState, class_names: Sequence[str]
) -> tuple[list[tuple[str, ...]], list[tuple[str, str]]]:
    """Equivalence groups plus direct (non-transitive) subsumption edges
    between group representatives, over the given declared names."""
    declared = [n for n in class_names if state.has_class(n)]
    declared_set = set(declared)
    sups: dict[str, set[str]] = {
        n: {s for s in state.subsumers(n) if s in declared_set and s != n}
        for n in declared
    }
    # group mutually-subsuming names under their lexicographically least member
    rep: dict[str, str] = {}
    groups: dict[str, list[str]] = {}
    for n in sorted(declared):
        eq = {m for m in sups[n] if n in sups[m]}
        eq.add(n)
        r = min(eq)
        rep[n] = r
        groups.setdefault(r, [])
        if n not in groups[r]:
            groups[r].append(n)

    edges: list[tuple[str, str]] = []
    for n in sorted(groups):
        strict = {rep[s] for s in sups[n] if rep[s] != n}
        for b in strict:
            if not any(b in sups[c] and rep[b] != rep[c] for c in strict if c != b):
                edges.append((n, b))
    group_list = [tuple(sorted(groups[r])) for r in sorted(groups)]
    return group_list, sorted(edges)
