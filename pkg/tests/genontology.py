"""Seeded random ontologies for reasoner cross-checks."""

from __future__ import annotations

import random

from ctxware.ontology.model import (
    Atomic,
    Declarations,
    EquivalentTo,
    KIND_CLASS,
    KIND_INDIVIDUAL,
    KIND_ROLE,
    Ontology,
    RoleAssertion,
    Some,
    SubClassOf,
    SubRoleOf,
    TOP,
    TypeAssertion,
    conj,
)


def random_expr(rng: random.Random, classes, roles, depth: int):
    roll = rng.random()
    if depth <= 0 or roll < 0.55:
        return Atomic(rng.choice(classes))
    if roll < 0.60:
        return TOP
    if roll < 0.80:
        return Some(rng.choice(roles), random_expr(rng, classes, roles, depth - 1))
    return conj(
        random_expr(rng, classes, roles, depth - 1)
        for _ in range(rng.randint(2, 3))
    )


def random_ontology(
    seed: int,
    max_classes: int = 15,
    max_roles: int = 5,
    max_axioms: int = 40,
    max_depth: int = 3,
    with_abox: bool = False,
    atomic_abox_only: bool = True,
) -> Ontology:
    rng = random.Random(seed)
    classes = [f"K{i}" for i in range(rng.randint(2, max_classes))]
    roles = [f"p{i}" for i in range(rng.randint(1, max_roles))]
    individuals = [f"i{i}" for i in range(rng.randint(1, 4))] if with_abox else []

    decls = Declarations()
    for c in classes:
        decls.declare(KIND_CLASS, c)
    for r in roles:
        decls.declare(KIND_ROLE, r)
    for i in individuals:
        decls.declare(KIND_INDIVIDUAL, i)

    tbox = []
    seen = set()
    for _ in range(rng.randint(1, max_axioms)):
        roll = rng.random()
        if roll < 0.80:
            axiom = SubClassOf(
                random_expr(rng, classes, roles, max_depth),
                random_expr(rng, classes, roles, max_depth),
            )
        elif roll < 0.92:
            axiom = EquivalentTo(
                random_expr(rng, classes, roles, max_depth - 1),
                random_expr(rng, classes, roles, max_depth - 1),
            )
        else:
            axiom = SubRoleOf(rng.choice(roles), rng.choice(roles))
        if axiom not in seen:
            seen.add(axiom)
            tbox.append(axiom)

    abox = []
    if with_abox:
        seen_a = set()
        for _ in range(rng.randint(0, 10)):
            if rng.random() < 0.6:
                cls = (
                    Atomic(rng.choice(classes))
                    if atomic_abox_only
                    else random_expr(rng, classes, roles, 2)
                )
                assertion = TypeAssertion(rng.choice(individuals), cls)
            else:
                assertion = RoleAssertion(
                    rng.choice(roles), rng.choice(individuals), rng.choice(individuals)
                )
            if assertion not in seen_a:
                seen_a.add(assertion)
                abox.append(assertion)

    return Ontology(decls, tuple(tbox), tuple(abox))
