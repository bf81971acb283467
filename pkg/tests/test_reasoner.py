import pytest

from ctxware.ontology import (
    Reasoner,
    ResourceLimit,
    UnknownName,
    direct_hierarchy,
    instances_of,
    is_subsumed,
    normalize,
    parse_ontology,
    realize,
    saturate,
)
from ctxware.ontology.model import (
    Atomic,
    RoleAssertion,
    TOP_NAME,
    TypeAssertion,
)

from genontology import random_ontology
from oracle_reasoner import oracle_realization, oracle_subsumption_pairs


def state_of(text):
    ont = parse_ontology(text)
    return saturate(normalize(ont), ont.class_names), ont


def declared_pairs(state, ontology):
    declared = set(ontology.class_names)
    return {
        (a, b) for a in declared for b in state.subsumers(a) if b in declared
    }


# --- saturation ------------------------------------------------------------


def test_transitive_chain():
    state, _ = state_of("Class: A\nClass: B\nClass: C\nSubClassOf: A, B\nSubClassOf: B, C")
    assert state.is_subsumed("A", "C")


def test_existential_chain_cr3_cr4():
    state, _ = state_of(
        "Class: A\nClass: B\nClass: Bp\nClass: D\nRole: r\n"
        "SubClassOf: A, some(r, B)\nSubClassOf: B, Bp\nSubClassOf: some(r, Bp), D"
    )
    assert state.is_subsumed("A", "D")


def test_role_hierarchy_cr5():
    state, _ = state_of(
        "Class: A\nClass: B\nClass: D\nRole: r\nRole: s\n"
        "SubClassOf: A, some(r, B)\nSubRoleOf: r, s\nSubClassOf: some(s, B), D"
    )
    assert state.is_subsumed("A", "D")
    assert ("A", "B") in state.role_links("s")


def test_reflexivity_and_top():
    state, ont = state_of("Class: A\nClass: B\nSubClassOf: A, B")
    for name in ont.class_names:
        assert {name, TOP_NAME} <= state.subsumers(name)


def test_no_converse():
    state, _ = state_of("Class: A\nClass: B\nSubClassOf: A, B")
    assert state.is_subsumed("A", "B")
    assert not state.is_subsumed("B", "A")


def test_is_subsumed_unknown_name():
    state, _ = state_of("Class: A\nClass: B\nSubClassOf: A, B")
    with pytest.raises(UnknownName):
        is_subsumed(state, "A", "Nope")
    with pytest.raises(UnknownName):
        is_subsumed(state, "Nope", "A")


def test_kitchen_tbox_derives_making_coffee(kitchen_ontology):
    reasoner = Reasoner(kitchen_ontology)
    realization = reasoner.realize()
    assert "MakingCoffee" in realization.types_of("u")


def test_fixpoint_rerun_changes_nothing():
    for seed in range(10):
        ont = random_ontology(seed)
        ntbox = normalize(ont)
        s1 = saturate(ntbox, ont.class_names)
        s2 = saturate(ntbox, ont.class_names)
        assert s1.subsumptions == s2.subsumptions
        assert s1.fact_count == s2.fact_count


def test_monotone_in_axioms():
    base = "Class: A\nClass: B\nClass: C\nRole: r\nSubClassOf: A, B\n"
    extra = base + "SubClassOf: B, C\nSubClassOf: A, some(r, C)\n"
    s_small, ont_small = state_of(base)
    s_big, _ = state_of(extra)
    for name in ont_small.class_names:
        assert s_small.subsumers(name) <= s_big.subsumers(name)


@pytest.mark.parametrize("seed", range(60))
def test_oracle_equivalence_random(seed):
    ont = random_ontology(seed)
    state = saturate(normalize(ont), ont.class_names)
    assert declared_pairs(state, ont) == oracle_subsumption_pairs(ont)


def test_resource_limit():
    ont = parse_ontology(
        "\n".join(f"Class: C{i}" for i in range(50))
        + "\n"
        + "\n".join(f"SubClassOf: C{i}, C{i+1}" for i in range(49))
    )
    with pytest.raises(ResourceLimit) as exc:
        saturate(normalize(ont), ont.class_names, fact_limit=100)
    assert exc.value.facts > 100


# --- realization --------------------------------------------------------------


def test_empty_abox_realizes_to_empty_sets():
    ont = parse_ontology("Class: A\nClass: B\nIndividual: x\nIndividual: y")
    r = realize(ont)
    assert r.types == {"x": frozenset(), "y": frozenset()}


def test_asserted_type_only():
    ont = parse_ontology("Class: Person\nIndividual: u\nType: u, Person")
    assert realize(ont).types_of("u") == {"Person"}


def test_kitchen_realization_examples(kitchen_ontology):
    r = realize(kitchen_ontology)
    assert {"Person", "MakingCoffee"} <= r.types_of("u")
    assert r.instances_of("MakingCoffee") == ("u",)
    assert r.instances_of("Room") == ("k1",)
    assert r.types_of("flat1") == frozenset()


def test_retract_observes_clears_derivation(kitchen_ontology):
    reduced = kitchen_ontology.apply_abox_delta(
        remove=[RoleAssertion("observes", "u", "m1")]
    )
    r = realize(reduced)
    assert r.instances_of("MakingCoffee") == ()
    assert "Person" in r.types_of("u")


def test_instances_unknown_class(kitchen_ontology):
    with pytest.raises(UnknownName):
        realize(kitchen_ontology).instances_of("NoSuchClass")
    with pytest.raises(UnknownName):
        instances_of(realize(kitchen_ontology), "NoSuchClass")


def test_types_of_unknown_individual(kitchen_ontology):
    with pytest.raises(UnknownName):
        realize(kitchen_ontology).types_of("nobody")


def test_realization_monotone_in_abox(kitchen_core_ontology):
    reasoner = Reasoner(kitchen_core_ontology)
    base = reasoner.realize()
    grown = reasoner.realize(
        list(kitchen_core_ontology.abox)
        + [TypeAssertion("u", Atomic("LocatedKitchen"))]
    )
    for ind in base.types:
        assert base.types[ind] <= grown.types[ind]


@pytest.mark.parametrize("seed", range(40))
def test_realization_matches_oracle_random(seed):
    ont = random_ontology(seed, with_abox=True, atomic_abox_only=False)
    ours = realize(ont)
    assert {i: set(t) for i, t in ours.types.items()} == oracle_realization(ont)


@pytest.mark.parametrize("seed", range(30))
def test_overlay_equals_full_run(seed):
    """The frozen-TBox shortcut must agree with a from-scratch saturation."""
    ont = random_ontology(seed, with_abox=True, atomic_abox_only=True)
    reasoner = Reasoner(ont)
    overlay = reasoner.realize()  # atomic ABox: takes the overlay path
    full = reasoner.realize(force_full=True)
    assert overlay.types == full.types


def test_direct_hierarchy_collapses_transitive_edges():
    state, ont = state_of(
        "Class: A\nClass: B\nClass: C\nSubClassOf: A, B\nSubClassOf: B, C"
    )
    groups, edges = direct_hierarchy(state, ont.class_names)
    assert ("A", "C") not in edges
    assert ("A", "B") in edges and ("B", "C") in edges


def test_direct_hierarchy_groups_equivalents():
    state, ont = state_of("Class: A\nClass: B\nEquivalentTo: A, B")
    groups, edges = direct_hierarchy(state, ont.class_names)
    assert ("A", "B") in groups
    assert edges == []
