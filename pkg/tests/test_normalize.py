import pytest

from ctxware.ontology import normalize, parse_ontology
from ctxware.ontology.model import FRESH_PREFIX, TOP_NAME

from genontology import random_ontology
from oracle_reasoner import oracle_subsumption_pairs
from ctxware.ontology.reasoner import saturate


def norm_of(text):
    return normalize(parse_ontology(text))


def test_nf2_input_is_unchanged():
    n = norm_of("Class: A\nClass: B\nClass: C\nSubClassOf: and(A, B), C")
    assert n.nf2 == [("A", "B", "C")]
    assert n.nf1 == [] and n.nf3 == [] and n.nf4 == []
    assert n.fresh == {}


def test_equivalence_expands_to_two_nf1():
    n = norm_of("Class: A\nClass: B\nEquivalentTo: A, B")
    assert sorted(n.nf1) == [("A", "B"), ("B", "A")]
    assert n.fresh == {}


def test_existential_conjunction_example():
    n = norm_of("Class: A\nClass: B\nClass: C\nRole: r\nSubClassOf: A, some(r, and(B, C))")
    f = f"{FRESH_PREFIX}1"
    assert set(n.nf1) == {(f, "B"), (f, "C")}
    assert n.nf2 == [("B", "C", f)]
    assert n.nf3 == [("A", "r", f)]
    assert n.nf4 == []
    assert list(n.fresh) == [f]


def test_existential_on_left_becomes_nf4():
    n = norm_of("Class: A\nClass: B\nRole: r\nSubClassOf: some(r, A), B")
    assert n.nf4 == [("r", "A", "B")]


def test_conjunction_on_right_splits():
    n = norm_of("Class: A\nClass: B\nClass: C\nSubClassOf: A, and(B, C)")
    assert sorted(n.nf1) == [("A", "B"), ("A", "C")]
    assert n.fresh == {}


def test_long_conjunction_binarizes_with_definitions():
    n = norm_of(
        "Class: A\nClass: B\nClass: C\nClass: D\nSubClassOf: and(A, B, C), D"
    )
    f = f"{FRESH_PREFIX}1"
    # A ⊓ B gets a defined name, then the pair with C concludes D
    assert ("A", "B", f) in n.nf2
    assert (f, "C", "D") in n.nf2
    assert (f, "A") in n.nf1 and (f, "B") in n.nf1


def test_top_allowed_in_normal_forms():
    n = norm_of("Class: A\nRole: r\nSubClassOf: Top, A\nSubClassOf: A, some(r, Top)")
    assert (TOP_NAME, "A") in n.nf1
    assert ("A", "r", TOP_NAME) in n.nf3


def test_fresh_numbering_deterministic_and_shared():
    text = (
        "Class: A\nClass: B\nClass: C\nClass: D\nRole: r\n"
        "SubClassOf: A, some(r, and(B, C))\n"
        "SubClassOf: D, some(r, and(B, C))\n"
    )
    n1 = norm_of(text)
    n2 = norm_of(text)
    assert n1.nf1 == n2.nf1 and n1.nf3 == n2.nf3
    # the shared subexpression reuses one fresh name
    assert len(n1.fresh) == 1


def test_all_outputs_are_normal_form():
    for seed in range(15):
        ont = random_ontology(seed)
        n = normalize(ont)
        atoms = set(ont.class_names) | set(n.fresh) | {TOP_NAME}
        for a, b in n.nf1:
            assert a in atoms and b in atoms
        for a1, a2, b in n.nf2:
            assert {a1, a2, b} <= atoms
        for a, _r, b in n.nf3:
            assert a in atoms and b in atoms
        for _r, a, b in n.nf4:
            assert a in atoms and b in atoms
        for name in n.fresh:
            assert name.startswith(FRESH_PREFIX)


@pytest.mark.parametrize("seed", range(40))
def test_conservativity_against_unnormalized_oracle(seed):
    """Subsumptions between original names survive normalization exactly."""
    ont = random_ontology(seed)
    state = saturate(normalize(ont), ont.class_names)
    declared = set(ont.class_names)
    ours = {
        (a, b)
        for a in declared
        for b in state.subsumers(a)
        if b in declared
    }
    assert ours == oracle_subsumption_pairs(ont)
