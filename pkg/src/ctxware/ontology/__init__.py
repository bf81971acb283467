"""Context ontology: parsing, normalization, saturation, realization."""

from .errors import (
    NamespaceClash,
    OntologyError,
    OntologySyntaxError,
    ResourceLimit,
    UndeclaredName,
    UnknownName,
)
from .model import (
    And,
    Atomic,
    ClassExpression,
    Declarations,
    EquivalentTo,
    FRESH_PREFIX,
    Ontology,
    RoleAssertion,
    Some,
    SubClassOf,
    SubRoleOf,
    TOP,
    TOP_NAME,
    Top,
    TypeAssertion,
    apply_abox_delta,
    conj,
)
from .normalize import NormalizedAxioms, Normalizer, individual_class, normalize
from .parser import (
    load_ontology,
    parse_ontology,
    render_expr,
    serialize_ontology,
)
from .reasoner import (
    DEFAULT_FACT_LIMIT,
    Realization,
    Reasoner,
    SaturationState,
    direct_hierarchy,
    instances_of,
    is_subsumed,
    realize,
    saturate,
)

__all__ = [
    "And",
    "Atomic",
    "ClassExpression",
    "Declarations",
    "DEFAULT_FACT_LIMIT",
    "EquivalentTo",
    "FRESH_PREFIX",
    "NamespaceClash",
    "NormalizedAxioms",
    "Normalizer",
    "Ontology",
    "OntologyError",
    "OntologySyntaxError",
    "Realization",
    "Reasoner",
    "ResourceLimit",
    "RoleAssertion",
    "SaturationState",
    "Some",
    "SubClassOf",
    "SubRoleOf",
    "TOP",
    "TOP_NAME",
    "Top",
    "TypeAssertion",
    "UndeclaredName",
    "UnknownName",
    "apply_abox_delta",
    "conj",
    "direct_hierarchy",
    "individual_class",
    "instances_of",
    "is_subsumed",
    "load_ontology",
    "normalize",
    "parse_ontology",
    "realize",
    "render_expr",
    "saturate",
    "serialize_ontology",
]
