"""Synthetic-ontology generator and reasoning benchmark.

The generator emits a layered class hierarchy: every class below the top
layer gets at least one parent in the layer above, and extra subsumption,
conjunction, existential, and role-hierarchy axioms are sprinkled until the
requested axiom count is reached. Keeping edges strictly upward makes the
closure predictable and the ontology trivially satisfiable; the whole thing
is seeded, so identical arguments produce byte-identical files.

The runner times parse, normalize, and saturate separately (median over
repetitions) and reports derived-fact counts plus a peak-memory estimate
computed from those counts (portable, unlike OS-level probes).
"""

from __future__ import annotations

import random
import statistics
import time

from .ontology import (
    Atomic,
    Declarations,
    Ontology,
    ResourceLimit,
    Some,
    SubClassOf,
    SubRoleOf,
    conj,
    normalize,
    parse_ontology,
    saturate,
    serialize_ontology,
)
from .ontology.model import KIND_CLASS, KIND_ROLE
from .ontology.reasoner import DEFAULT_FACT_LIMIT

LAYER_WIDTH = 40

# rough per-fact footprints (CPython set/tuple overheads), for the estimate only
_BYTES_PER_SUBSUMPTION = 90
_BYTES_PER_LINK = 210
_BYTES_PER_NAME = 120


def generate_ontology(n_axioms: int, seed: int) -> Ontology:
    """A seeded synthetic TBox with at least `n_axioms` axioms."""
    if n_axioms < 1:
        raise ValueError("n_axioms must be >= 1")
    rng = random.Random(seed)

    n_classes = max(8, round(n_axioms * 0.45))
    n_roles = max(2, min(12, n_axioms // 400 + 2))
    n_layers = max(2, (n_classes + LAYER_WIDTH - 1) // LAYER_WIDTH)

    width = len(str(n_classes - 1))
    names = [f"C{idx:0{width}d}" for idx in range(n_classes)]
    layers: list[list[str]] = [[] for _ in range(n_layers)]
    for idx, name in enumerate(names):
        layers[idx * n_layers // n_classes].append(name)
    roles = [f"r{idx}" for idx in range(n_roles)]

    decls = Declarations()
    for name in names:
        decls.declare(KIND_CLASS, name)
    for role in roles:
        decls.declare(KIND_ROLE, role)

    def upper_class(layer_idx: int) -> str:
        target_layer = rng.randrange(0, layer_idx)
        return rng.choice(layers[target_layer])

    axioms: list = []
    seen: set = set()

    def add(axiom) -> None:
        if axiom not in seen:
            seen.add(axiom)
            axioms.append(axiom)

    # backbone: every non-root class subsumes into the layer structure above it
    for layer_idx in range(1, n_layers):
        for name in layers[layer_idx]:
            add(SubClassOf(Atomic(name), Atomic(upper_class(layer_idx))))

    while len(axioms) < n_axioms:
        layer_idx = rng.randrange(1, n_layers)
        a = rng.choice(layers[layer_idx])
        kind = rng.random()
        if kind < 0.40:
            add(SubClassOf(Atomic(a), Atomic(upper_class(layer_idx))))
        elif kind < 0.60:
            b = rng.choice(layers[layer_idx])
            if a == b:
                continue
            add(
                SubClassOf(
                    conj([Atomic(a), Atomic(b)]), Atomic(upper_class(layer_idx))
                )
            )
        elif kind < 0.85:
            add(
                SubClassOf(
                    Atomic(a),
                    Some(rng.choice(roles), Atomic(upper_class(layer_idx))),
                )
            )
        elif kind < 0.97:
            add(
                SubClassOf(
                    Some(rng.choice(roles), Atomic(a)),
                    Atomic(upper_class(layer_idx)),
                )
            )
        else:
            r1, r2 = rng.sample(roles, 2)
            add(SubRoleOf(r1, r2))

    return Ontology(decls, tuple(axioms), ())


def generate_ontology_text(n_axioms: int, seed: int) -> str:
    return serialize_ontology(generate_ontology(n_axioms, seed))


def estimate_peak_bytes(fact_count: int, link_count: int, name_count: int) -> int:
    subsumptions = fact_count - link_count
    return (
        subsumptions * _BYTES_PER_SUBSUMPTION
        + link_count * _BYTES_PER_LINK
        + name_count * _BYTES_PER_NAME
    )


def run_benchmark(
    text: str,
    repetitions: int = 3,
    fact_limit: int = DEFAULT_FACT_LIMIT,
) -> dict:
    """Parse + normalize + saturate `text`, timed per phase.

    On ResourceLimit the report carries the error and facts reached so far.
    """
    samples = []
    report: dict = {"repetitions": repetitions, "samples": samples}
    for _ in range(max(1, repetitions)):
        t0 = time.perf_counter()
        ontology = parse_ontology(text)
        t1 = time.perf_counter()
        ntbox = normalize(ontology)
        t2 = time.perf_counter()
        try:
            state = saturate(ntbox, ontology.class_names, fact_limit)
        except ResourceLimit as e:
            samples.append(
                {
                    "parse_ms": (t1 - t0) * 1000,
                    "normalize_ms": (t2 - t1) * 1000,
                    "saturate_ms": None,
                }
            )
            report["error"] = "ResourceLimit"
            report["fact_limit"] = fact_limit
            report["derived_facts_at_limit"] = e.facts
            return report
        t3 = time.perf_counter()
        samples.append(
            {
                "parse_ms": (t1 - t0) * 1000,
                "normalize_ms": (t2 - t1) * 1000,
                "saturate_ms": (t3 - t2) * 1000,
            }
        )

    link_count = sum(len(pairs) for _, pairs in _iter_links(state))
    report["median"] = {
        key: statistics.median(s[key] for s in samples)
        for key in ("parse_ms", "normalize_ms", "saturate_ms")
    }
    report["classes"] = len(ontology.class_names)
    report["roles"] = len(ontology.role_names)
    report["axioms"] = len(ontology.tbox) + len(ontology.abox)
    report["normalized_axioms"] = ntbox.axiom_count
    report["derived_facts"] = state.fact_count
    report["peak_memory_estimate_bytes"] = estimate_peak_bytes(
        state.fact_count, link_count, len(state.class_names)
    )
    return report


def _iter_links(state):
    for role in state.role_names:
        yield role, state.role_links(role)
