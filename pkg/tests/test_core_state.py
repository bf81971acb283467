import pytest

from ctxware.core.state import (
    ClearedEvent,
    CoreState,
    DerivedEvent,
    HistoryUnavailable,
    REJECT_BELOW_THRESHOLD,
    REJECT_UNKNOWN_NAME,
)
from ctxware.history import HistoryStore
from ctxware.ontology import UnknownName

from oracle_reasoner import NaiveReasoner


@pytest.fixture
def store(tmp_path):
    s = HistoryStore(tmp_path / "history.jsonl")
    yield s
    s.close()


@pytest.fixture
def state(kitchen_core_ontology, store):
    return CoreState(
        ontology=kitchen_core_ontology,
        history=store,
        confidence_threshold=0.5,
        context_ttl_ms=60_000,
        transient_classes=frozenset({"LocatedKitchen", "ObservesCoffeeMachineOn"}),
    )


def test_below_threshold_rejected_but_logged(state, store):
    outcome = state.ingest("u", "LocatedKitchen", 0.3, "svc", now=1000)
    assert not outcome.accepted
    assert outcome.reason == REJECT_BELOW_THRESHOLD
    records = store.query(0, 10_000)
    assert len(records) == 1
    assert records[0].accepted is False
    # ABox untouched: nothing derived, nothing current
    assert "LocatedKitchen" not in state.realization.types_of("u")
    assert state.current == {}


def test_threshold_equality_accepts(state):
    assert state.ingest("u", "LocatedKitchen", 0.5, "svc", now=1).accepted


def test_unknown_names_rejected_without_history(state, store):
    for subject, context in (("ghost", "LocatedKitchen"), ("u", "NoSuchClass")):
        outcome = state.ingest(subject, context, 0.9, "svc", now=1)
        assert not outcome.accepted
        assert outcome.reason == REJECT_UNKNOWN_NAME
    assert store.query(0, 10) == []


def test_kitchen_scenario_derives_making_coffee(state):
    first = state.ingest("u", "LocatedKitchen", 0.9, "svc", now=1000)
    assert first.accepted
    assert first.derived == ()  # nothing follows from location alone
    second = state.ingest("u", "ObservesCoffeeMachineOn", 0.8, "svc", now=2000)
    assert second.accepted
    assert second.derived == (DerivedEvent("u", "MakingCoffee", 0.8),)
    assert "MakingCoffee" in state.realization.types_of("u")


def test_derived_confidence_is_min_of_contributors(state):
    state.ingest("u", "LocatedKitchen", 0.7, "svc", now=1)
    outcome = state.ingest("u", "ObservesCoffeeMachineOn", 0.95, "svc", now=2)
    assert outcome.derived[0].confidence == pytest.approx(0.7)


def test_duplicate_ingest_derives_nothing_new(state):
    state.ingest("u", "LocatedKitchen", 0.9, "svc", now=1)
    state.ingest("u", "ObservesCoffeeMachineOn", 0.8, "svc", now=2)
    again = state.ingest("u", "ObservesCoffeeMachineOn", 0.8, "svc", now=3)
    assert again.accepted
    assert again.derived == ()


def test_latest_wins_single_current_assertion(state):
    state.ingest("u", "LocatedKitchen", 0.6, "svc", now=1)
    state.ingest("u", "LocatedKitchen", 0.9, "svc2", now=2)
    assert len(state.current) == 1
    current = state.current[("u", "LocatedKitchen")]
    assert current.confidence == 0.9
    assert current.ts == 2
    assert current.source == "svc2"


def test_history_records_every_event_in_arrival_order(state, store):
    state.ingest("u", "LocatedKitchen", 0.9, "a", now=1)
    state.ingest("u", "LocatedKitchen", 0.2, "b", now=2)  # rejected
    state.ingest("u", "ObservesCoffeeMachineOn", 0.8, "c", now=3)
    records = store.query(0, 10)
    assert [(r.ts, r.accepted) for r in records] == [(1, True), (2, False), (3, True)]


def test_derived_delta_matches_standalone_oracle(state, kitchen_core_ontology):
    """Publications are exactly the realization delta, per the naive oracle."""
    from ctxware.ontology.model import Atomic, TypeAssertion

    state.ingest("u", "LocatedKitchen", 0.9, "svc", now=1)
    outcome = state.ingest("u", "ObservesCoffeeMachineOn", 0.8, "svc", now=2)

    before = NaiveReasoner(
        kitchen_core_ontology.apply_abox_delta(
            add=[TypeAssertion("u", Atomic("LocatedKitchen"))]
        )
    ).realization()
    after = NaiveReasoner(
        kitchen_core_ontology.apply_abox_delta(
            add=[
                TypeAssertion("u", Atomic("LocatedKitchen")),
                TypeAssertion("u", Atomic("ObservesCoffeeMachineOn")),
            ]
        )
    ).realization()
    expected = {
        (ind, cls)
        for ind in after
        for cls in after[ind] - before[ind]
        if (ind, cls) != ("u", "ObservesCoffeeMachineOn")
    }
    assert {(d.subject, d.context) for d in outcome.derived} == expected


def test_expiry_clears_derived_context(state):
    state.ingest("u", "LocatedKitchen", 0.9, "svc", now=0)
    state.ingest("u", "ObservesCoffeeMachineOn", 0.8, "svc", now=0)
    assert state.expire(now=60_000) == ()  # exactly at TTL: not expired yet
    cleared = state.expire(now=60_001)
    assert cleared == (ClearedEvent("u", "MakingCoffee"),)
    assert state.current == {}
    assert "MakingCoffee" not in state.realization.types_of("u")
    assert "Person" in state.realization.types_of("u")  # baseline survives


def test_expiry_only_touches_transient_classes(kitchen_core_ontology, store):
    state = CoreState(
        ontology=kitchen_core_ontology,
        history=store,
        context_ttl_ms=10,
        transient_classes=frozenset({"LocatedKitchen"}),
    )
    state.ingest("u", "LocatedKitchen", 0.9, "svc", now=0)
    state.ingest("u", "ObservesCoffeeMachineOn", 0.8, "svc", now=0)
    state.expire(now=1_000)
    assert ("u", "LocatedKitchen") not in state.current
    assert ("u", "ObservesCoffeeMachineOn") in state.current
    assert "ObservesCoffeeMachineOn" in state.realization.types_of("u")


def test_refresh_restarts_ttl(state):
    state.ingest("u", "LocatedKitchen", 0.9, "svc", now=0)
    state.ingest("u", "LocatedKitchen", 0.9, "svc", now=50_000)
    assert state.expire(now=60_001) == ()  # refreshed at 50s; not yet stale
    assert ("u", "LocatedKitchen") in state.current


def test_expiry_no_expired_is_noop(state):
    before = state.realization
    assert state.expire(now=10) == ()
    assert state.realization is before  # no recompute happened


def test_expiry_keeps_baseline_assertions(kitchen_ontology, store):
    # the full fixture asserts the role facts; an event on the same class as a
    # baseline assertion must not remove the baseline on expiry
    state = CoreState(
        ontology=kitchen_ontology,
        history=store,
        context_ttl_ms=10,
        transient_classes=frozenset({"Person"}),
    )
    state.ingest("u", "Person", 0.9, "svc", now=0)
    state.expire(now=1_000)
    assert "Person" in state.realization.types_of("u")


def test_query_current(state):
    state.ingest("u", "LocatedKitchen", 0.9, "svc", now=1)
    state.ingest("u", "ObservesCoffeeMachineOn", 0.8, "svc", now=2)
    contexts, events = state.query_current("u")
    assert "MakingCoffee" in contexts
    assert {e.context for e in events} == {"LocatedKitchen", "ObservesCoffeeMachineOn"}
    with pytest.raises(UnknownName):
        state.query_current("ghost")


def test_query_types_and_instances(state):
    state.ingest("u", "LocatedKitchen", 0.9, "svc", now=1)
    state.ingest("u", "ObservesCoffeeMachineOn", 0.8, "svc", now=2)
    assert "MakingCoffee" in state.query_types("u")
    assert state.query_instances("MakingCoffee") == ["u"]
    with pytest.raises(UnknownName):
        state.query_types("ghost")
    with pytest.raises(UnknownName):
        state.query_instances("NoSuchClass")


def test_query_history_reverse_time(state):
    for i, ctx in enumerate(
        ["LocatedKitchen", "ObservesCoffeeMachineOn", "LocatedKitchen"]
    ):
        state.ingest("u", ctx, 0.9, "svc", now=i + 1)
    records = state.query_history(None, None, None, limit=2)
    assert [r.ts for r in records] == [3, 2]


def test_broken_history_blocks_ingest(kitchen_core_ontology, tmp_path):
    class FailingStore:
        def append(self, record):
            raise OSError("disk gone")

    state = CoreState(ontology=kitchen_core_ontology, history=FailingStore())
    with pytest.raises(HistoryUnavailable):
        state.ingest("u", "LocatedKitchen", 0.9, "svc", now=1)
    # still refusing on the next attempt, without retrying the disk
    with pytest.raises(HistoryUnavailable):
        state.ingest("u", "LocatedKitchen", 0.9, "svc", now=2)
