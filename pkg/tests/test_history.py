import pytest

from ctxware.history import BadRange, HistoryRecord, HistoryStore


def rec(ts, subject="u", context="Walk", confidence=0.9, accepted=True):
    return HistoryRecord(ts, subject, context, confidence, "svc", accepted)


@pytest.fixture
def store(tmp_path):
    s = HistoryStore(tmp_path / "history.jsonl")
    yield s
    s.close()


def test_first_append_at_offset_zero(store):
    assert store.append(rec(1)) == 0


def test_second_offset_is_length_of_first_line(store):
    store.append(rec(1))
    first_line_len = store.path.stat().st_size
    assert store.append(rec(2)) == first_line_len


def test_append_then_query_returns_it_last(store):
    store.append(rec(1))
    store.append(rec(2))
    store.append(rec(3))
    out = store.query(0, 10)
    assert [r.ts for r in out] == [1, 2, 3]


def test_crash_recovery_drops_partial_line(tmp_path):
    path = tmp_path / "history.jsonl"
    s = HistoryStore(path)
    s.append(rec(1))
    s.append(rec(2))
    s.close()
    with open(path, "ab") as fh:
        fh.write(b'{"ts": 3, "subject": "u"')  # no newline: torn write
    s2 = HistoryStore(path)
    assert s2.valid_records == 2
    assert [r.ts for r in s2.query(0, 10)] == [1, 2]
    # appending after recovery lands on a clean boundary
    s2.append(rec(3))
    assert [r.ts for r in s2.query(0, 10)] == [1, 2, 3]
    s2.close()


def test_query_range_half_open(store):
    for ts in (10, 20, 30):
        store.append(rec(ts))
    assert [r.ts for r in store.query(10, 30)] == [10, 20]


def test_query_bad_range(store):
    store.append(rec(1))
    with pytest.raises(BadRange):
        store.query(5, 5)
    with pytest.raises(BadRange):
        store.query(6, 5)


def test_query_subject_filter(store):
    store.append(rec(1, subject="u"))
    store.append(rec(2, subject="v"))
    store.append(rec(3, subject="u"))
    assert [r.ts for r in store.query(0, 10, subject="u")] == [1, 3]


def test_query_limit(store):
    for ts in range(5):
        store.append(rec(ts))
    assert len(store.query(0, 10, limit=2)) == 2


def test_tail_newest_first(store):
    for ts in range(5):
        store.append(rec(ts))
    assert [r.ts for r in store.tail(2)] == [4, 3]


def test_context_sequence_collapses_duplicates(store):
    for ts, ctx in enumerate(["Walk", "Walk", "Sit", "Walk"]):
        store.append(rec(ts, context=ctx))
    assert store.context_sequence("u") == ["Walk", "Sit", "Walk"]


def test_context_sequence_rejected_only_is_empty(store):
    store.append(rec(1, accepted=False))
    store.append(rec(2, accepted=False))
    assert store.context_sequence("u") == []


def test_context_sequence_filters_subject(store):
    store.append(rec(1, subject="u", context="A"))
    store.append(rec(2, subject="v", context="B"))
    store.append(rec(3, subject="u", context="C"))
    assert store.context_sequence("u") == ["A", "C"]
    assert store.context_sequence("ghost") == []


def test_no_equal_consecutive_elements_property(store):
    import random

    rng = random.Random(0)
    for ts in range(200):
        store.append(
            rec(ts, context=rng.choice("ABC"), accepted=rng.random() < 0.8)
        )
    seq = store.context_sequence("u")
    assert all(a != b for a, b in zip(seq, seq[1:]))


def test_subjects_lists_accepted_senders(store):
    store.append(rec(1, subject="u"))
    store.append(rec(2, subject="v", accepted=False))
    store.append(rec(3, subject="w"))
    assert store.subjects() == ("u", "w")


def test_round_trip_record_fields(store):
    original = HistoryRecord(5, "u", "Walk", 0.75, "svc-1", False)
    store.append(original)
    assert store.query(0, 10) == [original]
