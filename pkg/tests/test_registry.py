import json

import pytest

from ctxware.core.registry import (
    OFFLINE,
    ONLINE,
    RegistryCorrupt,
    ServiceRegistry,
)


@pytest.fixture
def reg(tmp_path):
    return ServiceRegistry(tmp_path / "services.json")


def test_register_persists_across_reload(reg, tmp_path):
    record = reg.register("classification", "act1", ["sensor/accel"], now=1000)
    reloaded = ServiceRegistry(tmp_path / "services.json")
    loaded = reloaded.get(record.id)
    assert loaded is not None
    assert loaded.name == "act1"
    assert loaded.kind == "classification"
    assert loaded.subscriptions == frozenset(["sensor/accel"])
    assert loaded.status == OFFLINE  # statuses reset on load


def test_same_name_kind_reuses_id(reg):
    a = reg.register("classification", "act1", ["t1"], now=1)
    b = reg.register("classification", "act1", ["t2"], now=2)
    assert a.id == b.id
    assert len(reg.records()) == 1
    assert reg.get(a.id).subscriptions == frozenset(["t2"])


def test_different_kind_same_name_gets_new_id(reg):
    a = reg.register("classification", "x", [], now=1)
    b = reg.register("prediction", "x", [], now=1)
    assert a.id != b.id


def test_ids_are_128_bit_hex(reg):
    record = reg.register("app", "f", [], now=1)
    assert len(record.id) == 32
    int(record.id, 16)


def test_file_not_rewritten_by_liveness_changes(reg, tmp_path):
    reg.register("app", "f", [], now=1)
    path = tmp_path / "services.json"
    before = path.read_bytes()
    reg.touch(reg.records()[0].id, now=50_000)
    reg.tick(now=10**9, interval_ms=10, misses=1)
    assert path.read_bytes() == before


def test_tick_flips_silent_services_offline(reg):
    record = reg.register("sensing", "s", [], now=0)
    assert record.status == ONLINE
    flipped = reg.tick(now=15_000, interval_ms=5000, misses=3)
    assert flipped == []  # exactly at budget: 15000 - 0 is not > 15000
    flipped = reg.tick(now=15_001, interval_ms=5000, misses=3)
    assert [r.id for r in flipped] == [record.id]
    assert reg.get(record.id).status == OFFLINE


def test_touch_brings_service_back_online(reg):
    record = reg.register("sensing", "s", [], now=0)
    reg.tick(now=100_000, interval_ms=5000, misses=3)
    assert reg.get(record.id).status == OFFLINE
    transition = reg.touch(record.id, now=100_001)
    assert transition == (OFFLINE, ONLINE)
    assert reg.touch(record.id, now=100_002) is None  # already online


def test_heartbeat_within_budget_stays_online(reg):
    record = reg.register("sensing", "s", [], now=0)
    reg.touch(record.id, now=1000)
    assert reg.tick(now=1000 + 4999, interval_ms=5000, misses=3) == []
    assert reg.get(record.id).status == ONLINE


def test_remove(reg):
    record = reg.register("app", "f", [], now=1)
    assert reg.remove(record.id) is True
    assert reg.get(record.id) is None
    assert reg.remove(record.id) is False


def test_registry_survives_restart_sequence(tmp_path):
    path = tmp_path / "services.json"
    reg = ServiceRegistry(path)
    reg.register("sensing", "replay", [], now=1)
    reg.register("classification", "act", ["sensor/accel"], now=2)
    removed = reg.register("app", "tmp", [], now=3)
    reg.remove(removed.id)
    before = {r.id: r.to_json() for r in reg.records()}

    reloaded = ServiceRegistry(path)
    after = {r.id: r.to_json() for r in reloaded.records()}
    for record in after.values():
        assert record["status"] == OFFLINE
        record["status"] = None
    for record in before.values():
        record["status"] = None
    assert after == before


def test_corrupt_registry_refuses_to_start(tmp_path):
    path = tmp_path / "services.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(RegistryCorrupt) as exc:
        ServiceRegistry(path)
    assert "Recovery" in str(exc.value)


def test_corrupt_registry_duplicate_ids(tmp_path):
    path = tmp_path / "services.json"
    record = {
        "id": "x" * 32,
        "kind": "app",
        "name": "a",
        "subscriptions": [],
        "last_heartbeat": 0,
        "status": "online",
    }
    path.write_text(json.dumps({"services": [record, record]}), encoding="utf-8")
    with pytest.raises(RegistryCorrupt):
        ServiceRegistry(path)


def test_atomic_write_leaves_no_tmp_file(reg, tmp_path):
    reg.register("app", "f", [], now=1)
    leftovers = [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]
    assert leftovers == []


def test_online_subscribers(reg):
    a = reg.register("classification", "a", ["sensor/accel"], now=0)
    reg.register("classification", "b", ["sensor/gyro"], now=0)
    c = reg.register("app", "c", ["sensor/accel"], now=0)
    reg.tick(now=10**9, interval_ms=1, misses=1)  # everyone offline
    assert reg.online_subscribers("sensor/accel") == []
    reg.touch(a.id, now=10**9)
    reg.touch(c.id, now=10**9)
    assert {r.id for r in reg.online_subscribers("sensor/accel")} == {a.id, c.id}
