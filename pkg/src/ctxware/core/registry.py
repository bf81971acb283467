"""Persisted repository of registered micro-services.

A single JSON document written atomically (temp file + rename). Liveness
fields (status, last_heartbeat) are runtime state: the file is only rewritten
when the set of services or their subscriptions change, and every record
loads as offline until its service is heard from again.
"""

from __future__ import annotations

import json
import logging
import os
import secrets
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

log = logging.getLogger(__name__)

ONLINE = "online"
OFFLINE = "offline"


class RegistryCorrupt(Exception):
    def __init__(self, path: Path, reason: str):
        self.path = path
        super().__init__(
            f"registry {path} is corrupt ({reason}); refusing to start. "
            f"Recovery: inspect or delete the file and restart; services will "
            f"re-register on their next hello."
        )


@dataclass
class ServiceRecord:
    id: str
    kind: str
    name: str
    subscriptions: frozenset[str] = field(default_factory=frozenset)
    last_heartbeat: int = 0
    status: str = OFFLINE

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "name": self.name,
            "subscriptions": sorted(self.subscriptions),
            "last_heartbeat": self.last_heartbeat,
            "status": self.status,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ServiceRecord":
        return cls(
            id=d["id"],
            kind=d["kind"],
            name=d["name"],
            subscriptions=frozenset(d.get("subscriptions", [])),
            last_heartbeat=int(d.get("last_heartbeat", 0)),
            status=d.get("status", OFFLINE),
        )


class ServiceRegistry:
    """In-memory registry with optional JSON persistence."""

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else None
        self._by_id: dict[str, ServiceRecord] = {}
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        assert self.path is not None
        try:
            doc = json.loads(self.path.read_text(encoding="utf-8"))
            records = [ServiceRecord.from_json(r) for r in doc["services"]]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise RegistryCorrupt(self.path, str(e)) from e
        ids = [r.id for r in records]
        if len(set(ids)) != len(ids):
            raise RegistryCorrupt(self.path, "duplicate service ids")
        # everything is offline until we hear from it
        self._by_id = {r.id: replace(r, status=OFFLINE) for r in records}
        log.info("registry: loaded %d service record(s), all offline", len(records))

    def save(self) -> None:
        if self.path is None:
            return
        doc = {"services": [r.to_json() for r in self.records()]}
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)

    # --- operations ------------------------------------------------------

    def records(self) -> list[ServiceRecord]:
        return list(self._by_id.values())

    def get(self, service_id: str) -> ServiceRecord | None:
        return self._by_id.get(service_id)

    def find(self, kind: str, name: str) -> ServiceRecord | None:
        for r in self._by_id.values():
            if r.kind == kind and r.name == name:
                return r
        return None

    def register(
        self, kind: str, name: str, subscriptions: Iterable[str], now: int
    ) -> ServiceRecord:
        """Create or update a record; the same kind+name keeps its id."""
        record = self.find(kind, name)
        if record is None:
            record = ServiceRecord(
                id=secrets.token_hex(16),
                kind=kind,
                name=name,
                subscriptions=frozenset(subscriptions),
                last_heartbeat=now,
                status=ONLINE,
            )
            self._by_id[record.id] = record
        else:
            record.subscriptions = frozenset(subscriptions)
            record.last_heartbeat = now
            record.status = ONLINE
        self.save()
        return record

    def remove(self, service_id: str) -> bool:
        if service_id in self._by_id:
            del self._by_id[service_id]
            self.save()
            return True
        return False

    def add_subscriptions(self, service_id: str, topics: Iterable[str]) -> frozenset[str]:
        record = self._by_id[service_id]
        record.subscriptions = record.subscriptions | frozenset(topics)
        self.save()
        return record.subscriptions

    def touch(self, service_id: str, now: int) -> tuple[str, str] | None:
        """Record liveness; returns (old, new) when the status flipped."""
        record = self._by_id.get(service_id)
        if record is None:
            return None
        record.last_heartbeat = now
        if record.status != ONLINE:
            record.status = ONLINE
            return (OFFLINE, ONLINE)
        return None

    def tick(self, now: int, interval_ms: int, misses: int) -> list[ServiceRecord]:
        """Flip services past the miss budget to offline; returns them."""
        budget = interval_ms * misses
        flipped = []
        for record in self._by_id.values():
            if record.status == ONLINE and now - record.last_heartbeat > budget:
                record.status = OFFLINE
                flipped.append(record)
        return flipped

    def online_subscribers(self, topic: str) -> list[ServiceRecord]:
        return [
            r
            for r in self._by_id.values()
            if r.status == ONLINE and topic in r.subscriptions
        ]
