"""Append-only context history on the local file system (JSON lines).

One record per line with exactly the fields of HistoryRecord. File order is
arrival order; timestamps are the core's ingest clock. A partial final line
(crash during write) is dropped on open with a warning.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterator

log = logging.getLogger(__name__)

SIZE_WARN_BYTES = 100 * 1024 * 1024


class HistoryError(Exception):
    pass


class BadRange(HistoryError):
    def __init__(self, t0: int, t1: int):
        super().__init__(f"empty or inverted range [{t0}, {t1})")


@dataclass(frozen=True)
class HistoryRecord:
    ts: int
    subject: str
    context: str
    confidence: float
    source: str
    accepted: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "HistoryRecord":
        d = json.loads(line)
        return cls(
            ts=int(d["ts"]),
            subject=d["subject"],
            context=d["context"],
            confidence=float(d["confidence"]),
            source=d["source"],
            accepted=bool(d["accepted"]),
        )


class HistoryStore:
    """Single-writer append log with time-range queries.

    Readers re-scan the file; at the scale of a context history (thousands of
    lines) that beats maintaining an index. Concurrent readers never observe a
    partial line because appends are flushed whole.
    """

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self.valid_records = self._recover()
        self._fh = open(self.path, "a", encoding="utf-8")
        self._warned_size = False

    def _recover(self) -> int:
        """Drop a truncated final line left by a crash; return valid count."""
        if not self.path.exists():
            self.path.parent.mkdir(parents=True, exist_ok=True)
            return 0
        data = self.path.read_bytes()
        if not data:
            return 0
        keep = len(data)
        if not data.endswith(b"\n"):
            nl = data.rfind(b"\n")
            keep = nl + 1 if nl >= 0 else 0
            log.warning(
                "history %s: dropping %d bytes of truncated final line",
                self.path,
                len(data) - keep,
            )
            with open(self.path, "r+b") as fh:
                fh.truncate(keep)
        return data[:keep].count(b"\n")

    def append(self, record: HistoryRecord) -> int:
        """Append one record; returns the byte offset it was written at."""
        offset = self._fh.tell()
        self._fh.write(record.to_json() + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self.valid_records += 1
        if offset > SIZE_WARN_BYTES and not self._warned_size:
            self._warned_size = True
            log.warning("history %s exceeds %d bytes", self.path, SIZE_WARN_BYTES)
        return offset

    def _iter_records(self) -> Iterator[HistoryRecord]:
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield HistoryRecord.from_json(line)

    def query(
        self,
        t0: int,
        t1: int,
        subject: str | None = None,
        limit: int | None = None,
    ) -> list[HistoryRecord]:
        """Records with t0 <= ts < t1 in arrival order, at most `limit`."""
        if t1 <= t0:
            raise BadRange(t0, t1)
        out: list[HistoryRecord] = []
        for rec in self._iter_records():
            if t0 <= rec.ts < t1 and (subject is None or rec.subject == subject):
                out.append(rec)
                if limit is not None and len(out) >= limit:
                    break
        return out

    def tail(self, limit: int, subject: str | None = None) -> list[HistoryRecord]:
        """The most recent `limit` records, newest first."""
        matching = [
            r for r in self._iter_records() if subject is None or r.subject == subject
        ]
        return list(reversed(matching[-limit:])) if limit > 0 else []

    def context_sequence(self, subject: str) -> list[str]:
        """Accepted contexts for `subject` in time order, with consecutive
        duplicates collapsed (prediction cares about transitions)."""
        out: list[str] = []
        for rec in self._iter_records():
            if rec.accepted and rec.subject == subject:
                if not out or out[-1] != rec.context:
                    out.append(rec.context)
        return out

    def subjects(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for rec in self._iter_records():
            if rec.accepted:
                seen.setdefault(rec.subject, None)
        return tuple(seen)

    def close(self) -> None:
        self._fh.close()
