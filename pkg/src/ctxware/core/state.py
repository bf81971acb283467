"""The core's context state machine, free of any socket concerns.

Holds the loaded ontology, the current-assertion table, and the latest
realization. Every accepted event becomes a crisp type assertion; after each
ABox change the realization is recomputed and the difference decides what is
published. All mutation happens through one logical writer (the server's
event loop); reads serve from the latest immutable realization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..history import HistoryRecord, HistoryStore
from ..ontology import (
    Atomic,
    Ontology,
    Realization,
    Reasoner,
    TypeAssertion,
    UnknownName,
)
from ..ontology.model import KIND_CLASS, KIND_INDIVIDUAL

log = logging.getLogger(__name__)

REASONER_SOURCE = "reasoner"

REJECT_BELOW_THRESHOLD = "BelowThreshold"
REJECT_UNKNOWN_NAME = "UnknownName"


class HistoryUnavailable(Exception):
    """The history log failed; ingests are refused until the core restarts."""


@dataclass(frozen=True)
class DerivedEvent:
    subject: str
    context: str
    confidence: float


@dataclass(frozen=True)
class ClearedEvent:
    subject: str
    context: str


@dataclass(frozen=True)
class IngestOutcome:
    accepted: bool
    reason: str | None = None
    derived: tuple[DerivedEvent, ...] = ()


@dataclass
class CurrentContext:
    subject: str
    context: str
    confidence: float
    ts: int  # core ingest clock
    source: str


@dataclass
class CoreState:
    ontology: Ontology
    history: HistoryStore | None
    confidence_threshold: float = 0.5
    context_ttl_ms: int = 300_000
    transient_classes: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        self.reasoner = Reasoner(self.ontology)
        self.base_abox = set(self.ontology.abox)
        self.abox: list = list(self.ontology.abox)
        self.current: dict[tuple[str, str], CurrentContext] = {}
        self.realization: Realization = self.reasoner.realize(self.abox)
        self.sensor_drops = 0
        self._history_broken = False

    # --- ingest ------------------------------------------------------------

    def _append_history(self, record: HistoryRecord) -> None:
        if self.history is None:
            return
        if self._history_broken:
            raise HistoryUnavailable("history log failed earlier; restart the core")
        try:
            self.history.append(record)
        except OSError as e:
            self._history_broken = True
            log.error("history append failed: %s; refusing further ingests", e)
            raise HistoryUnavailable(str(e)) from e

    def _derived_confidence(self, subject: str) -> float:
        own = [c.confidence for c in self.current.values() if c.subject == subject]
        if own:
            return min(own)
        everyone = [c.confidence for c in self.current.values()]
        return min(everyone) if everyone else 1.0

    def ingest(
        self, subject: str, context: str, confidence: float, source: str, now: int
    ) -> IngestOutcome:
        decl = self.ontology.declarations
        if not decl.has(KIND_INDIVIDUAL, subject) or not decl.has(KIND_CLASS, context):
            return IngestOutcome(False, REJECT_UNKNOWN_NAME)

        accepted = confidence >= self.confidence_threshold
        self._append_history(
            HistoryRecord(
                ts=now,
                subject=subject,
                context=context,
                confidence=confidence,
                source=source,
                accepted=accepted,
            )
        )
        if not accepted:
            return IngestOutcome(False, REJECT_BELOW_THRESHOLD)

        # latest wins per (subject, context); a refresh also restarts the TTL
        self.current[(subject, context)] = CurrentContext(
            subject, context, confidence, now, source
        )
        assertion = TypeAssertion(subject, Atomic(context))
        if assertion in self.abox:
            return IngestOutcome(True, None, ())

        before = self.realization
        self.abox.append(assertion)
        after = self.reasoner.realize(self.abox)
        self.realization = after

        derived = []
        for ind in after.types:
            gained = after.types[ind] - before.types[ind]
            for cls in sorted(gained):
                if (ind, cls) == (subject, context):
                    continue  # the asserted pair itself is not "derived"
                derived.append(
                    DerivedEvent(ind, cls, self._derived_confidence(ind))
                )
        return IngestOutcome(True, None, tuple(derived))

    # --- expiry ------------------------------------------------------------

    def expire(self, now: int) -> tuple[ClearedEvent, ...]:
        """Retract transient assertions past the TTL; returns what cleared."""
        expired = [
            cc
            for cc in self.current.values()
            if cc.context in self.transient_classes and now - cc.ts > self.context_ttl_ms
        ]
        if not expired:
            return ()
        expired_pairs = set()
        for cc in expired:
            pair = (cc.subject, cc.context)
            expired_pairs.add(pair)
            del self.current[pair]
            assertion = TypeAssertion(cc.subject, Atomic(cc.context))
            if assertion not in self.base_abox and assertion in self.abox:
                self.abox.remove(assertion)

        before = self.realization
        after = self.reasoner.realize(self.abox)
        self.realization = after

        cleared = []
        for ind in before.types:
            lost = before.types[ind] - after.types[ind]
            for cls in sorted(lost):
                if (ind, cls) in expired_pairs:
                    continue  # the expired assertion itself was not derived
                cleared.append(ClearedEvent(ind, cls))
        return tuple(cleared)

    # --- queries -----------------------------------------------------------

    def query_types(self, individual: str) -> list[str]:
        return sorted(self.realization.types_of(individual))

    def query_instances(self, cls: str) -> list[str]:
        return list(self.realization.instances_of(cls))

    def query_current(self, subject: str) -> tuple[list[str], list[CurrentContext]]:
        if not self.ontology.declarations.has(KIND_INDIVIDUAL, subject):
            raise UnknownName(subject, KIND_INDIVIDUAL)
        contexts = sorted(self.realization.types_of(subject))
        events = sorted(
            (c for c in self.current.values() if c.subject == subject),
            key=lambda c: (c.ts, c.context),
        )
        return contexts, events

    def query_history(
        self,
        t0: int | None,
        t1: int | None,
        subject: str | None,
        limit: int | None,
    ) -> list[HistoryRecord]:
        """Newest-first history slice; a plain limit query reads the tail."""
        if self.history is None:
            return []
        if t0 is None and t1 is None:
            return self.history.tail(limit if limit is not None else 100, subject)
        lo = t0 if t0 is not None else 0
        hi = t1 if t1 is not None else (1 << 62)
        records = self.history.query(lo, hi, subject=subject)
        if limit is not None:
            records = records[-limit:]
        return list(reversed(records))
