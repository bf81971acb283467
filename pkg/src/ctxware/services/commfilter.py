"""Context-based communication filter: block or allow calls/sms/email by the
user's currently derived contexts.

Rules live in a JSON file; each has a comm type (or `any`), a triggering
context class, an action, and a unique priority (lower number wins). With no
matching rule the decision is allow: failing open keeps communication alive
when the core or the context feed is down.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

from .client import ConnectionLost, CoreClient

log = logging.getLogger(__name__)

COMM_TYPES = ("call", "sms", "email")
ACTIONS = ("block", "allow")


class RulesError(Exception):
    pass


@dataclass(frozen=True)
class FilterRule:
    comm_type: str  # call | sms | email | any
    context: str
    action: str  # block | allow
    priority: int


@dataclass(frozen=True)
class CommEvent:
    comm_type: str
    sender: str
    ts: int


@dataclass(frozen=True)
class Decision:
    action: str
    matched_rule: FilterRule | None
    explanation: str


def load_rules(path: str | Path) -> list[FilterRule]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    rules = []
    for i, entry in enumerate(doc.get("rules", [])):
        try:
            rule = FilterRule(
                comm_type=entry["comm_type"],
                context=entry["context"],
                action=entry["action"],
                priority=int(entry["priority"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise RulesError(f"rule {i}: {e}") from None
        if rule.comm_type not in COMM_TYPES + ("any",):
            raise RulesError(f"rule {i}: bad comm_type {rule.comm_type!r}")
        if rule.action not in ACTIONS:
            raise RulesError(f"rule {i}: bad action {rule.action!r}")
        rules.append(rule)
    priorities = [r.priority for r in rules]
    if len(set(priorities)) != len(priorities):
        raise RulesError("rule priorities must be unique")
    return rules


def evaluate(
    rules: list[FilterRule], contexts: set[str], event: CommEvent
) -> Decision:
    """Among rules whose comm type and context both match, the lowest priority
    number decides; no match means allow."""
    candidates = [
        r
        for r in rules
        if r.comm_type in (event.comm_type, "any") and r.context in contexts
    ]
    if not candidates:
        return Decision("allow", None, "no rule matched; default allow")
    winner = min(candidates, key=lambda r: r.priority)
    return Decision(
        winner.action,
        winner,
        f"rule priority {winner.priority} ({winner.comm_type}/{winner.context}) "
        f"-> {winner.action}; context {winner.context} is current",
    )


def load_scenario(path: str | Path) -> list[tuple[int, str, str]]:
    """Scripted comm events: `t_offset_ms,comm_type,sender` rows."""
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 3:
                raise RulesError(f"scenario line {line_no}: need t_offset_ms,comm_type,sender")
            try:
                offset = int(row[0])
            except ValueError:
                raise RulesError(f"scenario line {line_no}: bad offset {row[0]!r}") from None
            comm_type = row[1].strip()
            if comm_type not in COMM_TYPES:
                raise RulesError(f"scenario line {line_no}: bad comm_type {comm_type!r}")
            events.append((offset, comm_type, row[2].strip()))
    events.sort(key=lambda e: e[0])
    return events


class ContextTracker:
    """Current derived contexts, fed from context-derived / context-cleared."""

    def __init__(self, subject: str | None = None):
        self.subject = subject
        self._pairs: set[tuple[str, str]] = set()

    def observe(self, envelope: dict) -> None:
        payload = envelope["payload"]
        if envelope["type"] == "context-derived":
            self._pairs.add((payload["subject"], payload["context"]))
        elif envelope["type"] == "context-cleared":
            self._pairs.discard((payload["subject"], payload["context"]))

    def contexts(self) -> set[str]:
        return {
            ctx
            for subj, ctx in self._pairs
            if self.subject is None or subj == self.subject
        }


def run_filter_service(
    core: tuple[str, int],
    rules: list[FilterRule],
    scenario: list[tuple[int, str, str]],
    subject: str | None = None,
    decision_log=None,
    name: str = "comm-filter",
    settle_ms: int = 0,
) -> list[Decision]:
    """Register as an app, track derived contexts, and evaluate the scripted
    comm events at their offsets. Decisions are returned and optionally logged
    as JSON lines. settle_ms shifts the scenario start to let the context feed
    warm up."""
    client = CoreClient(*core)
    tracker = ContextTracker(subject)
    decisions: list[Decision] = []
    try:
        client.hello("app", name, ["context/derived", "context/cleared"])
        start = time.monotonic() + settle_ms / 1000.0
        pending = list(scenario)
        while pending:
            due = start + pending[0][0] / 1000.0
            env = client.pump(min(max(due - time.monotonic(), 0.0), 0.2))
            if env is not None:
                tracker.observe(env)
            if time.monotonic() < due:
                continue
            offset, comm_type, sender = pending.pop(0)
            event = CommEvent(comm_type, sender, int(time.time() * 1000))
            decision = evaluate(rules, tracker.contexts(), event)
            decisions.append(decision)
            if decision_log is not None:
                decision_log.write(
                    json.dumps(
                        {
                            "ts": event.ts,
                            "comm_type": comm_type,
                            "sender": sender,
                            "action": decision.action,
                            "rule_priority": (
                                decision.matched_rule.priority
                                if decision.matched_rule
                                else None
                            ),
                            "explanation": decision.explanation,
                            "contexts": sorted(tracker.contexts()),
                        },
                        separators=(",", ":"),
                    )
                    + "\n"
                )
                decision_log.flush()
    except ConnectionLost:
        log.error("core connection lost after %d decision(s)", len(decisions))
    finally:
        client.close()
    return decisions
