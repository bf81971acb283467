"""Prediction micro-service: next-context ranking via longest-suffix back-off.

Training walks the context sequence once and counts, for every position and
every order j in [0, k], the pair (previous j contexts, next context). A
query answers from the longest suffix of the recent history that has counts,
falling back all the way to the empty suffix (unigram frequencies). Raw
relative frequencies, no smoothing: deterministic and exactly checkable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from ..history import HistoryStore
from .client import ConnectionLost, CoreClient

log = logging.getLogger(__name__)

DEFAULT_K = 3


class EmptyModel(Exception):
    pass


@dataclass
class PredictionModel:
    k: int = DEFAULT_K
    counts: dict[tuple[str, ...], dict[str, int]] = field(default_factory=dict)
    alphabet: set[str] = field(default_factory=set)

    def is_empty(self) -> bool:
        return not self.counts

    def _bump(self, suffix: tuple[str, ...], nxt: str) -> None:
        bucket = self.counts.setdefault(suffix, {})
        bucket[nxt] = bucket.get(nxt, 0) + 1

    def update(self, observed: str, recent: Sequence[str]) -> None:
        """Count `observed` after `recent`; equivalent to retraining on the
        sequence extended by one element."""
        recent = tuple(recent)
        self.alphabet.add(observed)
        for j in range(0, min(self.k, len(recent)) + 1):
            suffix = recent[len(recent) - j :]
            self._bump(suffix, observed)

    def predict(self, recent: Sequence[str]) -> list[tuple[str, float]]:
        """Ranked (context, probability), descending probability then lexicographic."""
        if self.is_empty():
            raise EmptyModel("no contexts observed yet")
        recent = tuple(recent)
        for j in range(min(self.k, len(recent)), -1, -1):
            suffix = recent[len(recent) - j :]
            bucket = self.counts.get(suffix)
            if bucket:
                break
        total = sum(bucket.values())
        ranked = sorted(bucket.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(name, count / total) for name, count in ranked]


def train(sequence: Sequence[str], k: int = DEFAULT_K) -> PredictionModel:
    if k < 1:
        raise ValueError("k must be >= 1")
    model = PredictionModel(k=k)
    seq = list(sequence)
    for i, nxt in enumerate(seq):
        model.update(nxt, seq[:i])
    return model


def update(
    model: PredictionModel, observed: str, recent: Sequence[str]
) -> PredictionModel:
    model.update(observed, recent)
    return model


def _collapse_append(recent: list[str], context: str, k: int) -> None:
    """Track the live tail the same way context_sequence collapses duplicates."""
    if recent and recent[-1] == context:
        return
    recent.append(context)
    del recent[: max(0, len(recent) - (k + 1))]


def run_prediction_service(
    core: tuple[str, int],
    history_path,
    k: int = DEFAULT_K,
    name: str = "context-predictor",
    max_requests: int | None = None,
) -> int:
    """Train per-subject models from the history, keep them current from live
    accepted contexts, and answer forwarded predict requests."""
    store = HistoryStore(history_path)
    models: dict[str, PredictionModel] = {}
    recents: dict[str, list[str]] = {}
    for subject in store.subjects():
        seq = store.context_sequence(subject)
        models[subject] = train(seq, k)
        recents[subject] = seq[-(k + 1) :]
    store.close()
    log.info("predictor: trained %d subject model(s)", len(models))

    client = CoreClient(*core)
    answered = 0
    try:
        client.hello("prediction", name, ["context/accepted"])
        while max_requests is None or answered < max_requests:
            env = client.pump(0.2)
            if env is None:
                continue
            if env["type"] == "context":
                payload = env["payload"]
                subject = payload["subject"]
                model = models.setdefault(subject, PredictionModel(k=k))
                recent = recents.setdefault(subject, [])
                if not recent or recent[-1] != payload["context"]:
                    model.update(payload["context"], tuple(recent))
                _collapse_append(recent, payload["context"], k)
            elif env["type"] == "predict":
                subject = env["payload"]["subject"]
                model = models.get(subject)
                try:
                    if model is None:
                        raise EmptyModel(f"no history for subject {subject!r}")
                    ranking = model.predict(tuple(recents.get(subject, ())))
                    client.send(
                        "prediction",
                        {
                            "re": env["msg_id"],
                            "subject": subject,
                            "ranking": [[c, p] for c, p in ranking],
                        },
                    )
                except EmptyModel as e:
                    client.send(
                        "error",
                        {"code": "EMPTY_MODEL", "detail": str(e), "re": env["msg_id"]},
                    )
                answered += 1
    except ConnectionLost:
        log.info("core connection closed; answered %d request(s)", answered)
    finally:
        client.close()
    return answered
