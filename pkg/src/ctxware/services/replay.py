"""Sensing micro-service: replays recorded sensor traces into the core.

Trace CSV schema: `t_offset_ms,topic,v1[,v2,...]`. Values are numbers;
symbolic smart-home event names are mapped to numeric codes through a legend
file (`name,code` per line) so the wire stays purely numeric. Rows must be
sorted by offset. Replay at speed s publishes row i at wall time
t_offset_ms / s after start; speed=inf publishes back to back.

Replayed sensor payloads carry the trace offset as their `ts`, which keeps
repeated replays byte-identical apart from envelope ts/msg_id.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass
from pathlib import Path

from .client import ConnectionLost, CoreClient

log = logging.getLogger(__name__)


class TraceError(Exception):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ParseError(TraceError):
    pass


class UnsortedTrace(TraceError):
    def __init__(self, line: int):
        super().__init__(line, "t_offset_ms decreases")


@dataclass(frozen=True)
class TraceRow:
    t_offset_ms: int
    topic: str
    values: tuple[float, ...]


def load_legend(path: str | Path) -> dict[str, float]:
    legend: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise ParseError(line_no, f"legend rows are name,code (got {row!r})")
            try:
                legend[row[0].strip()] = float(row[1])
            except ValueError:
                raise ParseError(line_no, f"legend code is not a number: {row[1]!r}") from None
    return legend


def load_trace(path: str | Path, legend: dict[str, float] | None = None) -> list[TraceRow]:
    rows: list[TraceRow] = []
    last_offset = -1
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 3:
                raise ParseError(line_no, "need t_offset_ms,topic,v1[,v2,...]")
            try:
                offset = int(row[0])
            except ValueError:
                raise ParseError(line_no, f"bad offset {row[0]!r}") from None
            if offset < 0:
                raise ParseError(line_no, f"negative offset {offset}")
            if offset < last_offset:
                raise UnsortedTrace(line_no)
            last_offset = offset
            topic = row[1].strip()
            if not topic:
                raise ParseError(line_no, "empty topic")
            values = []
            for field in row[2:]:
                field = field.strip()
                try:
                    values.append(float(field))
                except ValueError:
                    if legend is not None and field in legend:
                        values.append(legend[field])
                    else:
                        raise ParseError(
                            line_no, f"value {field!r} is not numeric or in the legend"
                        ) from None
            rows.append(TraceRow(offset, topic, tuple(values)))
    return rows


def replay(client: CoreClient, rows: list[TraceRow], speed: float) -> int:
    """Publish every row as a sensor frame; returns the number published.

    Raises ConnectionLost with `.published` set if the core goes away.
    """
    if speed <= 0:
        raise ValueError("speed must be positive (use inf for back-to-back)")
    start = time.monotonic()
    published = 0
    source = client.service_id or "replay"
    try:
        for row in rows:
            if speed != float("inf"):
                deadline = start + (row.t_offset_ms / 1000.0) / speed
                while True:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        break
                    client.pump(min(remaining, 0.2))
            client.maybe_heartbeat()
            client.send(
                "sensor",
                {
                    "topic": row.topic,
                    "source": source,
                    "ts": row.t_offset_ms,
                    "values": list(row.values),
                },
            )
            published += 1
    except ConnectionLost as e:
        e.published = published  # type: ignore[attr-defined]
        log.error("connection lost after %d rows: %s", published, e)
        raise
    return published


def run_replay(
    core: tuple[str, int],
    trace_path: str | Path,
    speed: float,
    legend_path: str | Path | None = None,
    name: str = "replay",
) -> int:
    legend = load_legend(legend_path) if legend_path else None
    rows = load_trace(trace_path, legend)
    client = CoreClient(*core)
    try:
        client.hello("sensing", name, [])
        return replay(client, rows, speed)
    finally:
        client.close()
