"""Wire protocol: one UTF-8 JSON envelope per LF-terminated line.

Envelope (exactly these five fields):

    {"v": 1, "type": <str>, "msg_id": <int>, "ts": <epoch-ms int>, "payload": {...}}

msg_id increases monotonically per connection and direction. A frame
(including the trailing LF) may be at most 65,536 bytes. Unknown or
wrong-direction types are answered with an `error` frame, never dropped
silently. Reply-natured types (ack, result, error, prediction) are themselves
never answered, and sensor/heartbeat frames are fire-and-forget.

The same schema tables validate inbound frames at the core and outbound
frames in the conformance tests.
"""

from __future__ import annotations

import json
import time
from typing import Any, Callable

PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 65536

# error codes
MALFORMED = "MALFORMED"
UNKNOWN_TYPE = "UNKNOWN_TYPE"
UNKNOWN_SENDER = "UNKNOWN_SENDER"
UNKNOWN_NAME = "UNKNOWN_NAME"
MALFORMED_QUERY = "MALFORMED_QUERY"
NO_PREDICTOR = "NO_PREDICTOR"
EMPTY_MODEL = "EMPTY_MODEL"
TIMEOUT = "TIMEOUT"
FRAME_TOO_LARGE = "FRAME_TOO_LARGE"
IO_ERROR = "IO_ERROR"

SERVICE_KINDS = ("sensing", "classification", "prediction", "app")

#: Topics the core itself publishes on.
TOPIC_ACCEPTED = "context/accepted"
TOPIC_DERIVED = "context/derived"
TOPIC_CLEARED = "context/cleared"

#: Inbound types that get no reply: fire-and-forget plus reply-natured frames.
NO_REPLY_TYPES = frozenset(
    {"sensor", "heartbeat", "ack", "result", "error", "prediction"}
)


class ProtocolError(Exception):
    def __init__(self, code: str, detail: str):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}")


def now_ms() -> int:
    return int(time.time() * 1000)


# --- schema checks ------------------------------------------------------------


def _is_str(v: Any) -> bool:
    return isinstance(v, str)


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_confidence(v: Any) -> bool:
    return _is_num(v) and 0.0 <= v <= 1.0


def _is_num_list(v: Any) -> bool:
    return isinstance(v, list) and all(_is_num(x) for x in v)


def _is_str_list(v: Any) -> bool:
    return isinstance(v, list) and all(_is_str(x) for x in v)


def _is_kind(v: Any) -> bool:
    return v in SERVICE_KINDS


def _is_ranking(v: Any) -> bool:
    return isinstance(v, list) and all(
        isinstance(e, list)
        and len(e) == 2
        and _is_str(e[0])
        and _is_num(e[1])
        and 0.0 <= e[1] <= 1.0
        for e in v
    )


def _is_outcome(v: Any) -> bool:
    return v in ("accepted", "rejected")


def _is_derived_list(v: Any) -> bool:
    if not isinstance(v, list):
        return False
    for e in v:
        if not isinstance(e, dict) or set(e) != {"subject", "context", "confidence"}:
            return False
        if not (_is_str(e["subject"]) and _is_str(e["context"]) and _is_confidence(e["confidence"])):
            return False
    return True


def _is_obj_list(v: Any) -> bool:
    return isinstance(v, list) and all(isinstance(e, dict) for e in v)


_Check = Callable[[Any], bool]

#: type -> (required fields, optional fields)
PAYLOAD_SCHEMAS: dict[str, tuple[dict[str, _Check], dict[str, _Check]]] = {
    "hello": (
        {"kind": _is_kind, "name": _is_str, "subscriptions": _is_str_list},
        {},
    ),
    "ack": (
        {"re": _is_int},
        {
            "service_id": _is_str,
            "outcome": _is_outcome,
            "reason": _is_str,
            "derived": _is_derived_list,
            "topics": _is_str_list,
            "delivered": _is_int,
        },
    ),
    "error": (
        {"code": _is_str, "detail": _is_str},
        {"re": lambda v: v is None or _is_int(v)},
    ),
    "heartbeat": ({}, {}),
    "sensor": (
        {"topic": _is_str, "source": _is_str, "ts": _is_int, "values": _is_num_list},
        {},
    ),
    "context": (
        {
            "subject": _is_str,
            "context": _is_str,
            "confidence": _is_confidence,
            "ts": _is_int,
        },
        {},
    ),
    "context-derived": (
        {
            "subject": _is_str,
            "context": _is_str,
            "confidence": _is_confidence,
            "ts": _is_int,
            "source": _is_str,
        },
        {},
    ),
    "context-cleared": (
        {"subject": _is_str, "context": _is_str, "ts": _is_int},
        {},
    ),
    "subscribe": ({"topics": _is_str_list}, {}),
    "query": (
        {"q": lambda v: v in ("types", "instances", "current", "history")},
        {
            "individual": _is_str,
            "cls": _is_str,
            "subject": _is_str,
            "t0": _is_int,
            "t1": _is_int,
            "limit": _is_int,
        },
    ),
    "result": (
        {"re": _is_int, "q": _is_str},
        {
            "types": _is_str_list,
            "instances": _is_str_list,
            "contexts": _is_str_list,
            "events": _is_obj_list,
            "records": _is_obj_list,
        },
    ),
    "predict": ({"subject": _is_str}, {}),
    "prediction": (
        {"re": _is_int, "subject": _is_str, "ranking": _is_ranking},
        {},
    ),
}

MESSAGE_TYPES = frozenset(PAYLOAD_SCHEMAS)

_ENVELOPE_FIELDS = {"v", "type", "msg_id", "ts", "payload"}


def validate_envelope(obj: Any) -> None:
    """Envelope shape check; raises ProtocolError(MALFORMED / UNKNOWN_TYPE)."""
    if not isinstance(obj, dict):
        raise ProtocolError(MALFORMED, "frame is not a JSON object")
    keys = set(obj)
    if keys != _ENVELOPE_FIELDS:
        missing = _ENVELOPE_FIELDS - keys
        extra = keys - _ENVELOPE_FIELDS
        parts = []
        if missing:
            parts.append("missing " + ",".join(sorted(missing)))
        if extra:
            parts.append("unexpected " + ",".join(sorted(extra)))
        raise ProtocolError(MALFORMED, "envelope fields: " + "; ".join(parts))
    if obj["v"] != PROTOCOL_VERSION:
        raise ProtocolError(MALFORMED, f"unsupported protocol version {obj['v']!r}")
    if not _is_str(obj["type"]):
        raise ProtocolError(MALFORMED, "type must be a string")
    if not _is_int(obj["msg_id"]) or obj["msg_id"] < 0:
        raise ProtocolError(MALFORMED, "msg_id must be a non-negative integer")
    if not _is_int(obj["ts"]) or obj["ts"] < 0:
        raise ProtocolError(MALFORMED, "ts must be a non-negative integer")
    if not isinstance(obj["payload"], dict):
        raise ProtocolError(MALFORMED, "payload must be an object")
    if obj["type"] not in MESSAGE_TYPES:
        raise ProtocolError(UNKNOWN_TYPE, f"unknown message type {obj['type']!r}")


def validate_payload(msg_type: str, payload: dict) -> None:
    required, optional = PAYLOAD_SCHEMAS[msg_type]
    for name, check in required.items():
        if name not in payload:
            raise ProtocolError(MALFORMED, f"{msg_type}: missing field {name!r}")
        if not check(payload[name]):
            raise ProtocolError(MALFORMED, f"{msg_type}: bad value for {name!r}")
    for name, value in payload.items():
        if name in required:
            continue
        if name not in optional:
            raise ProtocolError(MALFORMED, f"{msg_type}: unexpected field {name!r}")
        if not optional[name](value):
            raise ProtocolError(MALFORMED, f"{msg_type}: bad value for {name!r}")


def validate_message(obj: Any) -> None:
    validate_envelope(obj)
    validate_payload(obj["type"], obj["payload"])


# --- framing -------------------------------------------------------------------


def make_envelope(
    msg_type: str, msg_id: int, payload: dict, ts: int | None = None
) -> dict:
    return {
        "v": PROTOCOL_VERSION,
        "type": msg_type,
        "msg_id": msg_id,
        "ts": now_ms() if ts is None else ts,
        "payload": payload,
    }


def encode_frame(envelope: dict) -> bytes:
    data = json.dumps(envelope, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    ) + b"\n"
    if len(data) > MAX_FRAME_BYTES:
        raise ProtocolError(
            FRAME_TOO_LARGE, f"frame of {len(data)} bytes exceeds {MAX_FRAME_BYTES}"
        )
    return data


def decode_frame(line: bytes) -> dict:
    """Parse and fully validate one frame line (without trailing LF is fine)."""
    if len(line) > MAX_FRAME_BYTES:
        raise ProtocolError(
            FRAME_TOO_LARGE, f"frame of {len(line)} bytes exceeds {MAX_FRAME_BYTES}"
        )
    try:
        obj = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ProtocolError(MALFORMED, f"bad JSON: {e}") from None
    validate_message(obj)
    return obj
