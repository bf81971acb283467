"""Blocking NDJSON client used by the bundled micro-services.

Single-threaded: a select-based loop interleaves inbound frames, scheduled
heartbeats, and whatever the service itself wants to send. Invalid inbound
frames are logged and dropped (only the core replies to bad frames).
"""

from __future__ import annotations

import json
import logging
import select
import socket
import time

from ..core import protocol
from ..core.protocol import ProtocolError, now_ms

log = logging.getLogger(__name__)

DEFAULT_HEARTBEAT_MS = 2000


class ConnectionLost(Exception):
    """The core went away mid-conversation."""


class CoreClient:
    def __init__(self, host: str, port: int, heartbeat_ms: int = DEFAULT_HEARTBEAT_MS):
        self.host = host
        self.port = port
        self.heartbeat_ms = heartbeat_ms
        self.service_id: str | None = None
        self._sock = socket.create_connection((host, port), timeout=10)
        self._sock.setblocking(True)
        self._buffer = b""
        self._inbox: list[dict] = []
        self._msg_id = 0
        self._next_heartbeat = time.monotonic() + heartbeat_ms / 1000.0

    # --- framing -----------------------------------------------------------

    def send(self, msg_type: str, payload: dict) -> int:
        envelope = protocol.make_envelope(msg_type, self._msg_id, payload)
        self._msg_id += 1
        try:
            self._sock.sendall(protocol.encode_frame(envelope))
        except OSError as e:
            raise ConnectionLost(str(e)) from e
        return envelope["msg_id"]

    def _read_some(self, timeout: float) -> bool:
        """Pull bytes from the socket into complete frames; True if any arrived."""
        ready, _, _ = select.select([self._sock], [], [], max(timeout, 0.0))
        if not ready:
            return False
        try:
            chunk = self._sock.recv(65536)
        except OSError as e:
            raise ConnectionLost(str(e)) from e
        if not chunk:
            raise ConnectionLost("core closed the connection")
        self._buffer += chunk
        got = False
        while b"\n" in self._buffer:
            line, self._buffer = self._buffer.split(b"\n", 1)
            if not line.strip():
                continue
            try:
                self._inbox.append(protocol.decode_frame(line))
                got = True
            except ProtocolError as e:
                log.warning("dropping invalid inbound frame: %s", e)
        return got

    def recv(self, timeout: float = 0.0) -> dict | None:
        """Next inbound envelope, waiting up to `timeout` seconds."""
        deadline = time.monotonic() + timeout
        while not self._inbox:
            remaining = deadline - time.monotonic()
            if remaining < 0 and not self._read_some(0.0):
                return None
            if remaining >= 0:
                self._read_some(remaining)
                if not self._inbox and time.monotonic() >= deadline:
                    return None
        return self._inbox.pop(0)

    def wait_for(self, predicate, timeout: float) -> dict:
        """Wait for the first envelope matching `predicate`; buffer the rest."""
        deadline = time.monotonic() + timeout
        stash: list[dict] = []
        try:
            while True:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise ConnectionLost("timed out waiting for a reply")
                env = self.recv(remaining)
                if env is None:
                    continue
                if predicate(env):
                    return env
                stash.append(env)
        finally:
            self._inbox = stash + self._inbox

    # --- lifecycle -----------------------------------------------------------

    def hello(self, kind: str, name: str, subscriptions: list[str]) -> str:
        msg_id = self.send(
            "hello", {"kind": kind, "name": name, "subscriptions": subscriptions}
        )
        reply = self.wait_for(
            lambda e: e["type"] in ("ack", "error")
            and e["payload"].get("re") == msg_id,
            timeout=10,
        )
        if reply["type"] == "error":
            raise ProtocolError(reply["payload"]["code"], reply["payload"]["detail"])
        self.service_id = reply["payload"]["service_id"]
        return self.service_id

    def maybe_heartbeat(self) -> None:
        now = time.monotonic()
        if now >= self._next_heartbeat:
            self.send("heartbeat", {})
            self._next_heartbeat = now + self.heartbeat_ms / 1000.0

    def pump(self, timeout: float) -> dict | None:
        """One loop step: heartbeat if due, then wait up to `timeout` for a frame."""
        self.maybe_heartbeat()
        wait = min(timeout, max(self._next_heartbeat - time.monotonic(), 0.0))
        return self.recv(wait)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


def parse_host_port(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    return host or "127.0.0.1", int(port)
