"""The framework core: loopback TCP server routing NDJSON frames.

One handler task per connection; every state mutation runs on the single
event loop, which serializes writers by construction. Frames follow the
totality rule: each inbound frame gets exactly one reply (ack, result,
prediction, or error) unless its type is fire-and-forget or reply-natured.
"""

from __future__ import annotations

import asyncio
import itertools
import json
import logging
from pathlib import Path

from ..history import BadRange, HistoryStore
from ..ontology import OntologyError, UnknownName, load_ontology
from . import protocol
from .config import CoreConfig
from .protocol import ProtocolError, now_ms
from .registry import ServiceRegistry
from .state import CoreState, HistoryUnavailable

log = logging.getLogger(__name__)

PREDICT_TIMEOUT_MS = 10_000


class BindError(Exception):
    pass


class OntologyLoadError(Exception):
    pass


class _Connection:
    _ids = itertools.count(1)

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.id = next(self._ids)
        self.reader = reader
        self.writer = writer
        self.service_id: str | None = None
        self.out_msg_id = itertools.count(0)

    def envelope(self, msg_type: str, payload: dict) -> dict:
        return protocol.make_envelope(msg_type, next(self.out_msg_id), payload)

    async def send(self, msg_type: str, payload: dict) -> None:
        self.writer.write(protocol.encode_frame(self.envelope(msg_type, payload)))
        await self.writer.drain()


class CoreServer:
    def __init__(self, config: CoreConfig):
        self.config = config
        try:
            self.ontology = load_ontology(config.ontology_path)
        except OSError as e:
            raise OntologyLoadError(f"cannot read {config.ontology_path}: {e}") from e
        except OntologyError as e:
            raise OntologyLoadError(f"{config.ontology_path}: {e}") from e
        self.registry = ServiceRegistry(config.registry_path)  # may raise RegistryCorrupt
        self.history = HistoryStore(config.history_path)
        self.state = CoreState(
            ontology=self.ontology,
            history=self.history,
            confidence_threshold=config.confidence_threshold,
            context_ttl_ms=config.context_ttl_ms,
            transient_classes=config.transient_classes,
        )
        self._server: asyncio.base_events.Server | None = None
        self._conns: dict[int, _Connection] = {}
        self._service_conn: dict[str, _Connection] = {}
        # (predictor conn id, forwarded msg_id) -> (requester conn, original msg_id, timeout task)
        self._pending_predictions: dict[tuple[int, int], tuple[_Connection, int, asyncio.Task]] = {}
        self._tick_task: asyncio.Task | None = None
        self._sensor_log = None
        if config.sensor_log_path is not None:
            config.sensor_log_path.parent.mkdir(parents=True, exist_ok=True)
            self._sensor_log = open(config.sensor_log_path, "a", encoding="utf-8")

    # --- lifecycle --------------------------------------------------------

    @property
    def port(self) -> int:
        assert self._server is not None
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> None:
        try:
            self._server = await asyncio.start_server(
                self._handle_connection,
                self.config.bind_host,
                self.config.bind_port,
                limit=protocol.MAX_FRAME_BYTES + 2,
            )
        except OSError as e:
            raise BindError(
                f"cannot bind {self.config.bind_host}:{self.config.bind_port}: {e}"
            ) from e
        self._tick_task = asyncio.create_task(self._tick_loop())
        log.info("core listening on %s:%d", self.config.bind_host, self.port)
        print(f"ctx-core listening on {self.config.bind_host}:{self.port}", flush=True)

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        assert self._server is not None
        async with self._server:
            await self._server.serve_forever()

    async def stop(self) -> None:
        if self._tick_task is not None:
            self._tick_task.cancel()
        for _, _, task in self._pending_predictions.values():
            task.cancel()
        self._pending_predictions.clear()
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        for conn in list(self._conns.values()):
            conn.writer.close()
        if self._sensor_log is not None:
            self._sensor_log.close()
        self.history.close()

    async def _tick_loop(self) -> None:
        interval = self.config.heartbeat_interval_ms / 1000.0
        while True:
            await asyncio.sleep(interval)
            now = now_ms()
            for record in self.registry.tick(
                now, self.config.heartbeat_interval_ms, self.config.heartbeat_misses
            ):
                log.info("service %s (%s) marked offline", record.name, record.id)
            cleared = self.state.expire(now)
            for ev in cleared:
                await self._publish(
                    protocol.TOPIC_CLEARED,
                    "context-cleared",
                    {"subject": ev.subject, "context": ev.context, "ts": now},
                )

    # --- connection handling ------------------------------------------------

    async def _handle_connection(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        conn = _Connection(reader, writer)
        self._conns[conn.id] = conn
        try:
            while True:
                try:
                    line = await reader.readuntil(b"\n")
                except asyncio.IncompleteReadError as e:
                    if e.partial:
                        log.warning("connection %d: dropped partial trailing frame", conn.id)
                    break
                except (asyncio.LimitOverrunError, ValueError):
                    await self._send_error(conn, protocol.FRAME_TOO_LARGE,
                                           "frame exceeds 65536 bytes", None)
                    break
                if not line.strip():
                    continue
                await self._handle_frame(conn, line)
        except (ConnectionResetError, BrokenPipeError):
            pass
        finally:
            self._conns.pop(conn.id, None)
            if conn.service_id and self._service_conn.get(conn.service_id) is conn:
                del self._service_conn[conn.service_id]
            writer.close()

    async def _send_error(
        self, conn: _Connection, code: str, detail: str, re: int | None
    ) -> None:
        payload: dict = {"code": code, "detail": detail}
        if re is not None:
            payload["re"] = re
        try:
            await conn.send("error", payload)
        except (ConnectionResetError, BrokenPipeError):
            pass

    async def _handle_frame(self, conn: _Connection, line: bytes) -> None:
        msg_id: int | None = None
        try:
            obj = json.loads(line.decode("utf-8"))
            if isinstance(obj, dict) and protocol._is_int(obj.get("msg_id")):
                msg_id = obj["msg_id"]
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            await self._send_error(conn, protocol.MALFORMED, f"bad JSON: {e}", None)
            return
        try:
            protocol.validate_message(obj)
        except ProtocolError as e:
            await self._send_error(conn, e.code, e.detail, msg_id)
            return
        try:
            await self._dispatch(conn, obj)
        except ProtocolError as e:
            await self._send_error(conn, e.code, e.detail, msg_id)
        except HistoryUnavailable as e:
            await self._send_error(conn, protocol.IO_ERROR, str(e), msg_id)

    async def _dispatch(self, conn: _Connection, obj: dict) -> None:
        msg_type = obj["type"]
        msg_id = obj["msg_id"]
        payload = obj["payload"]
        now = now_ms()

        if msg_type == "hello":
            record = self.registry.register(
                payload["kind"], payload["name"], payload["subscriptions"], now
            )
            conn.service_id = record.id
            self._service_conn[record.id] = conn
            log.info("service %s registered as %s (%s)", record.name, record.id, record.kind)
            await conn.send("ack", {"re": msg_id, "service_id": record.id})
            return

        if conn.service_id is None or self.registry.get(conn.service_id) is None:
            raise ProtocolError(
                protocol.UNKNOWN_SENDER, "say hello before sending anything else"
            )
        transition = self.registry.touch(conn.service_id, now)
        if transition is not None:
            record = self.registry.get(conn.service_id)
            log.info("service %s back online", record.name if record else conn.service_id)

        if msg_type == "heartbeat":
            return

        if msg_type == "sensor":
            await self._route_sensor(payload)
            return

        if msg_type == "subscribe":
            topics = self.registry.add_subscriptions(conn.service_id, payload["topics"])
            await conn.send("ack", {"re": msg_id, "topics": sorted(topics)})
            return

        if msg_type == "context":
            await self._ingest_context(conn, msg_id, payload, now)
            return

        if msg_type == "query":
            await self._query(conn, msg_id, payload)
            return

        if msg_type == "predict":
            await self._forward_predict(conn, msg_id, payload)
            return

        if msg_type == "prediction":
            await self._relay_prediction(conn, payload)
            return

        if msg_type == "error":
            await self._relay_error(conn, payload)
            return

        if msg_type in protocol.NO_REPLY_TYPES:
            return  # reply-natured frame we have no pending question for

        raise ProtocolError(
            protocol.MALFORMED, f"{msg_type} frames are not accepted by the core"
        )

    # --- sensor routing -----------------------------------------------------

    async def _route_sensor(self, payload: dict) -> int:
        if self._sensor_log is not None:
            self._sensor_log.write(
                json.dumps(payload, separators=(",", ":"), sort_keys=True) + "\n"
            )
            self._sensor_log.flush()
        delivered = await self._publish(payload["topic"], "sensor", payload)
        if delivered == 0:
            self.state.sensor_drops += 1
        return delivered

    async def _publish(self, topic: str, msg_type: str, payload: dict) -> int:
        """Send to every online subscriber with a live connection; returns count."""
        delivered = 0
        for record in self.registry.online_subscribers(topic):
            target = self._service_conn.get(record.id)
            if target is None:
                continue
            try:
                await target.send(msg_type, payload)
                delivered += 1
            except (ConnectionResetError, BrokenPipeError):
                log.warning("publish to %s failed; connection gone", record.name)
        return delivered

    # --- context ingestion ----------------------------------------------------

    async def _ingest_context(
        self, conn: _Connection, msg_id: int, payload: dict, now: int
    ) -> None:
        outcome = self.state.ingest(
            subject=payload["subject"],
            context=payload["context"],
            confidence=payload["confidence"],
            source=conn.service_id or "",
            now=now,
        )
        ack: dict = {
            "re": msg_id,
            "outcome": "accepted" if outcome.accepted else "rejected",
        }
        if outcome.reason:
            ack["reason"] = outcome.reason
        if outcome.accepted:
            ack["derived"] = [
                {"subject": d.subject, "context": d.context, "confidence": d.confidence}
                for d in outcome.derived
            ]
        await conn.send("ack", ack)

        if outcome.accepted:
            await self._publish(
                protocol.TOPIC_ACCEPTED,
                "context",
                {
                    "subject": payload["subject"],
                    "context": payload["context"],
                    "confidence": payload["confidence"],
                    "ts": now,
                },
            )
            for d in outcome.derived:
                await self._publish(
                    protocol.TOPIC_DERIVED,
                    "context-derived",
                    {
                        "subject": d.subject,
                        "context": d.context,
                        "confidence": d.confidence,
                        "ts": now,
                        "source": "reasoner",
                    },
                )

    # --- queries ---------------------------------------------------------------

    async def _query(self, conn: _Connection, msg_id: int, payload: dict) -> None:
        q = payload["q"]
        try:
            if q == "types":
                individual = self._require(payload, "individual")
                result = {"types": self.state.query_types(individual)}
            elif q == "instances":
                cls = self._require(payload, "cls")
                result = {"instances": self.state.query_instances(cls)}
            elif q == "current":
                subject = self._require(payload, "subject")
                contexts, events = self.state.query_current(subject)
                result = {
                    "contexts": contexts,
                    "events": [
                        {
                            "context": e.context,
                            "confidence": e.confidence,
                            "ts": e.ts,
                            "source": e.source,
                        }
                        for e in events
                    ],
                }
            else:  # history
                records = self.state.query_history(
                    payload.get("t0"),
                    payload.get("t1"),
                    payload.get("subject"),
                    payload.get("limit"),
                )
                result = {
                    "records": [
                        {
                            "ts": r.ts,
                            "subject": r.subject,
                            "context": r.context,
                            "confidence": r.confidence,
                            "source": r.source,
                            "accepted": r.accepted,
                        }
                        for r in records
                    ]
                }
        except UnknownName as e:
            raise ProtocolError(protocol.UNKNOWN_NAME, str(e)) from None
        except BadRange as e:
            raise ProtocolError(protocol.MALFORMED_QUERY, str(e)) from None
        await conn.send("result", {"re": msg_id, "q": q, **result})

    @staticmethod
    def _require(payload: dict, name: str) -> str:
        value = payload.get(name)
        if value is None:
            raise ProtocolError(
                protocol.MALFORMED_QUERY, f"query requires field {name!r}"
            )
        return value

    # --- prediction forwarding ---------------------------------------------------

    def _find_predictor(self) -> _Connection | None:
        for record in self.registry.records():
            if record.kind == "prediction" and record.status == "online":
                target = self._service_conn.get(record.id)
                if target is not None:
                    return target
        return None

    async def _forward_predict(
        self, conn: _Connection, msg_id: int, payload: dict
    ) -> None:
        predictor = self._find_predictor()
        if predictor is None:
            raise ProtocolError(
                protocol.NO_PREDICTOR, "no prediction service is online"
            )
        envelope = predictor.envelope("predict", {"subject": payload["subject"]})
        key = (predictor.id, envelope["msg_id"])

        async def timeout() -> None:
            await asyncio.sleep(PREDICT_TIMEOUT_MS / 1000.0)
            pending = self._pending_predictions.pop(key, None)
            if pending is not None:
                requester, original, _ = pending
                await self._send_error(
                    requester, protocol.TIMEOUT, "prediction service did not answer", original
                )

        self._pending_predictions[key] = (conn, msg_id, asyncio.create_task(timeout()))
        predictor.writer.write(protocol.encode_frame(envelope))
        await predictor.writer.drain()

    async def _relay_prediction(self, conn: _Connection, payload: dict) -> None:
        pending = self._pending_predictions.pop((conn.id, payload["re"]), None)
        if pending is None:
            log.warning("prediction with no matching request (re=%s)", payload["re"])
            return
        requester, original, task = pending
        task.cancel()
        await requester.send(
            "prediction",
            {"re": original, "subject": payload["subject"], "ranking": payload["ranking"]},
        )

    async def _relay_error(self, conn: _Connection, payload: dict) -> None:
        re = payload.get("re")
        if re is None:
            log.warning("service error: %s %s", payload["code"], payload["detail"])
            return
        pending = self._pending_predictions.pop((conn.id, re), None)
        if pending is None:
            log.warning("service error: %s %s", payload["code"], payload["detail"])
            return
        requester, original, task = pending
        task.cancel()
        await self._send_error(requester, payload["code"], payload["detail"], original)


async def run_core(config: CoreConfig) -> None:
    server = CoreServer(config)
    await server.start()
    try:
        assert server._server is not None
        async with server._server:
            await server._server.serve_forever()
    finally:
        await server.stop()
