"""Framework core: configuration, wire protocol, service registry, state, server."""

from .config import ConfigError, CoreConfig, load_config, parse_bind
from .protocol import (
    MAX_FRAME_BYTES,
    PROTOCOL_VERSION,
    ProtocolError,
    decode_frame,
    encode_frame,
    make_envelope,
    now_ms,
    validate_message,
)
from .registry import RegistryCorrupt, ServiceRecord, ServiceRegistry
from .server import BindError, CoreServer, OntologyLoadError, run_core
from .state import (
    ClearedEvent,
    CoreState,
    CurrentContext,
    DerivedEvent,
    HistoryUnavailable,
    IngestOutcome,
)

__all__ = [
    "BindError",
    "ClearedEvent",
    "ConfigError",
    "CoreConfig",
    "CoreServer",
    "CoreState",
    "CurrentContext",
    "DerivedEvent",
    "HistoryUnavailable",
    "IngestOutcome",
    "MAX_FRAME_BYTES",
    "OntologyLoadError",
    "PROTOCOL_VERSION",
    "ProtocolError",
    "RegistryCorrupt",
    "ServiceRecord",
    "ServiceRegistry",
    "decode_frame",
    "encode_frame",
    "load_config",
    "make_envelope",
    "now_ms",
    "parse_bind",
    "run_core",
    "validate_message",
]
