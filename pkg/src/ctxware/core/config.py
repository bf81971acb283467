"""Core runtime configuration: a line-based `key = value` file.

Relative paths resolve against the config file's directory. The core binds to
loopback only; transport encryption is out of scope, so non-loopback binds
are refused outright.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_BIND = "127.0.0.1:7468"


class ConfigError(Exception):
    pass


@dataclass
class CoreConfig:
    ontology_path: Path
    bind_host: str = "127.0.0.1"
    bind_port: int = 7468
    registry_path: Path = Path("services.json")
    history_path: Path = Path("history.jsonl")
    confidence_threshold: float = 0.5
    heartbeat_interval_ms: int = 5000
    heartbeat_misses: int = 3
    context_ttl_ms: int = 300_000
    transient_classes: frozenset[str] = field(default_factory=frozenset)
    sensor_log_path: Path | None = None


def _is_loopback(host: str) -> bool:
    if host == "localhost":
        return True
    try:
        return ipaddress.ip_address(host).is_loopback
    except ValueError:
        return False


def parse_bind(value: str) -> tuple[str, int]:
    host, sep, port_s = value.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"bind must look like host:port, got {value!r}")
    try:
        port = int(port_s)
    except ValueError:
        raise ConfigError(f"bind port is not an integer: {port_s!r}") from None
    if not 0 <= port <= 65535:
        raise ConfigError(f"bind port out of range: {port}")
    if not _is_loopback(host):
        raise ConfigError(
            f"refusing non-loopback bind {host!r}: this runtime has no transport "
            "security and only serves the local machine"
        )
    return host, port


def parse_config_text(text: str, base_dir: Path) -> CoreConfig:
    values: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {line_no}: expected key = value")
        values[key.strip()] = value.strip()

    if "ontology_path" not in values:
        raise ConfigError("missing required key: ontology_path")

    def path_of(key: str, default: str | None = None) -> Path | None:
        v = values.get(key, default)
        if v is None:
            return None
        p = Path(v)
        return p if p.is_absolute() else base_dir / p

    def int_of(key: str, default: int) -> int:
        v = values.get(key)
        if v is None:
            return default
        try:
            n = int(v)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {v!r}") from None
        if n <= 0:
            raise ConfigError(f"{key} must be positive, got {n}")
        return n

    host, port = parse_bind(values.get("bind", DEFAULT_BIND))

    threshold_s = values.get("confidence_threshold", "0.5")
    try:
        threshold = float(threshold_s)
    except ValueError:
        raise ConfigError(
            f"confidence_threshold must be a number, got {threshold_s!r}"
        ) from None
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"confidence_threshold must be in [0, 1], got {threshold}")

    transient = frozenset(
        t.strip() for t in values.get("transient_classes", "").split(",") if t.strip()
    )

    return CoreConfig(
        ontology_path=path_of("ontology_path"),  # type: ignore[arg-type]
        bind_host=host,
        bind_port=port,
        registry_path=path_of("registry_path", "services.json"),  # type: ignore[arg-type]
        history_path=path_of("history_path", "history.jsonl"),  # type: ignore[arg-type]
        confidence_threshold=threshold,
        heartbeat_interval_ms=int_of("heartbeat_interval_ms", 5000),
        heartbeat_misses=int_of("heartbeat_misses", 3),
        context_ttl_ms=int_of("context_ttl_ms", 300_000),
        transient_classes=transient,
        sensor_log_path=path_of("sensor_log_path"),
    )


def load_config(path: str | Path) -> CoreConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e}") from e
    return parse_config_text(text, p.resolve().parent)
