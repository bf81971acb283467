"""Reference micro-services: sensing replay, classification, prediction, filtering."""

from .client import ConnectionLost, CoreClient, parse_host_port

__all__ = ["ConnectionLost", "CoreClient", "parse_host_port"]
