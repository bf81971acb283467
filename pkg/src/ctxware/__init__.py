"""Ontology-backed context-awareness runtime and reference micro-services."""

__version__ = "0.1.0"
