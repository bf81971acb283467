"""Errors raised by the ontology layer."""

from __future__ import annotations


class OntologyError(Exception):
    """Base class for all ontology-layer errors."""


class OntologySyntaxError(OntologyError):
    """Malformed ontology text. Carries the 1-based line/column and what was expected."""

    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        detail = f", found {found}" if found else ""
        super().__init__(f"line {line}, col {col}: expected {expected}{detail}")


class UndeclaredName(OntologyError):
    """A name was used without a matching declaration (strict mode)."""

    def __init__(self, name: str, line: int = 0, kind: str = "name"):
        self.name = name
        self.line = line
        self.kind = kind
        where = f" (line {line})" if line else ""
        super().__init__(f"{name} is not a declared {kind}{where}")


class NamespaceClash(OntologyError):
    """A name was declared in more than one namespace."""

    def __init__(self, name: str, declared_as: str = "", wanted: str = ""):
        self.name = name
        self.declared_as = declared_as
        self.wanted = wanted
        detail = (
            f": already a {declared_as}, redeclared as {wanted}"
            if declared_as and wanted
            else ""
        )
        super().__init__(f"namespace clash for {name}{detail}")


class UnknownName(OntologyError):
    """A runtime query or update referenced a name the ontology does not declare."""

    def __init__(self, name: str, kind: str = "name"):
        self.name = name
        self.kind = kind
        super().__init__(f"unknown {kind}: {name}")


class ResourceLimit(OntologyError):
    """Saturation exceeded the configured derived-fact cap."""

    def __init__(self, facts: int, limit: int):
        self.facts = facts
        self.limit = limit
        super().__init__(f"derived-fact limit exceeded: {facts} > {limit}")
