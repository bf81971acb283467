"""Parser and serializer for the line-based ontology text format (.ctx).

One statement per line, `#` starts a comment, blank lines are ignored:

    Class: NAME        Role: NAME        Individual: NAME
    SubClassOf: EXPR, EXPR
    EquivalentTo: EXPR, EXPR
    SubRoleOf: NAME, NAME
    Type: NAME, EXPR
    Fact: ROLE, SUBJECT, OBJECT

    EXPR := NAME | Top | and(EXPR, EXPR, ...) | some(ROLE, EXPR)

Strict mode (the default) requires every used name to be declared. Lenient
mode auto-declares names in the namespace implied by their position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import NamespaceClash, OntologySyntaxError, UndeclaredName
from .model import (
    And,
    Atomic,
    ClassExpression,
    Declarations,
    EquivalentTo,
    FRESH_PREFIX,
    KIND_CLASS,
    KIND_INDIVIDUAL,
    KIND_ROLE,
    NAME_PATTERN,
    Ontology,
    RESERVED_WORDS,
    RoleAssertion,
    Some,
    SubClassOf,
    SubRoleOf,
    TOP,
    Top,
    TypeAssertion,
    conj,
)

_DECL_KEYWORDS = {"Class": KIND_CLASS, "Role": KIND_ROLE, "Individual": KIND_INDIVIDUAL}
_STMT_KEYWORDS = {"SubClassOf", "EquivalentTo", "SubRoleOf", "Type", "Fact"}

_TOKEN_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|\(|\)|,|\S)")


@dataclass
class _Token:
    kind: str  # "name" | "(" | ")" | "," | "end"
    text: str
    col: int  # 1-based column in the source line


def _tokenize(args: str, line_no: int, col_offset: int) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(args):
        m = _TOKEN_RE.match(args, pos)
        if m is None:
            break
        text = m.group(1)
        col = col_offset + m.start(1) + 1
        if text in ("(", ")", ","):
            tokens.append(_Token(text, text, col))
        elif NAME_PATTERN.match(text):
            tokens.append(_Token("name", text, col))
        else:
            raise OntologySyntaxError(line_no, col, "name, '(', ')' or ','", repr(text))
        pos = m.end()
    tokens.append(_Token("end", "", col_offset + len(args) + 1))
    return tokens


class _StatementParser:
    """Recursive-descent parser over one statement's argument tokens."""

    def __init__(self, tokens: list[_Token], line_no: int, names: "_NameChecker"):
        self.tokens = tokens
        self.i = 0
        self.line = line_no
        self.names = names

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self, kind: str, expected: str) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != kind:
            raise OntologySyntaxError(
                self.line, tok.col, expected, tok.text or "end of line"
            )
        self.i += 1
        return tok

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind != "end":
            raise OntologySyntaxError(self.line, tok.col, "end of statement", tok.text)

    def parse_expr(self) -> ClassExpression:
        tok = self.take("name", "expression")
        if tok.text == "Top":
            return TOP
        if tok.text == "and":
            self.take("(", "'(' after and")
            parts = [self.parse_expr()]
            while self.peek().kind == ",":
                self.i += 1
                parts.append(self.parse_expr())
            self.take(")", "',' or ')'")
            if len(parts) < 2:
                raise OntologySyntaxError(
                    self.line, tok.col, "at least two conjuncts in and(...)"
                )
            return conj(parts)
        if tok.text == "some":
            self.take("(", "'(' after some")
            role = self.take("name", "role name")
            self.names.check(KIND_ROLE, role.text, self.line, role.col)
            self.take(",", "','")
            filler = self.parse_expr()
            self.take(")", "')'")
            return Some(role.text, filler)
        self.names.check(KIND_CLASS, tok.text, self.line, tok.col)
        return Atomic(tok.text)

    def parse_name(self, kind: str, what: str) -> str:
        tok = self.take("name", what)
        self.names.check(kind, tok.text, self.line, tok.col)
        return tok.text

    def comma(self) -> None:
        self.take(",", "','")


class _NameChecker:
    def __init__(self, declarations: Declarations, strict: bool):
        self.declarations = declarations
        self.strict = strict

    def check(self, kind: str, name: str, line: int, col: int) -> None:
        if name in RESERVED_WORDS or name.startswith(FRESH_PREFIX):
            raise OntologySyntaxError(line, col, f"non-reserved {kind} name", name)
        if self.declarations.has(kind, name):
            return
        if self.strict:
            raise UndeclaredName(name, line, kind)
        self.declarations.declare(kind, name)


def _split_statements(text: str) -> list[tuple[int, str, str, int]]:
    """Yield (line_no, keyword, args, args_col_offset) per non-empty statement."""
    out = []
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].rstrip("\r")
        if not line.strip():
            continue
        m = re.match(r"\s*([A-Za-z]+)\s*:", line)
        if m is None:
            col = len(line) - len(line.lstrip()) + 1
            raise OntologySyntaxError(line_no, col, "statement keyword followed by ':'")
        keyword = m.group(1)
        if keyword not in _DECL_KEYWORDS and keyword not in _STMT_KEYWORDS:
            raise OntologySyntaxError(
                line_no, m.start(1) + 1, "a known statement keyword", keyword
            )
        out.append((line_no, keyword, line[m.end():], m.end()))
    return out


def parse_ontology(text: str, *, strict: bool = True) -> Ontology:
    """Parse ontology text into an Ontology value.

    Raises OntologySyntaxError, UndeclaredName (strict mode), or NamespaceClash.
    """
    statements = _split_statements(text)
    declarations = Declarations()

    # Pass 1: declarations, so statement order does not matter.
    for line_no, keyword, args, offset in statements:
        if keyword not in _DECL_KEYWORDS:
            continue
        tokens = _tokenize(args, line_no, offset)
        if tokens[0].kind != "name" or tokens[1].kind != "end":
            bad = tokens[0] if tokens[0].kind != "name" else tokens[1]
            raise OntologySyntaxError(
                line_no, bad.col, "a single name", bad.text or "end of line"
            )
        name = tokens[0].text
        if name in RESERVED_WORDS or name.startswith(FRESH_PREFIX):
            raise OntologySyntaxError(line_no, tokens[0].col, "non-reserved name", name)
        try:
            declarations.declare(_DECL_KEYWORDS[keyword], name)
        except NamespaceClash:
            raise

    checker = _NameChecker(declarations, strict)
    tbox: list = []
    abox: list = []
    seen_tbox: set = set()
    seen_abox: set = set()

    # Pass 2: axioms and assertions.
    for line_no, keyword, args, offset in statements:
        if keyword in _DECL_KEYWORDS:
            continue
        p = _StatementParser(_tokenize(args, line_no, offset), line_no, checker)
        if keyword == "SubClassOf":
            sub = p.parse_expr()
            p.comma()
            sup = p.parse_expr()
            p.expect_end()
            axiom = SubClassOf(sub, sup)
        elif keyword == "EquivalentTo":
            a = p.parse_expr()
            p.comma()
            b = p.parse_expr()
            p.expect_end()
            axiom = EquivalentTo(a, b)
        elif keyword == "SubRoleOf":
            sub_r = p.parse_name(KIND_ROLE, "role name")
            p.comma()
            sup_r = p.parse_name(KIND_ROLE, "role name")
            p.expect_end()
            axiom = SubRoleOf(sub_r, sup_r)
        elif keyword == "Type":
            ind = p.parse_name(KIND_INDIVIDUAL, "individual name")
            p.comma()
            cls = p.parse_expr()
            p.expect_end()
            assertion = TypeAssertion(ind, cls)
            if assertion not in seen_abox:
                seen_abox.add(assertion)
                abox.append(assertion)
            continue
        else:  # Fact
            role = p.parse_name(KIND_ROLE, "role name")
            p.comma()
            subj = p.parse_name(KIND_INDIVIDUAL, "individual name")
            p.comma()
            obj = p.parse_name(KIND_INDIVIDUAL, "individual name")
            p.expect_end()
            assertion = RoleAssertion(role, subj, obj)
            if assertion not in seen_abox:
                seen_abox.add(assertion)
                abox.append(assertion)
            continue
        if axiom not in seen_tbox:
            seen_tbox.add(axiom)
            tbox.append(axiom)

    return Ontology(declarations, tuple(tbox), tuple(abox))


def load_ontology(path, *, strict: bool = True) -> Ontology:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ontology(fh.read(), strict=strict)


# --- serialization -----------------------------------------------------------


def render_expr(expr: ClassExpression) -> str:
    if isinstance(expr, Top):
        return "Top"
    if isinstance(expr, Atomic):
        return expr.name
    if isinstance(expr, Some):
        return f"some({expr.role}, {render_expr(expr.filler)})"
    inner = ", ".join(render_expr(c) for c in expr.conjuncts)
    return f"and({inner})"


def _render_tbox_axiom(axiom) -> str:
    if isinstance(axiom, SubClassOf):
        return f"SubClassOf: {render_expr(axiom.sub)}, {render_expr(axiom.sup)}"
    if isinstance(axiom, EquivalentTo):
        return f"EquivalentTo: {render_expr(axiom.a)}, {render_expr(axiom.b)}"
    return f"SubRoleOf: {axiom.sub}, {axiom.sup}"


def _render_assertion(assertion) -> str:
    if isinstance(assertion, TypeAssertion):
        return f"Type: {assertion.individual}, {render_expr(assertion.cls)}"
    return f"Fact: {assertion.role}, {assertion.subject}, {assertion.object}"


def serialize_ontology(ontology: Ontology) -> str:
    """Canonical text form: sorted declarations, then sorted axioms/assertions.

    parse(serialize(parse(t))) equals parse(t) for every well-formed t.
    """
    lines: list[str] = []
    for kind, keyword in ((KIND_CLASS, "Class"), (KIND_ROLE, "Role"), (KIND_INDIVIDUAL, "Individual")):
        for name in sorted(ontology.declarations.names(kind)):
            lines.append(f"{keyword}: {name}")
    lines.extend(sorted(_render_tbox_axiom(a) for a in ontology.tbox))
    lines.extend(sorted(_render_assertion(a) for a in ontology.abox))
    return "\n".join(lines) + "\n"
