"""SPARQL basic graph pattern subset: parsing and evaluation ordering."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .rdf import _ECHAR, Dictionary, Term, TermId

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("empty variable name")

    def __str__(self) -> str:
        return self.name if self.name.startswith("_:") else "?" + self.name


@dataclass(frozen=True, slots=True)
class Const:
    id: TermId


PatternTerm = Union[Var, Const]


class TriplePattern(tuple):
    """An ``s p o`` pattern; each position is a :class:`Var` or a :class:`Const`."""

    __slots__ = ()

    def __new__(cls, s: PatternTerm, p: PatternTerm, o: PatternTerm):
        return super().__new__(cls, (s, p, o))

    @property
    def s(self) -> PatternTerm:
        return self[0]

    @property
    def p(self) -> PatternTerm:
        return self[1]

    @property
    def o(self) -> PatternTerm:
        return self[2]

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(t.name for t in self if isinstance(t, Var))

    @property
    def num_constants(self) -> int:
        return sum(isinstance(t, Const) for t in self)

    def render(self, dictionary: Dictionary | None = None) -> str:
        def one(t: PatternTerm) -> str:
            if isinstance(t, Var):
                return str(t)
            return dictionary.term_of(t.id).n3() if dictionary is not None else f"#{t.id}"
        return " ".join(one(t) for t in self)

    def __repr__(self) -> str:
        return f"TriplePattern({self.render()})"


@dataclass(frozen=True)
class BgpQuery:
    projection: tuple[str, ...]
    patterns: tuple[TriplePattern, ...]
    prefixes: Mapping[str, str] = field(default_factory=dict)

    @property
    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for p in self.patterns:
            out |= p.variables
        return frozenset(out)


class QueryError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


def is_connected(patterns: Sequence[TriplePattern]) -> bool:
    """Whether the variable-sharing graph over the non-ground patterns is connected."""
    open_patterns = [p.variables for p in patterns if p.variables]
    if not open_patterns:
        return True
    reached = set(open_patterns[0])
    pending = open_patterns[1:]
    grew = True
    while pending and grew:
        grew = False
        rest = []
        for vs in pending:
            if vs & reached:
                reached |= vs
                grew = True
            else:
                rest.append(vs)
        pending = rest
    return not pending


def order_bgp(query: BgpQuery | Sequence[TriplePattern]) -> list[TriplePattern]:
    """Greedy connectivity-preserving evaluation order, most constants first.

    Ties go to the pattern with fewer distinct variables, then to textual order.
    Ground patterns sort first (three constants) and act as filters.
    """
    patterns = list(query.patterns if isinstance(query, BgpQuery) else query)
    if not is_connected(patterns):
        raise QueryError("basic graph pattern is not connected")

    def key(i: int) -> tuple[int, int, int]:
        p = patterns[i]
        return (-p.num_constants, len(p.variables), i)

    remaining = list(range(len(patterns)))
    placed_vars: set[str] = set()
    order: list[TriplePattern] = []
    while remaining:
        eligible = [i for i in remaining if not placed_vars or patterns[i].variables & placed_vars]
        best = min(eligible, key=key)
        remaining.remove(best)
        order.append(patterns[best])
        placed_vars |= patterns[best].variables
    return order


# --- parsing -----------------------------------------------------------------

_TOKEN_SPEC = [
    ("WS", r"[ \t\r\f]+"),
    ("NEWLINE", r"\n"),
    ("COMMENT", r"#[^\n]*"),
    ("IRIREF", r"<[^<>\"{}|^`\\\x00-\x20]*>"),
    ("VAR", r"[?$][A-Za-z0-9_·À-￿]+"),
    ("BLANK", r"_:[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?"),
    ("STRING", r'"(?:[^"\\\n\r]|\\.)*"|\'(?:[^\'\\\n\r]|\\.)*\''),
    ("LANG", r"@[a-zA-Z]+(?:-[a-zA-Z0-9]+)*"),
    ("DTYPE", r"\^\^"),
    ("PNAME", r"(?:[A-Za-z][A-Za-z0-9_\-.]*)?:(?:[A-Za-z0-9_:%](?:[A-Za-z0-9_\-.:%]*[A-Za-z0-9_\-:%])?)?"),
    ("KEYWORD", r"[A-Za-z]+"),
    ("PUNCT", r"[{}.;,*]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC))


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise QueryError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "NEWLINE":
            line += 1
            line_start = m.end()
        elif kind not in ("WS", "COMMENT"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("EOF", "", line, pos - line_start + 1))
    return tokens


def _unescape(body: str, tok: _Token) -> str:
    out: list[str] = []
    i = 0
    while i < len(body):
        c = body[i]
        if c != "\\":
            out.append(c)
            i += 1
            continue
        nxt = body[i + 1:i + 2]
        if nxt in _ECHAR:
            out.append(_ECHAR[nxt])
            i += 2
        elif nxt in ("u", "U"):
            width = 4 if nxt == "u" else 8
            digits = body[i + 2:i + 2 + width]
            try:
                out.append(chr(int(digits, 16)))
            except ValueError:
                raise QueryError("bad unicode escape in string", tok.line, tok.column) from None
            if len(digits) != width:
                raise QueryError("bad unicode escape in string", tok.line, tok.column)
            i += 2 + width
        else:
            raise QueryError(f"bad escape \\{nxt} in string", tok.line, tok.column)
    return "".join(out)


class _Parser:
    def __init__(self, text: str, dictionary: Dictionary, overrides: Mapping[str, str] | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.dictionary = dictionary
        self.overrides = dict(overrides or {})
        self.prefixes: dict[str, str] = {}
        self.blanks: dict[str, str] = {}

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: _Token | None = None) -> QueryError:
        tok = tok or self.tok
        return QueryError(message, tok.line, tok.column)

    def advance(self) -> _Token:
        tok = self.tok
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at_keyword(self, word: str) -> bool:
        return self.tok.kind == "KEYWORD" and self.tok.text.upper() == word

    def expect_keyword(self, word: str) -> None:
        if not self.at_keyword(word):
            raise self.error(f"expected {word}, found {self.tok.text or 'end of input'!r}")
        self.advance()

    def expect_punct(self, ch: str) -> None:
        if self.tok.kind != "PUNCT" or self.tok.text != ch:
            raise self.error(f"expected {ch!r}, found {self.tok.text or 'end of input'!r}")
        self.advance()

    def at_punct(self, ch: str) -> bool:
        return self.tok.kind == "PUNCT" and self.tok.text == ch

    def parse(self) -> BgpQuery:
        while self.at_keyword("PREFIX"):
            self.advance()
            name = self.advance()
            if name.kind != "PNAME" or not name.text.endswith(":") or name.text.count(":") != 1:
                raise self.error("expected prefix name like 'ub:'", name)
            iri = self.advance()
            if iri.kind != "IRIREF":
                raise self.error("expected IRI in PREFIX declaration", iri)
            self.prefixes[name.text[:-1]] = iri.text[1:-1]
        self.prefixes.update(self.overrides)

        self.expect_keyword("SELECT")
        if self.at_keyword("DISTINCT"):
            self.advance()
        projection: list[str] | None = []
        if self.at_punct("*"):
            self.advance()
            projection = None
        else:
            while self.tok.kind == "VAR":
                projection.append(self.advance().text[1:])
            if not projection:
                raise self.error("expected projection variables or '*'")
        self.expect_keyword("WHERE")
        self.expect_punct("{")
        patterns = self.parse_triples()
        self.expect_punct("}")
        if self.tok.kind != "EOF":
            raise self.error(f"unexpected {self.tok.text!r} after query body")
        if not patterns:
            raise self.error("empty basic graph pattern")

        seen: dict[str, None] = {}
        for p in patterns:
            for t in p:
                if isinstance(t, Var):
                    seen.setdefault(t.name)
        if projection is None:
            projection = [v for v in seen if not v.startswith("_:")]
        else:
            for v in projection:
                if v not in seen:
                    raise QueryError(f"projection variable ?{v} does not occur in any pattern")
        if not is_connected(patterns):
            raise QueryError("basic graph pattern is not connected")
        return BgpQuery(tuple(dict.fromkeys(projection)), tuple(patterns), dict(self.prefixes))

    def parse_triples(self) -> list[TriplePattern]:
        patterns: list[TriplePattern] = []
        while not self.at_punct("}") and self.tok.kind != "EOF":
            s = self.term("subject")
            while True:
                p = self.term("predicate")
                while True:
                    o = self.term("object")
                    patterns.append(TriplePattern(s, p, o))
                    if not self.at_punct(","):
                        break
                    self.advance()
                if not self.at_punct(";"):
                    break
                self.advance()
                if self.at_punct(".") or self.at_punct("}"):
                    break
            if self.at_punct("."):
                self.advance()
            elif not self.at_punct("}"):
                raise self.error(f"expected '.' or '}}', found {self.tok.text or 'end of input'!r}")
        return patterns

    def term(self, position: str) -> PatternTerm:
        tok = self.advance()
        kind = tok.kind
        if kind == "VAR":
            return Var(tok.text[1:])
        if kind == "BLANK":
            if position == "predicate":
                raise self.error("blank node in predicate position", tok)
            label = tok.text[2:]
            if label not in self.blanks:
                self.blanks[label] = f"_:b{len(self.blanks)}"
            return Var(self.blanks[label])
        if kind == "IRIREF":
            if tok.text == "<>":
                raise self.error("empty IRI", tok)
            return self.const(Term.iri(tok.text[1:-1]))
        if kind == "PNAME":
            return self.const(Term.iri(self.expand(tok)))
        if kind == "KEYWORD" and tok.text == "a" and position == "predicate":
            return self.const(Term.iri(RDF_TYPE))
        if kind == "STRING":
            if position == "predicate":
                raise self.error("literal in predicate position", tok)
            lexical = _unescape(tok.text[1:-1], tok)
            if self.tok.kind == "LANG":
                return self.const(Term.literal(lexical, lang=self.advance().text[1:]))
            if self.tok.kind == "DTYPE":
                self.advance()
                dt = self.advance()
                if dt.kind == "IRIREF":
                    return self.const(Term.literal(lexical, datatype=dt.text[1:-1]))
                if dt.kind == "PNAME":
                    return self.const(Term.literal(lexical, datatype=self.expand(dt)))
                raise self.error("expected datatype IRI after '^^'", dt)
            return self.const(Term.literal(lexical))
        raise self.error(f"expected {position}, found {tok.text or 'end of input'!r}", tok)

    def expand(self, tok: _Token) -> str:
        prefix, _, local = tok.text.partition(":")
        if prefix not in self.prefixes:
            raise self.error(f"undeclared prefix {prefix + ':'!r}", tok)
        iri = self.prefixes[prefix] + local
        if not iri:
            raise self.error("empty IRI", tok)
        return iri

    def const(self, term: Term) -> Const:
        return Const(self.dictionary.id_of(term))


def parse_query(text: str, dictionary: Dictionary,
                prefixes: Mapping[str, str] | None = None) -> BgpQuery:
    """Parse ``PREFIX* SELECT vars|* WHERE { triples }``.

    ``prefixes`` override same-named declarations in the text. Constants are
    interned into ``dictionary``; ones unknown to the data get fresh ids and
    simply match nothing.
    """
    return _Parser(text, dictionary, prefixes).parse()


def parse_prefix_option(values: Iterable[str]) -> dict[str, str]:
    """Turn ``name=IRI`` strings into a prefix table."""
    out: dict[str, str] = {}
    for item in values:
        name, sep, iri = item.partition("=")
        if not sep or not iri:
            raise ValueError(f"prefix override must look like name=IRI, got {item!r}")
        out[name.rstrip(":")] = iri.strip("<>")
    return out
