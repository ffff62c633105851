"""RDF terms, dictionary encoding and a line-oriented N-Triples reader/writer."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, TextIO


class TermKind(enum.Enum):
    IRI = "iri"
    LITERAL = "literal"
    BLANK = "blank"


@dataclass(frozen=True, slots=True)
class Term:
    kind: TermKind
    lexical: str
    datatype: str | None = None
    lang: str | None = None

    def __post_init__(self) -> None:
        if self.kind is TermKind.LITERAL:
            if self.datatype is not None and self.lang is not None:
                raise ValueError("a literal cannot carry both a datatype and a language tag")
        else:
            if self.datatype is not None or self.lang is not None:
                raise ValueError(f"{self.kind.value} terms take no datatype or language tag")
            if not self.lexical:
                raise ValueError(f"empty {self.kind.value} term")

    @classmethod
    def iri(cls, value: str) -> Term:
        return cls(TermKind.IRI, value)

    @classmethod
    def literal(cls, value: str, datatype: str | None = None, lang: str | None = None) -> Term:
        return cls(TermKind.LITERAL, value, datatype, lang)

    @classmethod
    def blank(cls, label: str) -> Term:
        return cls(TermKind.BLANK, label)

    @property
    def is_iri(self) -> bool:
        return self.kind is TermKind.IRI

    @property
    def is_literal(self) -> bool:
        return self.kind is TermKind.LITERAL

    @property
    def is_blank(self) -> bool:
        return self.kind is TermKind.BLANK

    def n3(self) -> str:
        """Render in N-Triples syntax."""
        if self.kind is TermKind.IRI:
            return f"<{self.lexical}>"
        if self.kind is TermKind.BLANK:
            return f"_:{self.lexical}"
        out = '"' + escape_string(self.lexical) + '"'
        if self.lang is not None:
            out += "@" + self.lang
        elif self.datatype is not None:
            out += f"^^<{self.datatype}>"
        return out

    def __str__(self) -> str:
        return self.n3()


TermId = int


class Triple(NamedTuple):
    s: TermId
    p: TermId
    o: TermId


class Dictionary:
    """Append-only bijection between terms and dense integer ids."""

    def __init__(self) -> None:
        self._ids: dict[Term, TermId] = {}
        self._terms: list[Term] = []

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, term: object) -> bool:
        return term in self._ids

    def id_of(self, term: Term) -> TermId:
        """Intern ``term``, assigning the next id on first sight."""
        tid = self._ids.get(term)
        if tid is None:
            tid = len(self._terms)
            self._ids[term] = tid
            self._terms.append(term)
        return tid

    def lookup(self, term: Term) -> TermId | None:
        """Id of ``term`` without interning it."""
        return self._ids.get(term)

    def term_of(self, tid: TermId) -> Term:
        if not isinstance(tid, int) or tid < 0 or tid >= len(self._terms):
            raise KeyError(f"unknown term id {tid!r}")
        return self._terms[tid]

    def terms(self) -> list[Term]:
        return list(self._terms)


class NTriplesError(ValueError):
    def __init__(self, lineno: int, reason: str, source: str | None = None):
        self.lineno = lineno
        self.reason = reason
        self.source = source
        where = f"{source}:{lineno}" if source else f"line {lineno}"
        super().__init__(f"{where}: {reason}")


_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_ESCAPE_OUT = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_ESCAPE_OUT_RE = re.compile(r'[\\"\n\r\t]')

_WS = re.compile(r"[ \t]*")
_BLANK_LABEL = re.compile(r"_:([A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)")
_PLAIN_IRI = re.compile(r'<([^\x00-\x20<>"{}|^`\\]+)>')
_PLAIN_STRING = re.compile(r'"([^"\\\n\r]*)"')
_LANG = re.compile(r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)")


def escape_string(value: str) -> str:
    return _ESCAPE_OUT_RE.sub(lambda m: _ESCAPE_OUT[m.group()], value)


class _Cursor:
    __slots__ = ("text", "pos", "lineno")

    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def fail(self, reason: str) -> NTriplesError:
        return NTriplesError(self.lineno, f"{reason} (column {self.pos + 1})")

    def skip_ws(self) -> None:
        self.pos = _WS.match(self.text, self.pos).end()

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""


def _read_uchar(cur: _Cursor, width: int) -> str:
    digits = cur.text[cur.pos:cur.pos + width]
    if len(digits) != width or not all(c in "0123456789abcdefABCDEF" for c in digits):
        raise cur.fail("bad escape: malformed unicode escape")
    cur.pos += width
    try:
        return chr(int(digits, 16))
    except ValueError:
        raise cur.fail("bad escape: code point out of range") from None


def _read_iri(cur: _Cursor) -> str:
    # caller has seen '<'
    m = _PLAIN_IRI.match(cur.text, cur.pos)
    if m:
        cur.pos = m.end()
        return m.group(1)
    cur.pos += 1
    text = cur.text
    out: list[str] = []
    while True:
        if cur.pos >= len(text):
            raise cur.fail("unterminated IRI")
        c = text[cur.pos]
        if c == ">":
            cur.pos += 1
            break
        if c == "\\":
            kind = text[cur.pos + 1:cur.pos + 2]
            cur.pos += 2
            if kind == "u":
                out.append(_read_uchar(cur, 4))
            elif kind == "U":
                out.append(_read_uchar(cur, 8))
            else:
                raise cur.fail("bad escape in IRI")
            continue
        if c in ' <"{}|^`' or ord(c) <= 0x20:
            raise cur.fail(f"illegal character {c!r} in IRI")
        out.append(c)
        cur.pos += 1
    iri = "".join(out)
    if not iri:
        raise cur.fail("empty IRI")
    return iri


def _read_string(cur: _Cursor) -> str:
    # caller has seen '"'
    m = _PLAIN_STRING.match(cur.text, cur.pos)
    if m:
        cur.pos = m.end()
        return m.group(1)
    cur.pos += 1
    text = cur.text
    out: list[str] = []
    while True:
        if cur.pos >= len(text):
            raise cur.fail("unterminated string literal")
        c = text[cur.pos]
        if c == '"':
            cur.pos += 1
            return "".join(out)
        if c == "\\":
            kind = text[cur.pos + 1:cur.pos + 2]
            cur.pos += 2
            if kind in _ECHAR:
                out.append(_ECHAR[kind])
            elif kind == "u":
                out.append(_read_uchar(cur, 4))
            elif kind == "U":
                out.append(_read_uchar(cur, 8))
            else:
                raise cur.fail(f"bad escape \\{kind}")
            continue
        if c in "\n\r":
            raise cur.fail("raw line break in string literal")
        out.append(c)
        cur.pos += 1


def _read_term(cur: _Cursor, position: str) -> Term:
    c = cur.peek()
    if c == "<":
        return Term.iri(_read_iri(cur))
    if c == "_":
        m = _BLANK_LABEL.match(cur.text, cur.pos)
        if not m:
            raise cur.fail("malformed blank node label")
        cur.pos = m.end()
        if position == "predicate":
            raise cur.fail("blank node in predicate position")
        return Term.blank(m.group(1))
    if c == '"':
        if position != "object":
            raise cur.fail(f"literal in {position} position")
        lexical = _read_string(cur)
        if cur.text.startswith("^^", cur.pos):
            cur.pos += 2
            if cur.peek() != "<":
                raise cur.fail("datatype must be an IRI")
            return Term.literal(lexical, datatype=_read_iri(cur))
        m = _LANG.match(cur.text, cur.pos)
        if m:
            cur.pos = m.end()
            return Term.literal(lexical, lang=m.group(1))
        return Term.literal(lexical)
    if not c:
        raise cur.fail(f"missing {position}")
    raise cur.fail(f"unexpected character {c!r} where {position} expected")


def parse_line(line: str, lineno: int = 1) -> tuple[Term, Term, Term] | None:
    """Parse one N-Triples line; ``None`` for blank and comment lines."""
    cur = _Cursor(line.rstrip("\r\n"), lineno)
    cur.skip_ws()
    if cur.pos >= len(cur.text) or cur.peek() == "#":
        return None
    s = _read_term(cur, "subject")
    cur.skip_ws()
    p = _read_term(cur, "predicate")
    cur.skip_ws()
    o = _read_term(cur, "object")
    cur.skip_ws()
    if cur.peek() != ".":
        raise cur.fail("missing final dot")
    cur.pos += 1
    cur.skip_ws()
    if cur.pos < len(cur.text) and cur.peek() != "#":
        raise cur.fail("trailing content after final dot")
    return s, p, o


def parse_term(text: str) -> Term:
    """Parse a single term written in N-Triples syntax."""
    cur = _Cursor(text.strip(), 1)
    term = _read_term(cur, "object")
    if cur.pos != len(cur.text):
        raise cur.fail("trailing content after term")
    return term


def iter_ntriples(lines: Iterable[str], dictionary: Dictionary,
                  source: str | None = None) -> Iterator[Triple]:
    """Stream triples from ``lines``, interning terms as they appear.

    Fails on the first malformed line.
    """
    id_of = dictionary.id_of
    for lineno, line in enumerate(lines, start=1):
        try:
            parsed = parse_line(line, lineno)
        except NTriplesError as exc:
            if source is None:
                raise
            raise NTriplesError(lineno, exc.reason, source) from None
        if parsed is not None:
            s, p, o = parsed
            yield Triple(id_of(s), id_of(p), id_of(o))


def parse_ntriples(stream: Iterable[str] | str, dictionary: Dictionary | None = None,
                   source: str | None = None) -> tuple[list[Triple], Dictionary]:
    """Parse a whole document. Duplicate statements are kept."""
    if dictionary is None:
        dictionary = Dictionary()
    lines = stream.splitlines() if isinstance(stream, str) else stream
    return list(iter_ntriples(lines, dictionary, source)), dictionary


def load_ntriples(path: str, dictionary: Dictionary | None = None) -> tuple[list[Triple], Dictionary]:
    with open(path, encoding="utf-8") as fh:
        return parse_ntriples(fh, dictionary, source=str(path))


def write_ntriples(triples: Iterable[Triple], dictionary: Dictionary, out: TextIO | None = None) -> str:
    """Serialize triples, one statement per line. Returns the text when ``out`` is None."""
    term_of = dictionary.term_of
    lines = (f"{term_of(s).n3()} {term_of(p).n3()} {term_of(o).n3()} .\n" for s, p, o in triples)
    if out is None:
        return "".join(lines)
    for line in lines:
        out.write(line)
    return ""
