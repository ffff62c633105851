"""Binding tables: sets of variable-to-term-id rows with a fixed schema."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .rdf import TermId

Row = tuple[TermId, ...]


class SchemaMismatch(RuntimeError):
    """Two tables that must share a schema do not."""


@dataclass(frozen=True, slots=True)
class MTable:
    """A deduplicated set of binding rows.

    ``schema`` is kept sorted so that tables over the same variables line up
    column for column; ``rows`` are tuples in schema order.
    """

    schema: tuple[str, ...]
    rows: frozenset[Row]

    def __post_init__(self) -> None:
        if list(self.schema) != sorted(set(self.schema)):
            raise ValueError(f"schema must be sorted and duplicate-free: {self.schema}")

    @classmethod
    def empty(cls, schema: Iterable[str] = ()) -> MTable:
        return cls(tuple(sorted(schema)), frozenset())

    @classmethod
    def unit(cls) -> MTable:
        """The join identity: no columns, one empty row."""
        return cls((), frozenset({()}))

    @classmethod
    def of(cls, schema: Sequence[str], rows: Iterable[Sequence[TermId]]) -> MTable:
        """Build from rows given in an arbitrary column order."""
        order = sorted(range(len(schema)), key=lambda i: schema[i])
        if len(set(schema)) != len(schema):
            raise ValueError(f"duplicate variable in schema {schema}")
        cols = tuple(schema[i] for i in order)
        out = set()
        for r in rows:
            if len(r) != len(schema):
                raise ValueError(f"row {r!r} does not match schema {schema}")
            out.add(tuple(r[i] for i in order))
        return cls(cols, frozenset(out))

    @classmethod
    def from_bindings(cls, bindings: Iterable[Mapping[str, TermId]],
                      schema: Iterable[str] | None = None) -> MTable:
        bindings = list(bindings)
        if schema is None:
            if not bindings:
                raise ValueError("schema required for an empty table")
            schema = bindings[0].keys()
        cols = tuple(sorted(schema))
        rows = set()
        for b in bindings:
            if set(b) != set(cols):
                raise ValueError(f"binding {dict(b)} does not match schema {cols}")
            rows.add(tuple(b[c] for c in cols))
        return cls(cols, frozenset(rows))

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def is_empty(self) -> bool:
        return not self.rows

    def bindings(self) -> list[dict[str, TermId]]:
        return [dict(zip(self.schema, r)) for r in self.rows]

    def column(self, var: str) -> set[TermId]:
        i = self.schema.index(var)
        return {r[i] for r in self.rows}

    def union(self, other: MTable) -> MTable:
        """Vertical append with dedup. An empty table adopts the other's schema."""
        if not other.rows:
            return self
        if not self.rows:
            return other
        if self.schema != other.schema:
            raise SchemaMismatch(f"cannot union {self.schema} with {other.schema}")
        return MTable(self.schema, self.rows | other.rows)

    def extend(self, mapping: Mapping[str, TermId]) -> MTable:
        """Append ``mapping`` to every row; rows that disagree on a shared variable are dropped."""
        return self.join(MTable.from_bindings([mapping]))

    def join(self, other: MTable) -> MTable:
        """Natural join on shared variables (a cross product when there are none)."""
        shared = [v for v in self.schema if v in other.schema]
        out_schema = tuple(sorted(set(self.schema) | set(other.schema)))
        if not self.rows or not other.rows:
            return MTable(out_schema, frozenset())
        left, right = (self, other) if len(self.rows) <= len(other.rows) else (other, self)
        l_key = [left.schema.index(v) for v in shared]
        r_key = [right.schema.index(v) for v in shared]
        # each output column comes from the left row if present there, else from the right row
        picks = [(0, left.schema.index(v)) if v in left.schema else (1, right.schema.index(v))
                 for v in out_schema]
        index: dict[Row, list[Row]] = {}
        for r in left.rows:
            index.setdefault(tuple(r[i] for i in l_key), []).append(r)
        out = set()
        for r in right.rows:
            matches = index.get(tuple(r[i] for i in r_key))
            if not matches:
                continue
            for l in matches:
                pair = (l, r)
                out.add(tuple(pair[side][i] for side, i in picks))
        return MTable(out_schema, frozenset(out))

    def project(self, variables: Iterable[str]) -> MTable:
        cols = tuple(sorted(set(variables)))
        missing = [v for v in cols if v not in self.schema]
        if missing:
            raise KeyError(f"variables {missing} not in schema {self.schema}")
        idx = [self.schema.index(v) for v in cols]
        return MTable(cols, frozenset(tuple(r[i] for i in idx) for r in self.rows))
