"""Final solution assembly, output formats and a reference evaluator."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .query import BgpQuery, Const, TriplePattern, Var
from .rdf import Dictionary, Term, TermId, Triple, parse_term
from .table import MTable, Row


@dataclass(frozen=True)
class SolutionSet:
    """Projected solutions in a deterministic order (sorted by lexical form)."""

    variables: tuple[str, ...]
    rows: tuple[Row, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def as_set(self) -> frozenset[Row]:
        return frozenset(self.rows)

    def terms(self, dictionary: Dictionary) -> frozenset[tuple[Term, ...]]:
        return frozenset(tuple(dictionary.term_of(v) for v in r) for r in self.rows)

    def same_solutions(self, other: SolutionSet) -> bool:
        return self.variables == other.variables and self.as_set() == other.as_set()

    def to_tsv(self, dictionary: Dictionary) -> str:
        lines = ["\t".join("?" + v for v in self.variables)]
        for r in self.rows:
            lines.append("\t".join(dictionary.term_of(v).n3() for v in r))
        return "\n".join(lines) + "\n"

    def to_json(self, dictionary: Dictionary) -> str:
        body = {"vars": list(self.variables),
                "rows": [[dictionary.term_of(v).n3() for v in r] for r in self.rows]}
        return json.dumps(body, ensure_ascii=False) + "\n"


def read_tsv(text: str) -> tuple[tuple[str, ...], frozenset[tuple[Term, ...]]]:
    lines = text.rstrip("\n").split("\n")
    header = tuple(h[1:] for h in lines[0].split("\t")) if lines[0] else ()
    rows = frozenset(tuple(parse_term(c) for c in line.split("\t")) for line in lines[1:])
    return header, rows


def read_json(text: str) -> tuple[tuple[str, ...], frozenset[tuple[Term, ...]]]:
    body = json.loads(text)
    return tuple(body["vars"]), frozenset(tuple(parse_term(c) for c in r) for r in body["rows"])


def union_by_schema(tables: Iterable[MTable]) -> list[MTable]:
    """Merge tables with identical schemas by row-set union; others stay apart."""
    groups: dict[tuple[str, ...], MTable] = {}
    for t in tables:
        prev = groups.get(t.schema)
        groups[t.schema] = t if prev is None else MTable(t.schema, prev.rows | t.rows)
    return list(groups.values())


def natural_join_all(tables: Sequence[MTable]) -> MTable:
    """Natural join of every table.

    Starts from the widest table and keeps joining the one sharing the most
    variables with what has been accumulated (fewer rows first on ties);
    tables sharing nothing end up as cross products at the end.
    """
    if not tables:
        raise ValueError("natural_join_all needs at least one table")
    pending = list(tables)
    start = max(range(len(pending)), key=lambda i: (len(pending[i].schema), -len(pending[i]), -i))
    acc = pending.pop(start)
    while pending:
        cols = set(acc.schema)
        best = max(range(len(pending)),
                   key=lambda i: (len(cols & set(pending[i].schema)), -len(pending[i]), -i))
        acc = acc.join(pending.pop(best))
        if acc.is_empty:
            return MTable.empty(set(acc.schema).union(*(t.schema for t in pending)))
    return acc


def _sort_key(dictionary: Dictionary):
    def key(row: Row):
        terms = [dictionary.term_of(v) for v in row]
        return tuple((t.lexical, t.n3()) for t in terms)
    return key


def project(table: MTable, projection: Sequence[str], dictionary: Dictionary) -> SolutionSet:
    missing = [v for v in projection if v not in table.schema]
    if missing:
        raise KeyError(f"projection variables {missing} not bound by the table {table.schema}")
    idx = [table.schema.index(v) for v in projection]
    rows = {tuple(r[i] for i in idx) for r in table.rows}
    return SolutionSet(tuple(projection), tuple(sorted(rows, key=_sort_key(dictionary))))


def assemble(tables: Sequence[MTable], projection: Sequence[str], dictionary: Dictionary) -> SolutionSet:
    if not tables:
        return SolutionSet(tuple(projection), ())
    joined = natural_join_all(tables)
    if joined.is_empty:
        return SolutionSet(tuple(projection), ())
    return project(joined, projection, dictionary)


# --- reference evaluator -------------------------------------------------------

class _TripleIndex:
    def __init__(self, triples: Iterable[Triple]):
        self.all = sorted(set(triples))
        self.by: dict[tuple[int, ...], dict[tuple[int, ...], list[Triple]]] = {}
        for mask in [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]:
            idx = defaultdict(list)
            for t in self.all:
                idx[tuple(t[i] for i in mask)].append(t)
            self.by[mask] = idx
        self.full = set(self.all)

    def lookup(self, fixed: dict[int, TermId]) -> Iterable[Triple]:
        if not fixed:
            return self.all
        if len(fixed) == 3:
            t = Triple(fixed[0], fixed[1], fixed[2])
            return [t] if t in self.full else []
        mask = tuple(sorted(fixed))
        return self.by[mask].get(tuple(fixed[i] for i in mask), [])


def oracle_evaluate(triples: Iterable[Triple], query: BgpQuery | Sequence[TriplePattern],
                    dictionary: Dictionary, projection: Sequence[str] | None = None) -> SolutionSet:
    """All mappings under which every pattern is a data triple, by index nested loops.

    Shares no code with the matcher; patterns are taken greedily by how many
    positions are already fixed.
    """
    if isinstance(query, BgpQuery):
        patterns, projection = list(query.patterns), list(query.projection)
    else:
        patterns = list(query)
        if projection is None:
            raise ValueError("projection required with a bare pattern list")
    index = _TripleIndex(triples)
    solutions: list[dict[str, TermId]] = [{}]
    remaining = list(patterns)
    while remaining and solutions:
        bound = set(solutions[0])
        def fixed_count(p: TriplePattern) -> int:
            return sum(isinstance(t, Const) or t.name in bound for t in p)
        pattern = max(remaining, key=fixed_count)
        remaining.remove(pattern)
        nxt = []
        for mu in solutions:
            fixed = {}
            for i, t in enumerate(pattern):
                if isinstance(t, Const):
                    fixed[i] = t.id
                elif t.name in mu:
                    fixed[i] = mu[t.name]
            for triple in index.lookup(fixed):
                ext = dict(mu)
                ok = True
                for i, t in enumerate(pattern):
                    if isinstance(t, Var):
                        if ext.setdefault(t.name, triple[i]) != triple[i]:
                            ok = False
                            break
                if ok:
                    nxt.append(ext)
        solutions = nxt
    if remaining:
        solutions = []
    rows = {tuple(mu[v] for v in projection) for mu in solutions}
    return SolutionSet(tuple(projection), tuple(sorted(rows, key=_sort_key(dictionary))))
