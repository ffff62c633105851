"""Load a dataset once, then evaluate queries against it."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping

from .graph import PropertyGraph
from .matcher import IterationStats, MatchResult, VertexState, do_match, new_match_graph, union_by_track
from .query import BgpQuery, order_bgp, parse_query
from .rdf import Dictionary, Triple, load_ntriples, parse_ntriples
from .results import SolutionSet, assemble


@dataclass
class RunStats:
    iterations: list[IterationStats] = field(default_factory=list)
    parse_ms: float = 0.0
    match_ms: float = 0.0
    join_ms: float = 0.0
    solutions: int = 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["iteration_count"] = len(self.iterations)
        return out


class Dataset:
    def __init__(self, triples: list[Triple], dictionary: Dictionary, parse_ms: float = 0.0):
        self.triples = triples
        self.dictionary = dictionary
        self.graph: PropertyGraph[VertexState] = new_match_graph(triples)
        self.parse_ms = parse_ms

    @classmethod
    def from_file(cls, path: str) -> Dataset:
        started = time.perf_counter()
        triples, dictionary = load_ntriples(path)
        return cls(triples, dictionary, (time.perf_counter() - started) * 1000)

    @classmethod
    def from_text(cls, text: str | Iterable[str]) -> Dataset:
        triples, dictionary = parse_ntriples(text)
        return cls(triples, dictionary)

    def parse(self, text: str, prefixes: Mapping[str, str] | None = None) -> BgpQuery:
        return parse_query(text, self.dictionary, prefixes)

    def match(self, query: BgpQuery, threads: int = 1, order=None, observer=None) -> MatchResult:
        patterns = order_bgp(query) if order is None else list(order)
        return do_match(self.graph, patterns, threads=threads,
                        render=lambda p: p.render(self.dictionary), observer=observer)

    def run(self, query: BgpQuery, threads: int = 1, order=None) -> tuple[SolutionSet, RunStats]:
        stats = RunStats(parse_ms=self.parse_ms)
        started = time.perf_counter()
        result = self.match(query, threads=threads, order=order)
        stats.match_ms = (time.perf_counter() - started) * 1000
        stats.iterations = result.iterations
        started = time.perf_counter()
        solutions = assemble(union_by_track(result) if not result.empty else [],
                             query.projection, self.dictionary)
        stats.join_ms = (time.perf_counter() - started) * 1000
        stats.solutions = len(solutions)
        return solutions, stats

    def evaluate(self, query: BgpQuery | str, threads: int = 1) -> SolutionSet:
        if isinstance(query, str):
            query = self.parse(query)
        return self.run(query, threads=threads)[0]
