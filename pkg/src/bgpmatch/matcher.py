"""Iterative vertex-centric matching of a basic graph pattern.

One superstep per triple pattern. Every vertex carries its label, the
Match_Track (M_T) tables of partial matches that end at it, and an end flag.
A superstep computes candidate vertices from the current end vertices, sends
messages over the triplet view (the destination receives the extended partial
matches, the source is told it no longer ends a path), merges them per vertex
and folds them back into the vertex states.

Partial matches are grouped into *tracks*. A track is a set of already
evaluated patterns whose joint matches sit at the vertex bound to one
*anchor* position (a variable, or a constant vertex). A source vertex only
extends the rows of the track anchored at the pattern's subject, and a
destination only joins the rows of the track anchored at its object; those
two tracks are then consumed everywhere and replaced by the merged track,
anchored at the object. Tracks that the pattern does not touch keep their
end vertices and meet the rest in the final join.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .graph import (Edge, PropertyGraph, Triplet, VertexId, accumulate, aggregate_messages,
                    build_graph, join_vertices)
from .query import Const, PatternTerm, TriplePattern, Var
from .rdf import TermId, Triple
from .table import MTable

Tables = Mapping[int, MTable]
_NO_TABLES: Tables = {}


@dataclass(frozen=True, slots=True)
class VertexState:
    label: TermId
    tables: Tables = field(default_factory=dict)
    end_flag: bool = False

    @property
    def rows(self) -> int:
        return sum(len(t) for t in self.tables.values())


@dataclass(frozen=True, slots=True)
class VertexMessage:
    m_t: MTable
    end_flag: bool


SOURCE_MESSAGE = VertexMessage(MTable.empty(), False)


def initial_state(vid: VertexId) -> VertexState:
    return VertexState(vid, _NO_TABLES, False)


def new_match_graph(triples: Iterable[Triple]) -> PropertyGraph[VertexState]:
    return build_graph(triples, initial_state)


# --- tracks ------------------------------------------------------------------

@dataclass(frozen=True)
class Track:
    id: int
    anchor: PatternTerm
    schema: frozenset[str]
    patterns: tuple[int, ...]


@dataclass(frozen=True)
class Step:
    """Static plan for one superstep."""

    index: int
    pattern: TriplePattern
    src_track: Track | None
    dst_track: Track | None
    track: Track
    bound: frozenset[str]
    live: tuple[Track, ...]

    @property
    def consumed(self) -> frozenset[int]:
        return frozenset(t.id for t in (self.src_track, self.dst_track) if t is not None)


def plan_tracks(patterns: Sequence[TriplePattern]) -> list[Step]:
    """Work out, per pattern, which tracks get extended, joined and replaced."""
    live: list[Track] = []
    bound: set[str] = set()
    steps = []
    for k, pattern in enumerate(patterns):
        src = next((t for t in live if t.anchor == pattern.s), None)
        dst = next((t for t in live if t.anchor == pattern.o), None)
        if dst is not None and dst is src:
            dst = None
        merged = [t for t in (src, dst) if t is not None]
        schema = frozenset(pattern.variables).union(*(t.schema for t in merged))
        covered = tuple(sorted({k}.union(*(t.patterns for t in merged))))
        track = Track(k, pattern.o, schema, covered)
        live = [t for t in live if t not in merged] + [track]
        steps.append(Step(k, pattern, src, dst, track, frozenset(bound), tuple(live)))
        bound |= pattern.variables
    return steps


# --- candidates --------------------------------------------------------------

@dataclass(frozen=True)
class CandidateSets:
    """``None`` stands for "every vertex"."""

    subject: frozenset[VertexId] | None
    obj: frozenset[VertexId] | None
    predicate: PatternTerm


def end_vertices(g: PropertyGraph[VertexState]) -> list[tuple[VertexId, VertexState]]:
    return [(vid, st) for vid, st in g.vertices.items() if st.end_flag]


def _bindings_of(var: str, states: Iterable[VertexState]) -> Iterable[set[TermId]]:
    for st in states:
        for table in st.tables.values():
            if var in table.schema:
                yield table.column(var)


def find_candidate_vertices(g: PropertyGraph[VertexState], pattern: TriplePattern,
                            bound_vars: Iterable[str], threads: int = 1) -> CandidateSets:
    bound = set(bound_vars)
    ends: list[VertexState] | None = None
    cache: dict[str, frozenset[VertexId]] = {}

    def position(term: PatternTerm) -> frozenset[VertexId] | None:
        nonlocal ends
        if isinstance(term, Const):
            return frozenset({term.id}) if term.id in g.vertices else frozenset()
        if term.name not in bound:
            return None
        if term.name not in cache:
            if ends is None:
                ends = [st for _, st in end_vertices(g)]
            values = accumulate(_bindings_of(term.name, ends), threads)
            # predicate-only bindings are edge labels, not vertices
            cache[term.name] = frozenset(v for v in values if v in g.vertices)
        return cache[term.name]

    return CandidateSets(position(pattern.s), position(pattern.o), pattern.p)


# --- superstep functions -----------------------------------------------------

@dataclass(frozen=True)
class Superstep:
    step: Step
    candidates: CandidateSets

    @property
    def pattern(self) -> TriplePattern:
        return self.step.pattern


def _match_pattern(pattern: TriplePattern, values: tuple[TermId, TermId, TermId]) -> dict[str, TermId] | None:
    mapping: dict[str, TermId] = {}
    for term, value in zip(pattern, values):
        if isinstance(term, Const):
            if term.id != value:
                return None
        else:
            seen = mapping.get(term.name)
            if seen is None:
                mapping[term.name] = value
            elif seen != value:
                return None
    return mapping


def match_constants(pattern: TriplePattern, values: tuple[TermId, TermId, TermId]) -> bool:
    return all(not isinstance(t, Const) or t.id == v for t, v in zip(pattern, values))


def send_msg(t: Triplet, ctx: Superstep) -> list[tuple[VertexId, VertexMessage]]:
    cands = ctx.candidates
    if cands.subject is not None and t.src_id not in cands.subject:
        return []
    if cands.obj is not None and t.dst_id not in cands.obj:
        return []
    pattern = ctx.pattern
    values = (t.src_id, t.edge_label, t.dst_id)
    to_src = (t.src_id, SOURCE_MESSAGE)
    if not match_constants(pattern, values):
        return [to_src]
    mapping = _match_pattern(pattern, values)
    if mapping is None:
        return [to_src]

    step = ctx.step
    if step.src_track is not None:
        src_rows = t.src_prop.tables.get(step.src_track.id)
        if src_rows is None:
            return [to_src]
        rows = src_rows.extend(mapping)
    else:
        rows = MTable.from_bindings([mapping], schema=pattern.variables)
    if step.dst_track is not None:
        dst_rows = t.dst_prop.tables.get(step.dst_track.id)
        if dst_rows is None:
            return [to_src]
        rows = rows.join(dst_rows)
    if rows.is_empty:
        return [to_src]
    return [(t.dst_id, VertexMessage(rows, True)), to_src]


def merge_msg(a: VertexMessage, b: VertexMessage) -> VertexMessage:
    """Vertical append of the tables, OR of the end flags."""
    return VertexMessage(a.m_t.union(b.m_t), a.end_flag or b.end_flag)


def join_mapper(vid: VertexId, old: VertexState, msg: VertexMessage, step: Step) -> VertexState:
    consumed = step.consumed
    tables = {k: v for k, v in old.tables.items() if k not in consumed}
    if not msg.m_t.is_empty:
        tables[step.track.id] = msg.m_t
    return VertexState(old.label, tables or _NO_TABLES, bool(tables))


def end_flag_sweep(g: PropertyGraph[VertexState], step: Step,
                   touched: Iterable[VertexId]) -> dict[VertexId, VertexState]:
    """Retire consumed-track tables at vertices no message reached this superstep.

    Those rows had no way to extend over the current pattern, so keeping them
    would hand stale partial matches to the final join.
    """
    consumed = step.consumed
    if not consumed:
        return {}
    touched = set(touched)
    updates = {}
    for vid, st in g.vertices.items():
        if vid in touched or not st.end_flag or consumed.isdisjoint(st.tables):
            continue
        tables = {k: v for k, v in st.tables.items() if k not in consumed}
        updates[vid] = VertexState(st.label, tables or _NO_TABLES, bool(tables))
    return updates


# --- driver ------------------------------------------------------------------

@dataclass
class IterationStats:
    pattern: str
    subject_candidates: int | None = None
    object_candidates: int | None = None
    edges_scanned: int = 0
    candidate_rejections: int = 0
    messages: int = 0
    destination_messages: int = 0
    end_vertices: int = 0
    mt_rows: int = 0
    skipped: bool = False
    millis: float = 0.0


@dataclass(frozen=True)
class EndTable:
    vertex: VertexId
    track: int
    table: MTable


@dataclass
class MatchResult:
    end_tables: list[EndTable]
    tracks: tuple[Track, ...]
    iterations: list[IterationStats]
    graph: PropertyGraph[VertexState]

    @property
    def empty(self) -> bool:
        return not self.end_tables


Observer = Callable[[Step, Superstep, PropertyGraph[VertexState], IterationStats], None]


def _edges_for(g: PropertyGraph[VertexState], pattern: TriplePattern) -> Sequence[Edge]:
    if isinstance(pattern.p, Const):
        return g.store.with_label(pattern.p.id)
    return g.store.edges


def _count_rejections(edges: Sequence[Edge], cands: CandidateSets) -> int:
    s, o = cands.subject, cands.obj
    if s is None and o is None:
        return 0
    return sum(1 for e in edges if (s is not None and e.src not in s) or (o is not None and e.dst not in o))


def do_match(g: PropertyGraph[VertexState], patterns: Sequence[TriplePattern],
             threads: int = 1, render: Callable[[TriplePattern], str] | None = None,
             observer: Observer | None = None) -> MatchResult:
    """Run one superstep per pattern, in the given order, and collect end-vertex tables."""
    render = render or (lambda p: p.render())
    steps = plan_tracks(patterns)
    stats: list[IterationStats] = []
    for step in steps:
        started = time.perf_counter()
        st = IterationStats(render(step.pattern))
        stats.append(st)
        cands = find_candidate_vertices(g, step.pattern, step.bound, threads)
        ctx = Superstep(step, cands)
        st.subject_candidates = None if cands.subject is None else len(cands.subject)
        st.object_candidates = None if cands.obj is None else len(cands.obj)

        edges = _edges_for(g, step.pattern)
        st.edges_scanned = len(edges)
        st.candidate_rejections = _count_rejections(edges, cands)
        emitted = [0, 0]
        lock = threading.Lock()

        def send(t: Triplet) -> list[tuple[VertexId, VertexMessage]]:
            out = send_msg(t, ctx)
            if out:
                with lock:
                    emitted[0] += len(out)
                    emitted[1] += len(out) == 2
            return out

        merged = aggregate_messages(g, send, merge_msg, edges=edges, threads=threads)
        st.messages, st.destination_messages = emitted
        g = join_vertices(g, merged, lambda vid, old, msg: join_mapper(vid, old, msg, step))
        g = join_vertices(g, end_flag_sweep(g, step, merged), lambda vid, old, new: new)

        ends = end_vertices(g)
        st.end_vertices = len(ends)
        st.mt_rows = sum(s.rows for _, s in ends)
        st.millis = (time.perf_counter() - started) * 1000
        if observer is not None:
            observer(step, ctx, g, st)
        if not any(step.track.id in s.tables for _, s in ends):
            for rest in steps[step.index + 1:]:
                stats.append(IterationStats(render(rest.pattern), skipped=True))
            return MatchResult([], steps[-1].live if steps else (), stats, g)

    live = steps[-1].live if steps else ()
    live_ids = {t.id for t in live}
    end_tables = [EndTable(vid, track, table)
                  for vid, s in end_vertices(g)
                  for track, table in sorted(s.tables.items())
                  if track in live_ids and not table.is_empty]
    return MatchResult(end_tables, live, stats, g)


def union_by_track(result: MatchResult) -> list[MTable]:
    """One table per live track: the union of that track's end-vertex tables."""
    groups: dict[int, MTable] = {}
    for et in result.end_tables:
        prev = groups.get(et.track)
        groups[et.track] = et.table if prev is None else prev.union(et.table)
    return [groups.get(t.id, MTable.empty(t.schema)) for t in result.tracks]
