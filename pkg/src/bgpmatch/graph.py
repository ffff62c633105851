"""A small in-memory, vertex-centric graph with triplet-view operators.

The operator set mirrors what an iterative message-passing matcher needs:
vertex and edge collections, a triplet view, ``aggregate_messages`` (map over
triplets, reduce per destination vertex) and ``join_vertices`` (fold the
reduced messages back into vertex properties). Graph values are immutable;
each superstep yields a new vertex table while the edge store is shared.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Generic, Hashable, Iterable, Iterator, Mapping, NamedTuple, Sequence, TypeVar

from .rdf import TermId, Triple

V = TypeVar("V")
M = TypeVar("M")
T = TypeVar("T", bound=Hashable)

VertexId = int


class Edge(NamedTuple):
    src: VertexId
    dst: VertexId
    label: TermId


class Triplet(NamedTuple):
    src_id: VertexId
    dst_id: VertexId
    src_prop: Any
    dst_prop: Any
    edge_label: TermId


class GraphContractError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeStore:
    """Deduplicated edges in first-seen order plus a label index. Shared between graph versions."""

    edges: tuple[Edge, ...]
    by_label: Mapping[TermId, tuple[int, ...]]

    @classmethod
    def from_edges(cls, edges: Iterable[Edge]) -> EdgeStore:
        unique = tuple(dict.fromkeys(edges))
        index: dict[TermId, list[int]] = {}
        for i, e in enumerate(unique):
            index.setdefault(e.label, []).append(i)
        return cls(unique, {k: tuple(v) for k, v in index.items()})

    def __len__(self) -> int:
        return len(self.edges)

    def with_label(self, label: TermId) -> list[Edge]:
        return [self.edges[i] for i in self.by_label.get(label, ())]


@dataclass(frozen=True)
class PropertyGraph(Generic[V]):
    vertices: Mapping[VertexId, V]
    store: EdgeStore

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.store.edges

    @property
    def vertex_labels(self) -> Mapping[VertexId, TermId]:
        # A vertex is keyed by the id of the term it stands for.
        return _IdentityLabels(self.vertices)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.store)

    def with_vertices(self, vertices: Mapping[VertexId, V]) -> PropertyGraph[V]:
        return PropertyGraph(vertices, self.store)


class _IdentityLabels(Mapping[VertexId, TermId]):
    def __init__(self, vertices: Mapping[VertexId, object]):
        self._vertices = vertices

    def __getitem__(self, vid: VertexId) -> TermId:
        if vid not in self._vertices:
            raise KeyError(vid)
        return vid

    def __iter__(self) -> Iterator[VertexId]:
        return iter(self._vertices)

    def __len__(self) -> int:
        return len(self._vertices)


def build_graph(triples: Iterable[Triple], initial: Callable[[VertexId], V]) -> PropertyGraph[V]:
    """One vertex per distinct subject/object term, one edge per distinct triple."""
    edges = [Edge(s, o, p) for s, p, o in triples]
    store = EdgeStore.from_edges(edges)
    vertices: dict[VertexId, V] = {}
    for e in store.edges:
        if e.src not in vertices:
            vertices[e.src] = initial(e.src)
        if e.dst not in vertices:
            vertices[e.dst] = initial(e.dst)
    return PropertyGraph(vertices, store)


def triplets(g: PropertyGraph[V], edges: Iterable[Edge] | None = None) -> Iterator[Triplet]:
    """Triplet view over ``edges`` (default: all edges) against the current vertex table."""
    verts = g.vertices
    for e in (g.store.edges if edges is None else edges):
        yield Triplet(e.src, e.dst, verts[e.src], verts[e.dst], e.label)


def default_threads() -> int:
    env = os.environ.get("BGP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _fold(g: PropertyGraph[V], edges: Sequence[Edge],
          send: Callable[[Triplet], Iterable[tuple[VertexId, M]]],
          merge: Callable[[M, M], M]) -> dict[VertexId, M]:
    out: dict[VertexId, M] = {}
    for t in triplets(g, edges):
        for vid, msg in send(t):
            prev = out.get(vid)
            out[vid] = msg if prev is None else merge(prev, msg)
    return out


def aggregate_messages(g: PropertyGraph[V],
                       send: Callable[[Triplet], Iterable[tuple[VertexId, M]]],
                       merge: Callable[[M, M], M],
                       edges: Sequence[Edge] | None = None,
                       threads: int = 1) -> dict[VertexId, M]:
    """Apply ``send`` to every triplet and reduce messages per target vertex with ``merge``.

    ``merge`` must be associative and commutative: the triplets are split into
    chunks folded independently, and chunk results are merged afterwards.
    """
    edge_seq: Sequence[Edge] = g.store.edges if edges is None else edges
    if threads <= 1 or len(edge_seq) < 2 * threads:
        return _fold(g, edge_seq, send, merge)
    size = -(-len(edge_seq) // threads)
    chunks = [edge_seq[i:i + size] for i in range(0, len(edge_seq), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        partials = list(pool.map(lambda c: _fold(g, c, send, merge), chunks))
    out = partials[0]
    for part in partials[1:]:
        for vid, msg in part.items():
            prev = out.get(vid)
            out[vid] = msg if prev is None else merge(prev, msg)
    return out


def join_vertices(g: PropertyGraph[V], updates: Mapping[VertexId, M],
                  mapper: Callable[[VertexId, V, M], V]) -> PropertyGraph[V]:
    """New graph where each updated vertex carries ``mapper``'s result; every other vertex is unchanged."""
    if not updates:
        return g
    verts = g.vertices
    new = dict(verts)
    for vid, msg in updates.items():
        if vid not in verts:
            raise GraphContractError(f"update for unknown vertex {vid}")
        new[vid] = mapper(vid, verts[vid], msg)
    return g.with_vertices(new)


class Accumulator(Generic[T]):
    """Set-union accumulator that superstep tasks may add to concurrently."""

    def __init__(self) -> None:
        self._items: set[T] = set()
        self._lock = threading.Lock()

    def add(self, item: T) -> None:
        with self._lock:
            self._items.add(item)

    def update(self, items: Iterable[T]) -> None:
        batch = set(items)
        with self._lock:
            self._items |= batch

    @property
    def value(self) -> frozenset[T]:
        with self._lock:
            return frozenset(self._items)


def accumulate(emissions: Iterable[Iterable[T]], threads: int = 1) -> frozenset[T]:
    """Union of all emitted batches, independent of the order they arrive in."""
    acc: Accumulator[T] = Accumulator()
    if threads <= 1:
        for batch in emissions:
            acc.update(batch)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(acc.update, emissions))
    return acc.value
