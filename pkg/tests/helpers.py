"""Random graphs and connected queries for oracle comparisons."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from bgpmatch.query import BgpQuery, Const, TriplePattern, Var, is_connected
from bgpmatch.rdf import Dictionary, Term, Triple

DATA = Path(__file__).resolve().parents[1] / "src" / "bgpmatch" / "data"
EX = "http://example.org/"


@dataclass
class Case:
    seed: int
    triples: list[Triple]
    dictionary: Dictionary
    query: BgpQuery

    def describe(self) -> str:
        d = self.dictionary
        data = "\n".join(f"  {d.term_of(s).n3()} {d.term_of(p).n3()} {d.term_of(o).n3()} ."
                         for s, p, o in self.triples)
        pats = "\n".join("  " + p.render(d) + " ." for p in self.query.patterns)
        return (f"seed={self.seed}\nSELECT {' '.join('?' + v for v in self.query.projection)}"
                f"\n{pats}\ndata:\n{data}")


def random_graph(rng: random.Random, dictionary: Dictionary, max_vertices: int = 50,
                 max_edges: int = 200, max_predicates: int = 5) -> list[Triple]:
    n_nodes = rng.randint(2, max_vertices)
    n_literals = rng.randint(0, min(3, n_nodes - 1))
    nodes = [dictionary.id_of(Term.iri(f"{EX}v{i}")) for i in range(n_nodes - n_literals)]
    literals = [dictionary.id_of(Term.literal(f"lit{i}")) for i in range(n_literals)]
    preds = [dictionary.id_of(Term.iri(f"{EX}p{i}")) for i in range(rng.randint(1, max_predicates))]
    if rng.random() < 0.1:
        # a term that is both a predicate and a vertex
        preds[0] = nodes[0]
    n_edges = rng.randint(1, max_edges)
    # denser graphs make more non-empty answers
    if rng.random() < 0.5:
        nodes_used = nodes[:max(2, min(len(nodes), rng.randint(2, 12)))]
    else:
        nodes_used = nodes
    targets = nodes_used + literals
    triples = []
    for _ in range(n_edges):
        triples.append(Triple(rng.choice(nodes_used), rng.choice(preds), rng.choice(targets)))
    if rng.random() < 0.2:
        triples += rng.sample(triples, k=min(len(triples), 3))  # duplicates
    return triples


def _walk_patterns(rng: random.Random, triples: list[Triple], size: int) -> list[Triple]:
    picked = [rng.choice(triples)]
    for _ in range(size - 1):
        touched = {t.s for t in picked} | {t.o for t in picked}
        adjacent = [t for t in triples if t.s in touched or t.o in touched]
        picked.append(rng.choice(adjacent or triples))
    return picked


def random_query(rng: random.Random, triples: list[Triple], dictionary: Dictionary) -> BgpQuery:
    terms = sorted({x for t in triples for x in t})
    for _ in range(200):
        size = rng.randint(2, 4)
        if rng.random() < 0.75:
            base = _walk_patterns(rng, triples, size)
            var_prob = rng.choice([0.5, 0.7, 0.9])
            node_vars: dict = {}
            pred_vars: dict = {}
            patterns = []
            for s, p, o in base:
                out = []
                for value, table, prob in ((s, node_vars, var_prob), (p, pred_vars, 0.25), (o, node_vars, var_prob)):
                    if value not in table:
                        table[value] = Var(f"v{len(node_vars) + len(pred_vars)}") if rng.random() < prob else Const(value)
                    out.append(table[value])
                patterns.append(TriplePattern(*out))
            if rng.random() < 0.25:
                # perturb one constant so some answers come out empty or shifted
                i = rng.randrange(len(patterns))
                j = rng.randrange(3)
                if isinstance(patterns[i][j], Const):
                    parts = list(patterns[i])
                    parts[j] = Const(rng.choice(terms))
                    patterns[i] = TriplePattern(*parts)
        else:
            pool = [Var(n) for n in "abcd"]
            def pick(pred: bool):
                if rng.random() < (0.3 if pred else 0.65):
                    return rng.choice(pool)
                return Const(rng.choice(terms))
            patterns = [TriplePattern(pick(False), pick(True), pick(False)) for _ in range(size)]
        if not is_connected(patterns) or not any(p.variables for p in patterns):
            continue
        variables = sorted({v for p in patterns for v in p.variables})
        projection = rng.sample(variables, k=rng.randint(1, len(variables)))
        return BgpQuery(tuple(projection), tuple(patterns), {})
    raise RuntimeError("could not generate a connected query")



def random_case(seed: int, **graph_args) -> Case:
    rng = random.Random(seed)
    dictionary = Dictionary()
    triples = random_graph(rng, dictionary, **graph_args)
    query = random_query(rng, triples, dictionary)
    return Case(seed, triples, dictionary, query)


def connectivity_orders(patterns) -> list[list[TriplePattern]]:
    """Every ordering in which each pattern shares a variable with an earlier one."""
    out = []

    def grow(prefix, remaining, seen):
        if not remaining:
            out.append(list(prefix))
            return
        for i, p in enumerate(remaining):
            if not prefix or (p.variables & seen):
                grow(prefix + [p], remaining[:i] + remaining[i + 1:], seen | p.variables)

    grow([], list(patterns), frozenset())
    return out
