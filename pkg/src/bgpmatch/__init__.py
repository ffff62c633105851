"""Basic graph pattern matching over RDF data with a vertex-centric engine."""

from .engine import Dataset, RunStats
from .query import BgpQuery, QueryError, TriplePattern, order_bgp, parse_query
from .rdf import Dictionary, NTriplesError, Term, Triple, load_ntriples, parse_ntriples
from .results import SolutionSet, oracle_evaluate

__all__ = [
    "BgpQuery", "Dataset", "Dictionary", "NTriplesError", "QueryError", "RunStats",
    "SolutionSet", "Term", "Triple", "TriplePattern", "load_ntriples", "oracle_evaluate",
    "order_bgp", "parse_ntriples", "parse_query",
]
__version__ = "0.1.0"
