"""Command-line front end: run queries, check them against the oracle, benchmark."""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Sequence

from .engine import Dataset
from .graph import default_threads
from .query import BgpQuery, QueryError, parse_prefix_option
from .rdf import NTriplesError
from .results import oracle_evaluate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_MISMATCH = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def bundled_queries() -> Path:
    return Path(str(resources.files("bgpmatch") / "queries" / "lubm"))


def _threads(value: int | None) -> int:
    if value is not None:
        return value
    return default_threads()


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load(path: str) -> Dataset:
    if not Path(path).is_file():
        raise UsageError(f"no such data file: {path}")
    try:
        return Dataset.from_file(path)
    except UnicodeDecodeError as exc:
        raise NTriplesError(0, f"not UTF-8 ({exc.reason} at byte {exc.start})", path) from None
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _parse(dataset: Dataset, path: str, prefixes: dict[str, str]) -> BgpQuery:
    text = _read_text(path)
    try:
        return dataset.parse(text, prefixes)
    except QueryError as exc:
        where = f"{path}:{exc.line}:{exc.column}" if exc.line is not None else path
        raise QueryError(f"{where}: {exc.message}") from None


def _prefixes(args) -> dict[str, str]:
    try:
        return parse_prefix_option(args.prefix or [])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_query(args) -> int:
    dataset = _load(args.data)
    query = _parse(dataset, args.query, _prefixes(args))
    solutions, stats = dataset.run(query, threads=_threads(args.threads))
    if args.format == "json":
        sys.stdout.write(solutions.to_json(dataset.dictionary))
    else:
        sys.stdout.write(solutions.to_tsv(dataset.dictionary))
    sys.stdout.flush()
    if args.stats:
        sys.stderr.write(json.dumps(stats.to_dict(), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    dataset = _load(args.data)
    query = _parse(dataset, args.query, _prefixes(args))
    engine, _ = dataset.run(query, threads=_threads(args.threads))
    oracle = oracle_evaluate(dataset.triples, query, dataset.dictionary)
    if engine.same_solutions(oracle):
        print(f"ok: {len(engine)} solutions agree with the oracle")
        return EXIT_OK
    d = dataset.dictionary
    def show(row):
        return "\t".join(d.term_of(v).n3() for v in row)
    only_engine = engine.as_set() - oracle.as_set()
    only_oracle = oracle.as_set() - engine.as_set()
    print(f"mismatch: engine {len(engine)} rows, oracle {len(oracle)} rows")
    for row in sorted(only_engine, key=show):
        print("+ " + show(row))
    for row in sorted(only_oracle, key=show):
        print("- " + show(row))
    return EXIT_MISMATCH


def cmd_bench(args) -> int:
    dataset = _load(args.data)
    print(f"# {args.data}: {len(dataset.triples)} statements, "
          f"{dataset.graph.num_vertices} vertices, parsed in {dataset.parse_ms:.1f} ms",
          file=sys.stderr)
    qdir = Path(args.queries) if args.queries else bundled_queries()
    files = sorted(qdir.glob("*.rq"))
    if not files:
        raise UsageError(f"no .rq files in {qdir}")
    prefixes = _prefixes(args)
    threads = _threads(args.threads)
    report = []
    for path in files:
        query = _parse(dataset, str(path), prefixes)
        times, counts = [], set()
        for _ in range(args.repetitions):
            started = time.perf_counter()
            solutions, _ = dataset.run(query, threads=threads)
            times.append((time.perf_counter() - started) * 1000)
            counts.add(len(solutions))
        report.append({"query": path.stem, "patterns": len(query.patterns),
                       "repetitions": args.repetitions,
                       "mean_ms": statistics.fmean(times), "min_ms": min(times),
                       "max_ms": max(times), "solutions": counts.pop() if len(counts) == 1 else sorted(counts)})
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        print("query\tpatterns\trepetitions\tmean_ms\tmin_ms\tmax_ms\tsolutions")
        for r in report:
            print(f"{r['query']}\t{r['patterns']}\t{r['repetitions']}\t{r['mean_ms']:.2f}"
                  f"\t{r['min_ms']:.2f}\t{r['max_ms']:.2f}\t{r['solutions']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bgpmatch",
                     description="Evaluate SPARQL basic graph patterns over N-Triples data "
                                 "with a vertex-centric matcher.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--threads", type=_positive, default=None,
                       help="worker threads per superstep (default: $BGP_THREADS or CPU count)")
        p.add_argument("--prefix", action="append", metavar="NAME=IRI",
                       help="bind or override a query prefix; repeatable")

    q = sub.add_parser("query", help="run a query and print its solutions")
    q.add_argument("data", help="N-Triples file")
    q.add_argument("query", help="SPARQL file (SELECT ... WHERE { BGP })")
    q.add_argument("--format", choices=("tsv", "json"), default="tsv")
    q.add_argument("--stats", action="store_true", help="write run statistics as JSON to stderr")
    common(q)
    q.set_defaults(func=cmd_query)

    c = sub.add_parser("check", help="compare the engine with the reference evaluator")
    c.add_argument("data")
    c.add_argument("query")
    common(c)
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="time a directory of queries (bundled LUBM Q1-Q7 by default)")
    b.add_argument("data")
    b.add_argument("--queries", metavar="DIR", help="directory of .rq files")
    b.add_argument("--repetitions", type=_positive, default=3)
    b.add_argument("--format", choices=("text", "json"), default="text")
    common(b)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bgpmatch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NTriplesError as exc:
        print(f"bgpmatch: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except QueryError as exc:
        print(f"bgpmatch: query error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BrokenPipeError:
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
