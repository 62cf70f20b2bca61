"""Command-line interface: ``rdb2owl <command> ...``.

Exit status is 0 on success, 1 when a constraint or property check fails and
2 on usage, input or parse errors.  Primary output goes to stdout, logs to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from . import relalg as ra
from .directmap import MappingConfig, Variant, direct_map
from .inverse import InverseMappingError, recover_as_database, same_instance
from .propcheck import PROPERTIES, GeneratorParams, check_database, run_property
from .ra2sparql import DEFAULT_MAX_DIFFERENCE_ARITY, TranslationError, Translator
from .rdfgraph import NTriplesError, is_consistent, parse_ntriples, serialize_ntriples
from .relmodel import (
    Database,
    SchemaError,
    database_from_document,
    dumps_database,
    load_csv_database,
    satisfies,
)
from .sparql import SparqlError, eval_pattern, mapping_to_json, mappings_table, pattern_to_json, serialize_sparql

log = logging.getLogger("rdb2owl")

DEFAULT_BASE = "http://example.edu/db/"
BASE_ENV = "RDB2OWL_BASE"

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def resolve_base(flag: str | None, document: dict[str, Any] | None) -> str:
    """--base, then the document's "base", then $RDB2OWL_BASE, then the default."""
    if flag:
        return flag
    if document and document.get("base"):
        return document["base"]
    return os.environ.get(BASE_ENV) or DEFAULT_BASE


def load_input(path: str, base: str | None, csv: bool = False) -> Database:
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: database document must be a JSON object")
    chosen = resolve_base(base, doc)
    db = load_csv_database(p, chosen) if csv else database_from_document(doc, chosen)
    if db.instance.duplicates:
        log.warning("%s: %d duplicate row(s) dropped", path, db.instance.duplicates)
    return db


def write_output(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


# -- commands ----------------------------------------------------------------


def cmd_map(args: argparse.Namespace) -> int:
    db = load_input(args.database, args.base, args.csv)
    trace: dict | None = {} if args.trace else None
    graph = direct_map(db, MappingConfig(db.base, Variant(args.variant)), trace)
    write_output(serialize_ntriples(graph), args.output)
    if args.trace:
        sidecar = [
            {"triple": t.n3(), "rules": rules}
            for t, rules in sorted(trace.items(), key=lambda kv: kv[0].n3())
        ]
        Path(args.trace).write_text(json.dumps(sidecar, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    log.info("%d triples, consistent: %s", len(graph), is_consistent(graph))
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    db = load_input(args.database, args.base, args.csv)
    verdict = satisfies(db.instance, db.constraints)
    if verdict.holds:
        print("satisfied")
        return EXIT_OK
    print(f"violated: {len(verdict.violations)} violation(s)")
    for v in verdict.violations:
        print(f"  {v}")
    return EXIT_FAILURE


def _compile(args: argparse.Namespace):
    db = load_input(args.database, args.base, args.csv)
    query = ra.parse_ra(args.query)
    translator = Translator(db.schema, db.constraints, db.base, args.max_difference_arity)
    return db, query, translator.translate(query)


def cmd_compile(args: argparse.Namespace) -> int:
    _, query, pattern = _compile(args)
    text = serialize_sparql(pattern)
    if args.json:
        out = {"query": ra.format_ra(query), "sparql": text, "pattern": pattern_to_json(pattern)}
        write_output(json.dumps(out, indent=2, ensure_ascii=False) + "\n", args.output)
    else:
        write_output(text, args.output)
    return EXIT_OK


def cmd_query(args: argparse.Namespace) -> int:
    db, query, pattern = _compile(args)
    graph = direct_map(db, MappingConfig(db.base, Variant.DM))
    answers = eval_pattern(pattern, graph)
    columns = ["?" + a for a in ra.attributes(query, db.schema)]
    if args.format == "json":
        rows = sorted((mapping_to_json(m) for m in answers), key=lambda d: json.dumps(d, sort_keys=True))
        write_output(json.dumps({"columns": columns, "mappings": rows}, indent=2, ensure_ascii=False) + "\n",
                     args.output)
    else:
        write_output(mappings_table(answers, columns), args.output)
    log.info("%d solution mapping(s)", len(answers))
    return EXIT_OK


def cmd_roundtrip(args: argparse.Namespace) -> int:
    db = load_input(args.database, args.base, args.csv)
    graph = direct_map(db, MappingConfig(db.base, Variant(args.variant)))
    recovered = recover_as_database(graph, db.base)
    write_output(dumps_database(recovered, include_constraints=False), args.output)
    identical = same_instance(db.instance, recovered.instance)
    print("identical" if identical else "different", file=sys.stderr)
    return EXIT_OK if identical else EXIT_FAILURE


def cmd_recover(args: argparse.Namespace) -> int:
    try:
        text = Path(args.graph).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.graph}: {exc.strerror or exc}") from None
    base = resolve_base(args.base, None)
    recovered = recover_as_database(parse_ntriples(text), base)
    write_output(dumps_database(recovered, include_constraints=False), args.output)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if bool(args.random) == bool(args.database):
        raise UsageError("verify needs either a database file or --random")
    variant = Variant(args.variant) if args.variant else None
    names = [args.property] if args.property else list(PROPERTIES)
    reports = []
    for name in names:
        if args.random:
            params = GeneratorParams(seed=args.seed, base=resolve_base(args.base, None))
            reports.append(run_property(name, params, variant, args.trials))
        else:
            db = load_input(args.database, args.base, args.csv)
            reports.append(check_database(db, name, variant, args.trials or 50, args.seed))
    for r in reports:
        sys.stderr.write(r.to_text())
    if args.format == "text":
        write_output("".join(r.to_text() for r in reports), args.output)
    else:
        body = reports[0].to_json() if len(reports) == 1 else [r.to_json() for r in reports]
        write_output(json.dumps(body, indent=2, ensure_ascii=False) + "\n", args.output)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILURE


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 already; keep it but route through UsageError
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rdb2owl", description="Direct mapping of relational databases to RDF/OWL.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output on stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    def common(p: argparse.ArgumentParser, database: bool = True) -> None:
        if database:
            p.add_argument("database", help="database JSON document (or CSV sidecar with --csv)")
            p.add_argument("--csv", action="store_true", help="read tuples from <relation>.csv files")
        p.add_argument("--base", help=f"base IRI (default: document, ${BASE_ENV}, {DEFAULT_BASE})")
        p.add_argument("-o", "--output", help="write the primary output here instead of stdout")

    variants = [v.value for v in Variant]

    p = sub.add_parser("map", help="map a database to N-Triples")
    common(p)
    p.add_argument("--variant", choices=variants, default=Variant.DM.value)
    p.add_argument("--trace", metavar="FILE", help="write rule provenance per triple as JSON")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("check", help="check the instance against its keys")
    common(p)
    p.set_defaults(func=cmd_check)

    for name, func, text in (
        ("compile-query", cmd_compile, "translate a relational algebra query to SPARQL"),
        ("query", cmd_query, "answer a relational algebra query over the mapped graph"),
    ):
        p = sub.add_parser(name, help=text)
        common(p)
        p.add_argument("query", help="e.g. 'join(select(NAME=Juan, STUDENT), ENROLLED)'")
        p.add_argument("--max-difference-arity", type=int, default=DEFAULT_MAX_DIFFERENCE_ARITY)
        if name == "compile-query":
            p.add_argument("--json", action="store_true", help="also emit the pattern AST")
        else:
            p.add_argument("--format", choices=["table", "json"], default="table")
        p.set_defaults(func=func)

    p = sub.add_parser("roundtrip", help="map, recover, and compare with the input")
    common(p)
    p.add_argument("--variant", choices=variants, default=Variant.DM.value)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("recover", help="recover a database from an N-Triples graph")
    p.add_argument("graph", help="N-Triples file")
    common(p, database=False)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("verify", help="check mapping properties")
    p.add_argument("database", nargs="?", help="database JSON document")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--random", action="store_true", help="use seeded random databases")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--property", choices=PROPERTIES, help="default: all four")
    p.add_argument("--variant", choices=variants)
    p.add_argument("--trials", type=int)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--base")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(name)s: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, SchemaError, ra.RAError, SparqlError, TranslationError, NTriplesError) as exc:
        print(f"rdb2owl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InverseMappingError as exc:
        print(f"rdb2owl: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
