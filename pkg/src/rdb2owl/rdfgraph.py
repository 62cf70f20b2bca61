"""RDF terms, graphs, the OWL vocabulary used by the mapping, and N-Triples I/O."""
from __future__ import annotations

import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from typing import NamedTuple, Union


@dataclass(frozen=True, order=True)
class IRI:
    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("IRI must be nonempty")

    def n3(self) -> str:
        return f"<{self.value}>"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class BlankNode:
    label: str

    def n3(self) -> str:
        return f"_:{self.label}"

    def __str__(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, order=True)
class Literal:
    value: str

    def n3(self) -> str:
        return '"' + _escape(self.value) + '"'

    def __str__(self) -> str:
        return self.value


Term = Union[IRI, BlankNode, Literal]

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"

RDF_TYPE = IRI(RDF + "type")
RDFS_DOMAIN = IRI(RDFS + "domain")
RDFS_RANGE = IRI(RDFS + "range")
OWL_CLASS = IRI(OWL + "Class")
OWL_OBJECT_PROPERTY = IRI(OWL + "ObjectProperty")
OWL_DATATYPE_PROPERTY = IRI(OWL + "DatatypeProperty")
OWL_DIFFERENT_FROM = IRI(OWL + "differentFrom")


class Triple(NamedTuple):
    subject: Union[IRI, BlankNode]
    predicate: IRI
    object: Term

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


def _term_key(term: Term) -> tuple[int, str]:
    return ({IRI: 0, BlankNode: 1, Literal: 2}[type(term)], term.n3())


def triple_sort_key(t: Triple):
    return (_term_key(t.subject), _term_key(t.predicate), _term_key(t.object))


class RdfGraph:
    """An immutable set of triples with subject/predicate indexes built lazily."""

    __slots__ = ("_triples", "_by_predicate")

    def __init__(self, triples: Iterable[Triple] = ()):
        checked = []
        for t in triples:
            if not isinstance(t, Triple):
                t = Triple(*t)
            if not isinstance(t.subject, (IRI, BlankNode)) or not isinstance(t.predicate, IRI):
                raise TypeError(f"ill-typed triple {t!r}")
            if not isinstance(t.object, (IRI, BlankNode, Literal)):
                raise TypeError(f"ill-typed triple {t!r}")
            checked.append(t)
        self._triples = frozenset(checked)
        self._by_predicate: dict[IRI, tuple[Triple, ...]] | None = None

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: object) -> bool:
        return t in self._triples

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RdfGraph) and self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __or__(self, other: RdfGraph) -> RdfGraph:
        return RdfGraph(self._triples | other._triples)

    def __sub__(self, other: RdfGraph) -> RdfGraph:
        return RdfGraph(self._triples - other._triples)

    def __le__(self, other: RdfGraph) -> bool:
        return self._triples <= other._triples

    def __repr__(self) -> str:
        return f"RdfGraph({len(self._triples)} triples)"

    def with_predicate(self, predicate: IRI) -> tuple[Triple, ...]:
        if self._by_predicate is None:
            index: dict[IRI, list[Triple]] = {}
            for t in self._triples:
                index.setdefault(t.predicate, []).append(t)
            self._by_predicate = {p: tuple(ts) for p, ts in index.items()}
        return self._by_predicate.get(predicate, ())

    def match(self, s: Term | None = None, p: IRI | None = None, o: Term | None = None) -> Iterator[Triple]:
        pool = self.with_predicate(p) if p is not None else self._triples
        for t in pool:
            if (s is None or t.subject == s) and (o is None or t.object == o):
                yield t

    def sorted(self) -> list[Triple]:
        return sorted(self._triples, key=triple_sort_key)


def is_consistent(graph: RdfGraph) -> bool:
    """False iff the graph asserts some term to be different from itself."""
    return not any(t.subject == t.object for t in graph.with_predicate(OWL_DIFFERENT_FROM))


def graph_contained(first: RdfGraph, second: RdfGraph) -> bool:
    return first.triples <= second.triples


# -- N-Triples ---------------------------------------------------------------

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in text)


def serialize_ntriples(graph: RdfGraph) -> str:
    return "".join(t.n3() + "\n" for t in graph.sorted())


class NTriplesError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


_IRI_RE = re.compile(r'<([^<>"{}|^`\\\s]+)>')
_BNODE_RE = re.compile(r"_:([A-Za-z0-9_][A-Za-z0-9_.\-]*)")
_LIT_RE = re.compile(r'"((?:[^"\\\n\r]|\\.)*)"')


def _unescape(body: str, line: int) -> str:
    out, i = [], 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            nxt = body[i + 1] if i + 1 < len(body) else ""
            if nxt not in _UNESCAPES:
                raise NTriplesError(line, f"unknown escape \\{nxt}")
            out.append(_UNESCAPES[nxt])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _read_term(text: str, pos: int, line: int, allowed: tuple[type, ...]) -> tuple[Term, int]:
    while pos < len(text) and text[pos] in " \t":
        pos += 1
    for cls, regex in ((IRI, _IRI_RE), (BlankNode, _BNODE_RE), (Literal, _LIT_RE)):
        m = regex.match(text, pos)
        if m:
            if cls not in allowed:
                raise NTriplesError(line, f"{cls.__name__} not allowed at column {pos + 1}")
            value = m.group(1)
            if cls is Literal:
                value = _unescape(value, line)
            if cls is BlankNode and value.endswith("."):
                raise NTriplesError(line, "blank node label may not end with '.'")
            return cls(value), m.end()
    raise NTriplesError(line, f"expected a term at column {pos + 1}")


def parse_ntriples(text: str) -> RdfGraph:
    """Parse the N-Triples subset written by serialize_ntriples."""
    triples = []
    # only "\n" ends a line: literals may legally contain other line separators
    for n, raw in enumerate(text.split("\n"), start=1):
        raw = raw.removesuffix("\r")
        stripped = raw.strip(" \t")
        if not stripped or stripped.startswith("#"):
            continue
        s, pos = _read_term(raw, 0, n, (IRI, BlankNode))
        p, pos = _read_term(raw, pos, n, (IRI,))
        o, pos = _read_term(raw, pos, n, (IRI, BlankNode, Literal))
        rest = raw[pos:].strip()
        if rest != ".":
            raise NTriplesError(n, f"expected '.' after object, found {rest!r}")
        triples.append(Triple(s, p, o))
    return RdfGraph(triples)
