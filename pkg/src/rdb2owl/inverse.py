"""Recover a relational instance from the image of the direct mapping.

Relations are read off the class and object-property declarations, their
attributes off the datatype properties, and their rows by evaluating SPARQL
patterns over the graph.  Primary and foreign keys are not reconstructed.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence

from .rdfgraph import (
    IRI,
    OWL_CLASS,
    OWL_DATATYPE_PROPERTY,
    OWL_OBJECT_PROPERTY,
    RDF_TYPE,
    RDFS_DOMAIN,
    RDFS_RANGE,
    Literal,
    RdfGraph,
)
from .relmodel import NAME_RE, ConstraintSet, Database, Instance, Relation, RelationalSchema, TupleRow, Value
from .sparql import And, Opt, SelectP, TriplePattern, eval_pattern

SUBJECT_VAR = "?__x"


class InverseMappingError(ValueError):
    """The graph is not recognisable as an image of the direct mapping."""


def tr_inverse(mu: Mapping[str, object], attrs: Sequence[str]) -> dict[str, Value]:
    """Tuple over ``attrs`` from a solution mapping; unbound variables become NULL."""
    out: dict[str, Value] = {}
    for a in attrs:
        term = mu.get("?" + a)
        if term is None:
            out[a] = None
        elif isinstance(term, Literal):
            out[a] = term.value
        else:
            raise InverseMappingError(f"?{a} is bound to a non-literal {term}")
    return out


def _local(iri: object, base: str, what: str) -> str:
    if not isinstance(iri, IRI) or not iri.value.startswith(base):
        raise InverseMappingError(f"{what} {iri} is not an IRI under base {base}")
    return iri.value[len(base):]


def _name(text: str, what: str) -> str:
    if not NAME_RE.match(text):
        raise InverseMappingError(f"cannot read a {what} name from {text!r}")
    return text


def _single(graph: RdfGraph, subject: IRI, predicate: IRI, what: str):
    objs = [t.object for t in graph.match(subject, predicate)]
    if len(objs) != 1:
        raise InverseMappingError(f"{subject} has {len(objs)} {what} triples, expected 1")
    return objs[0]


def class_query(cls: IRI, props: Sequence[tuple[str, IRI]]) -> SelectP:
    """SELECT {?A1..?An} over ((?x type r) OPT (?x a1 ?A1)) OPT ... (?x an ?An)."""
    pattern = TriplePattern(SUBJECT_VAR, RDF_TYPE, cls)
    for a, prop in props:
        pattern = Opt(pattern, TriplePattern(SUBJECT_VAR, prop, "?" + a))
    return SelectP((), tuple("?" + a for a, _ in props), pattern)


def binary_query(op: IRI, a: str, b: str, c_prop: IRI, d_prop: IRI) -> SelectP:
    """SELECT {?A, ?B} over (?t1 op ?t2) AND (?t1 c ?A) AND (?t2 d ?B)."""
    t1, t2 = "?__t1", "?__t2"
    pattern = And(
        And(TriplePattern(t1, op, t2), TriplePattern(t1, c_prop, "?" + a)),
        TriplePattern(t2, d_prop, "?" + b),
    )
    return SelectP((), ("?" + a, "?" + b), pattern)


def recover_database(graph: RdfGraph, base: str) -> tuple[RelationalSchema, Instance]:
    # classes
    classes: dict[str, IRI] = {}
    for t in graph.match(None, RDF_TYPE, OWL_CLASS):
        classes[_name(_local(t.subject, base, "class"), "relation")] = t.subject

    # datatype properties grouped by their domain
    attrs: dict[str, list[tuple[str, IRI]]] = {r: [] for r in classes}
    for t in graph.match(None, RDF_TYPE, OWL_DATATYPE_PROPERTY):
        domain = _single(graph, t.subject, RDFS_DOMAIN, "rdfs:domain")
        r = _local(domain, base, "domain")
        if r not in classes:
            raise InverseMappingError(f"datatype property {t.subject} has undeclared domain {domain}")
        prefix, sep, a = _local(t.subject, base, "datatype property").partition("#")
        if not sep or prefix != r:
            raise InverseMappingError(f"datatype property {t.subject} does not have the form {base}{r}#A")
        attrs[r].append((_name(a, "attribute"), t.subject))

    relations: list[Relation] = []
    rows: dict[str, list[dict[str, Value]]] = {}
    for r in sorted(classes):
        props = sorted(attrs[r])
        if not props:
            raise InverseMappingError(f"class {r} has no datatype properties")
        names = [a for a, _ in props]
        relations.append(Relation(r, tuple(names)))
        result = eval_pattern(class_query(classes[r], props), graph)
        rows[r] = [tr_inverse(mu, names) for mu in result]

    # object properties coming from binary relations
    for t in graph.match(None, RDF_TYPE, OWL_OBJECT_PROPERTY):
        left, sep, right = _local(t.subject, base, "object property").partition("#")
        if not sep:
            raise InverseMappingError(f"object property {t.subject} has no '#'")
        if "," in left:
            continue  # generated from a foreign key
        parts = right.split(",")
        if len(parts) != 4:
            raise InverseMappingError(f"binary relation property {t.subject} needs four attributes")
        r = _name(left, "relation")
        a, b, c, d = (_name(p, "attribute") for p in parts)
        s = _local(_single(graph, t.subject, RDFS_DOMAIN, "rdfs:domain"), base, "domain")
        tt = _local(_single(graph, t.subject, RDFS_RANGE, "rdfs:range"), base, "range")
        for cls, attr in ((s, c), (tt, d)):
            if cls not in classes or attr not in dict(attrs[cls]):
                raise InverseMappingError(f"{t.subject} refers to unknown attribute {cls}.{attr}")
        if r in classes or r in rows:
            raise InverseMappingError(f"relation {r} is declared twice")
        relations.append(Relation(r, (a, b)))
        q = binary_query(t.subject, a, b, dict(attrs[s])[c], dict(attrs[tt])[d])
        rows[r] = [tr_inverse(mu, (a, b)) for mu in eval_pattern(q, graph)]

    relations.sort(key=lambda rel: rel.name)
    schema = RelationalSchema(tuple(relations))
    built = {}
    for rel in relations:
        ordered = sorted(rows[rel.name], key=lambda d: [(d[a] is not None, d[a] or "") for a in rel.attributes])
        built[rel.name] = [TupleRow(f"id{i}", d) for i, d in enumerate(ordered, start=1)]
    return schema, Instance(schema, built)


def recover_as_database(graph: RdfGraph, base: str) -> Database:
    schema, instance = recover_database(graph, base)
    return Database(schema, ConstraintSet(), instance, base)


def same_instance(original: Instance, recovered: Instance) -> bool:
    """Equality of relation-indexed value sets, ignoring attribute order and tuple ids."""
    if set(original.schema.names) != set(recovered.schema.names):
        return False
    for name in original.schema.names:
        if set(original.schema.attributes(name)) != set(recovered.schema.attributes(name)):
            return False
    return original.value_sets() == recovered.value_sets()

