"""Direct mapping of a relational database to RDF with OWL vocabulary.

Three variants are provided:

* ``dm``        schema, table, reference and literal triples;
* ``dm-pk``     adds a reflexive owl:differentFrom triple when a primary key is violated;
* ``dm-pk-fk``  additionally emits it when a foreign key is violated.

Each rule is a plain comprehension over the stored facts.  The rule names
passed to ``emit`` are what ``--trace`` reports.
"""
from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .rdfgraph import (
    IRI,
    OWL_CLASS,
    OWL_DATATYPE_PROPERTY,
    OWL_DIFFERENT_FROM,
    OWL_OBJECT_PROPERTY,
    RDF_TYPE,
    RDFS_DOMAIN,
    RDFS_RANGE,
    BlankNode,
    Literal,
    RdfGraph,
    Term,
    Triple,
)
from .relmodel import (
    ConstraintSet,
    Database,
    ForeignKey,
    Instance,
    RelationalSchema,
    SchemaError,
    TupleRow,
    check_key_value,
)

RESERVED_NAME_CHARS = frozenset("#,=/")


class Variant(str, enum.Enum):
    DM = "dm"
    DM_PK = "dm-pk"
    DM_PK_FK = "dm-pk-fk"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MappingConfig:
    base: str = "http://example.edu/db/"
    variant: Variant = Variant.DM
    violation_iri: str | None = None

    def __post_init__(self) -> None:
        if not self.base:
            raise ValueError("base IRI must be nonempty")
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def violation(self) -> IRI:
        return IRI(self.violation_iri or self.base + "violation")


# -- ontology ----------------------------------------------------------------


@dataclass(frozen=True)
class BinaryRelation:
    """R(A, B) links S (through A = S.C) with T (through B = T.D)."""

    relation: str
    a: str
    b: str
    s: str
    c: str
    t: str
    d: str


@dataclass(frozen=True)
class ObjectProperty:
    """An object property from class ``source`` to class ``target``.

    For ``origin == "fk"`` the attributes are the foreign key's own and
    referenced lists.  For ``origin == "binrel"`` they are (A, B) and (C, D)
    of the binary relation named ``relation``.
    """

    attributes: tuple[str, ...]
    ref_attributes: tuple[str, ...]
    source: str
    target: str
    origin: str
    relation: str

    def iri(self, base: str) -> IRI:
        if self.origin == "binrel":
            a, b = self.attributes
            c, d = self.ref_attributes
            return binrel_iri(base, self.relation, a, b, c, d)
        return fk_iri(base, self.source, self.target, self.attributes, self.ref_attributes)


@dataclass(frozen=True)
class OntologyModel:
    classes: tuple[str, ...]
    binary_relations: tuple[BinaryRelation, ...]
    object_properties: tuple[ObjectProperty, ...]
    datatype_properties: tuple[tuple[str, str], ...]  # (attribute, relation)

    def is_binary(self, relation: str) -> bool:
        return any(b.relation == relation for b in self.binary_relations)

    def binary(self, relation: str) -> BinaryRelation | None:
        for b in self.binary_relations:
            if b.relation == relation:
                return b
        return None


def _fk1(constraints: ConstraintSet) -> list[ForeignKey]:
    return [fk for fk in constraints.foreign_keys if len(fk.attributes) == 1]


def _two_fk_from(constraints: ConstraintSet, attr: str, relation: str) -> bool:
    targets = {
        (fk.ref_attributes[0], fk.ref_relation)
        for fk in _fk1(constraints)
        if fk.relation == relation and fk.attributes[0] == attr
    }
    return len(targets) > 1


def _fk_from(constraints: ConstraintSet, a: str, b: str, relation: str) -> bool:
    return any(
        fk.relation == relation and fk.attributes in ((a, b), (b, a))
        for fk in constraints.foreign_keys
    )


def _fk_to(constraints: ConstraintSet, relation: str) -> bool:
    return any(fk.ref_relation == relation for fk in constraints.foreign_keys)


def find_binary_relations(schema: RelationalSchema, constraints: ConstraintSet) -> list[BinaryRelation]:
    found = []
    for pk in constraints.primary_keys:
        r = pk.relation
        if len(pk.attributes) != 2 or len(schema.attributes(r)) >= 3:
            continue
        a, b = pk.attributes
        if _two_fk_from(constraints, a, r) or _two_fk_from(constraints, b, r):
            continue
        if _fk_from(constraints, a, b, r) or _fk_to(constraints, r):
            continue
        for fa in _fk1(constraints):
            if fa.relation != r or fa.attributes != (a,) or fa.ref_relation == r:
                continue
            for fb in _fk1(constraints):
                if fb.relation != r or fb.attributes != (b,) or fb.ref_relation == r:
                    continue
                br = BinaryRelation(r, a, b, fa.ref_relation, fa.ref_attributes[0],
                                    fb.ref_relation, fb.ref_attributes[0])
                if br not in found:  # repeated FK declarations
                    found.append(br)
    return found


def extract_ontology(schema: RelationalSchema, constraints: ConstraintSet) -> OntologyModel:
    """Classify relations into classes and binary relations; derive properties."""
    binrels = find_binary_relations(schema, constraints)
    binary_names = {b.relation for b in binrels}
    classes = tuple(r for r in schema.names if r not in binary_names)
    props = [
        ObjectProperty((b.a, b.b), (b.c, b.d), b.s, b.t, "binrel", b.relation) for b in binrels
    ]
    props += [
        ObjectProperty(fk.attributes, fk.ref_attributes, fk.relation, fk.ref_relation, "fk", fk.relation)
        for fk in constraints.foreign_keys
        if fk.relation not in binary_names
    ]
    dtps = tuple((a, r) for r in classes for a in schema.attributes(r))
    return OntologyModel(classes, tuple(binrels), tuple(dict.fromkeys(props)), dtps)


# -- IRIs --------------------------------------------------------------------


def _check_names(names: Iterable[str]) -> None:
    for n in names:
        bad = RESERVED_NAME_CHARS & set(n)
        if bad or any(c.isspace() for c in n) or not n:
            raise SchemaError(f"name {n!r} contains a reserved character")


def class_iri(base: str, relation: str) -> IRI:
    _check_names([relation])
    return IRI(base + relation)


def dtp_iri(base: str, relation: str, attribute: str) -> IRI:
    _check_names([relation, attribute])
    return IRI(f"{base}{relation}#{attribute}")


def binrel_iri(base: str, relation: str, a: str, b: str, c: str, d: str) -> IRI:
    _check_names([relation, a, b, c, d])
    return IRI(f"{base}{relation}#{a},{b},{c},{d}")


def fk_iri(base: str, source: str, target: str, attrs: Sequence[str], ref_attrs: Sequence[str]) -> IRI:
    _check_names([source, target, *attrs, *ref_attrs])
    return IRI(f"{base}{source},{target}#{','.join([*attrs, *ref_attrs])}")


def row_iri(base: str, relation: str, pairs: Sequence[tuple[str, str]]) -> IRI:
    _check_names([relation, *(a for a, _ in pairs)])
    for a, v in pairs:
        check_key_value(v, relation, a)
    return IRI(f"{base}{relation}#" + ",".join(f"{a}={v}" for a, v in pairs))


def generate_iri(kind: str, components: Sequence, base: str) -> IRI:
    """Dispatch on ``kind``: class, dtp, op-binrel, op-fk or row.

    Components: class (R); dtp (A, R); op-binrel (R, A, B, C, D);
    op-fk (X-list, Y-list, S, T); row (R, [(A, V), ...]).
    """
    if kind == "class":
        (r,) = components
        return class_iri(base, r)
    if kind == "dtp":
        a, r = components
        return dtp_iri(base, r, a)
    if kind == "op-binrel":
        r, a, b, c, d = components
        return binrel_iri(base, r, a, b, c, d)
    if kind == "op-fk":
        xs, ys, s, t = components
        if len(xs) != len(ys) or not xs:
            raise ValueError("op-fk needs two attribute lists of equal nonzero length")
        return fk_iri(base, s, t, xs, ys)
    if kind == "row":
        r, pairs = components
        return row_iri(base, r, pairs)
    raise ValueError(f"unknown IRI kind {kind!r}")


def tuple_identifier(row: TupleRow, relation: str, constraints: ConstraintSet, base: str) -> Term:
    """Row IRI under a primary key; a blank node without one or when a key value is NULL."""
    pk = constraints.primary_key(relation)
    if pk is not None and all(row[a] is not None for a in pk.attributes):
        return row_iri(base, relation, [(a, row[a]) for a in pk.attributes])
    return BlankNode(relation + row.tid)


# -- the mapping -------------------------------------------------------------


def _key_broken(instance: Instance, relation: str, attrs: Sequence[str]) -> bool:
    seen = set()
    for row in instance.rows(relation):
        key = tuple(row[a] for a in attrs)
        if None in key or key in seen:
            return True
        seen.add(key)
    return False


def _dangling(instance: Instance, fk: ForeignKey) -> bool:
    targets = {tuple(t[b] for b in fk.ref_attributes) for t in instance.rows(fk.ref_relation)}
    for row in instance.rows(fk.relation):
        values = tuple(row[a] for a in fk.attributes)
        if None not in values and values not in targets:
            return True
    return False


def direct_map(
    db: Database,
    config: MappingConfig | None = None,
    trace: dict[Triple, list[str]] | None = None,
) -> RdfGraph:
    """Map ``db`` to an RDF graph; ``trace`` (if given) collects rule names per triple."""
    config = config or MappingConfig(db.base)
    schema, constraints, instance = db.schema, db.constraints, db.instance
    base = config.base
    onto = extract_ontology(schema, constraints)
    triples: set[Triple] = set()

    def emit(s: Term, p: IRI, o: Term, rule: str) -> None:
        t = Triple(s, p, o)
        triples.add(t)
        if trace is not None:
            rules = trace.setdefault(t, [])
            if rule not in rules:
                rules.append(rule)

    # schema triples
    for r in onto.classes:
        emit(class_iri(base, r), RDF_TYPE, OWL_CLASS, "class")
    for op in onto.object_properties:
        u = op.iri(base)
        emit(u, RDF_TYPE, OWL_OBJECT_PROPERTY, "object-property")
        emit(u, RDFS_DOMAIN, class_iri(base, op.source), "object-property-domain")
        emit(u, RDFS_RANGE, class_iri(base, op.target), "object-property-range")
    for a, r in onto.datatype_properties:
        u = dtp_iri(base, r, a)
        emit(u, RDF_TYPE, OWL_DATATYPE_PROPERTY, "datatype-property")
        emit(u, RDFS_DOMAIN, class_iri(base, r), "datatype-property-domain")

    ids: dict[tuple[str, str], Term] = {}
    for r in onto.classes:
        for row in instance.rows(r):
            ids[r, row.tid] = tuple_identifier(row, r, constraints, base)

    # table and literal triples
    for r in onto.classes:
        cls = class_iri(base, r)
        dtps = [(a, dtp_iri(base, r, a)) for a in schema.attributes(r)]
        for row in instance.rows(r):
            u = ids[r, row.tid]
            emit(u, RDF_TYPE, cls, "table")
            for a, prop in dtps:
                if row[a] is not None:
                    emit(u, prop, Literal(row[a]), "literal")

    # reference triples; NULL never joins with NULL
    def index(relation: str, attrs: Sequence[str]) -> dict[tuple, list[TupleRow]]:
        out: dict[tuple, list[TupleRow]] = {}
        for row in instance.rows(relation):
            key = tuple(row[a] for a in attrs)
            if None not in key:
                out.setdefault(key, []).append(row)
        return out

    for op in onto.object_properties:
        v = op.iri(base)
        if op.origin == "fk":
            targets = index(op.target, op.ref_attributes)
            for row in instance.rows(op.source):
                key = tuple(row[a] for a in op.attributes)
                if None in key:
                    continue
                for t2 in targets.get(key, ()):
                    emit(ids[op.source, row.tid], v, ids[op.target, t2.tid], "reference-fk")
        else:
            a, b = op.attributes
            c, d = op.ref_attributes
            left, right = index(op.source, (c,)), index(op.target, (d,))
            for row in instance.rows(op.relation):
                if row[a] is None or row[b] is None:
                    continue
                for t2 in left.get((row[a],), ()):
                    for t3 in right.get((row[b],), ()):
                        emit(ids[op.source, t2.tid], v, ids[op.target, t3.tid], "reference-binrel")

    # violation triples
    a = config.violation
    if config.variant in (Variant.DM_PK, Variant.DM_PK_FK):
        for pk in constraints.primary_keys:
            rows = instance.rows(pk.relation)
            if any(row[x] is None for row in rows for x in pk.attributes):
                emit(a, OWL_DIFFERENT_FROM, a, "pk-null")
            keys = [tuple(row[x] for x in pk.attributes) for row in rows]
            full = [k for k in keys if None not in k]
            if len(set(full)) != len(full):
                emit(a, OWL_DIFFERENT_FROM, a, "pk-duplicate")
    if config.variant is Variant.DM_PK_FK:
        for fk in constraints.foreign_keys:
            if _dangling(instance, fk):
                emit(a, OWL_DIFFERENT_FROM, a, "fk-dangling")
            if _key_broken(instance, fk.ref_relation, fk.ref_attributes):
                emit(a, OWL_DIFFERENT_FROM, a, "fk-referenced-key")

    return RdfGraph(triples)


def schema_triples(graph: RdfGraph) -> RdfGraph:
    """The subset of triples describing the vocabulary (declarations, domains, ranges)."""
    vocab = {OWL_CLASS, OWL_OBJECT_PROPERTY, OWL_DATATYPE_PROPERTY}
    return RdfGraph(
        t for t in graph
        if (t.predicate == RDF_TYPE and t.object in vocab) or t.predicate in (RDFS_DOMAIN, RDFS_RANGE)
    )
