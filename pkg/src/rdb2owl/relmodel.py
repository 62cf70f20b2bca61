"""Relational schemas, PK/FK constraints and NULL-bearing instances.

NULL is represented by Python ``None``; every other value is a string.
Instances follow set semantics: rows are deduplicated on their values at
construction time, while each surviving row keeps the tuple identifier it was
ingested with (``"id1"``, ``"id2"``, ... in document order).
"""
from __future__ import annotations

import csv
import json
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

NULL = None
Value = Optional[str]

NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
# separators of the IRI templates plus characters that are illegal inside <...>
RESERVED_KEY_CHARS = frozenset('#,=/<>"{}|\\^`')


class SchemaError(ValueError):
    """Raised for malformed database documents and constraint declarations."""


def check_name(name: Any, what: str) -> str:
    if not isinstance(name, str) or not NAME_RE.match(name) or name.startswith("__"):
        raise SchemaError(
            f"invalid {what} name {name!r}: expected an identifier "
            "([A-Za-z_][A-Za-z0-9_]*, not starting with '__')"
        )
    return name


def check_key_value(value: str, relation: str, attribute: str) -> None:
    """Key values end up inside row IRIs, so the template separators are banned."""
    bad = {c for c in value if c in RESERVED_KEY_CHARS or c.isspace()}
    if bad or value == "":
        raise SchemaError(
            f"key value {value!r} of {relation}.{attribute} is empty or contains "
            f"reserved characters {sorted(bad)}"
        )


@dataclass(frozen=True)
class Relation:
    name: str
    attributes: tuple[str, ...]


@dataclass(frozen=True)
class RelationalSchema:
    relations: tuple[Relation, ...]

    def __post_init__(self) -> None:
        seen = set()
        for rel in self.relations:
            check_name(rel.name, "relation")
            if rel.name in seen:
                raise SchemaError(f"duplicate relation {rel.name!r}")
            seen.add(rel.name)
            if not rel.attributes:
                raise SchemaError(f"relation {rel.name!r} has no attributes")
            for attr in rel.attributes:
                check_name(attr, "attribute")
            if len(set(rel.attributes)) != len(rel.attributes):
                raise SchemaError(f"relation {rel.name!r} repeats an attribute")

    @classmethod
    def of(cls, relations: Mapping[str, Sequence[str]]) -> RelationalSchema:
        return cls(tuple(Relation(name, tuple(attrs)) for name, attrs in relations.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def __contains__(self, name: object) -> bool:
        return any(r.name == name for r in self.relations)

    def attributes(self, name: str) -> tuple[str, ...]:
        for rel in self.relations:
            if rel.name == name:
                return rel.attributes
        raise KeyError(name)


@dataclass(frozen=True)
class PrimaryKey:
    relation: str
    attributes: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.relation}[{', '.join(self.attributes)}]"


@dataclass(frozen=True)
class ForeignKey:
    relation: str
    attributes: tuple[str, ...]
    ref_relation: str
    ref_attributes: tuple[str, ...]

    def __str__(self) -> str:
        return (
            f"{self.relation}[{', '.join(self.attributes)}] ⊆ "
            f"{self.ref_relation}[{', '.join(self.ref_attributes)}]"
        )


@dataclass(frozen=True)
class ConstraintSet:
    primary_keys: tuple[PrimaryKey, ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()

    def primary_key(self, relation: str) -> PrimaryKey | None:
        for pk in self.primary_keys:
            if pk.relation == relation:
                return pk
        return None

    def only_primary_keys(self) -> ConstraintSet:
        return ConstraintSet(self.primary_keys, ())

    def validate(self, schema: RelationalSchema) -> None:
        def check_attrs(rel: str, attrs: tuple[str, ...], what: str) -> None:
            if rel not in schema:
                raise SchemaError(f"{what} references unknown relation {rel!r}")
            if not attrs:
                raise SchemaError(f"{what} on {rel!r} has an empty attribute list")
            if len(set(attrs)) != len(attrs):
                raise SchemaError(f"{what} on {rel!r} repeats an attribute")
            for a in attrs:
                if a not in schema.attributes(rel):
                    raise SchemaError(f"{what} references unknown attribute {rel}.{a}")

        keyed = set()
        for pk in self.primary_keys:
            check_attrs(pk.relation, pk.attributes, "primary key")
            if pk.relation in keyed:
                raise SchemaError(f"relation {pk.relation!r} has two primary keys")
            keyed.add(pk.relation)
        for fk in self.foreign_keys:
            check_attrs(fk.relation, fk.attributes, "foreign key")
            check_attrs(fk.ref_relation, fk.ref_attributes, "foreign key target")
            if len(fk.attributes) != len(fk.ref_attributes):
                raise SchemaError(f"foreign key {fk} has attribute lists of different length")


class TupleRow:
    """One row of a relation: a tuple identifier plus an attribute -> value map."""

    __slots__ = ("tid", "_values", "_key")

    def __init__(self, tid: str, values: Mapping[str, Value]):
        self.tid = tid
        self._values = dict(values)
        self._key = frozenset(self._values.items())

    @property
    def values(self) -> Mapping[str, Value]:
        return self._values

    @property
    def value_key(self) -> frozenset[tuple[str, Value]]:
        """Hashable view of the values, ignoring the identifier."""
        return self._key

    def __getitem__(self, attr: str) -> Value:
        return self._values[attr]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TupleRow) and self.tid == other.tid and self._key == other._key

    def __hash__(self) -> int:
        return hash((self.tid, self._key))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}={'NULL' if v is None else repr(v)}" for k, v in self._values.items())
        return f"TupleRow({self.tid}: {body})"


class Instance:
    """Relation name -> rows, over a fixed schema.

    Rows whose values coincide with an earlier row are dropped; the number of
    dropped rows is kept in ``duplicates``.
    """

    def __init__(self, schema: RelationalSchema, relations: Mapping[str, Iterable[TupleRow]] = ()):
        self.schema = schema
        self.duplicates = 0
        rels: dict[str, tuple[TupleRow, ...]] = {}
        given = dict(relations)
        for name in given:
            if name not in schema:
                raise SchemaError(f"instance mentions unknown relation {name!r}")
        for rel in schema.relations:
            seen: set[frozenset] = set()
            tids: set[str] = set()
            kept = []
            for row in given.get(rel.name, ()):
                if set(row.values) != set(rel.attributes):
                    raise SchemaError(
                        f"row {row.tid} of {rel.name!r} has attributes {sorted(row.values)}, "
                        f"expected {sorted(rel.attributes)}"
                    )
                for v in row.values.values():
                    if v is not None and not isinstance(v, str):
                        raise SchemaError(f"value {v!r} in {rel.name!r} is not a string or null")
                if row.value_key in seen:
                    self.duplicates += 1
                    continue
                if row.tid in tids:
                    raise SchemaError(f"tuple id {row.tid!r} used twice in {rel.name!r}")
                seen.add(row.value_key)
                tids.add(row.tid)
                kept.append(row)
            rels[rel.name] = tuple(kept)
        self._relations = rels

    @classmethod
    def from_rows(
        cls, schema: RelationalSchema, rows: Mapping[str, Iterable[Sequence[Value]]]
    ) -> Instance:
        """Build an instance from positional rows, numbering them id1, id2, ..."""
        relations = {}
        for name, tuples in rows.items():
            attrs = schema.attributes(name)
            built = []
            for i, values in enumerate(tuples, start=1):
                if len(values) != len(attrs):
                    raise SchemaError(
                        f"row {i} of {name!r} has {len(values)} values, expected {len(attrs)}"
                    )
                built.append(TupleRow(f"id{i}", dict(zip(attrs, values))))
            relations[name] = built
        return cls(schema, relations)

    def rows(self, name: str) -> tuple[TupleRow, ...]:
        return self._relations[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._relations)

    def items(self):
        return self._relations.items()

    def __len__(self) -> int:
        return sum(len(rows) for rows in self._relations.values())

    def value_sets(self) -> dict[str, frozenset[frozenset[tuple[str, Value]]]]:
        return {name: frozenset(r.value_key for r in rows) for name, rows in self._relations.items()}

    def with_rows(self, relations: Mapping[str, Iterable[TupleRow]]) -> Instance:
        merged = dict(self._relations)
        merged.update({k: tuple(v) for k, v in relations.items()})
        return Instance(self.schema, merged)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Instance)
            and self.schema == other.schema
            and self._relations == other._relations
        )

    def __repr__(self) -> str:
        return f"Instance({ {k: len(v) for k, v in self._relations.items()} })"


@dataclass(frozen=True)
class Database:
    schema: RelationalSchema
    constraints: ConstraintSet
    instance: Instance
    base: str = "http://example.edu/db/"

    def __post_init__(self) -> None:
        self.constraints.validate(self.schema)
        if self.instance.schema != self.schema:
            raise SchemaError("instance is over a different schema")
        if not self.base:
            raise SchemaError("base IRI must be nonempty")
        for pk in self.constraints.primary_keys:
            for row in self.instance.rows(pk.relation):
                for a in pk.attributes:
                    if row[a] is not None:
                        check_key_value(row[a], pk.relation, a)

    def __iter__(self):
        # allows ``schema, constraints, instance = db``
        return iter((self.schema, self.constraints, self.instance))


# -- constraint satisfaction -------------------------------------------------


@dataclass(frozen=True)
class Violation:
    constraint: PrimaryKey | ForeignKey
    kind: str  # "null-key", "duplicate-key", "dangling", "referenced-key"
    tuple_ids: tuple[str, ...]
    attributes: tuple[str, ...] = ()

    def __str__(self) -> str:
        attrs = f" on {', '.join(self.attributes)}" if self.attributes else ""
        return f"{self.kind}{attrs} violates {self.constraint}: {', '.join(self.tuple_ids)}"


@dataclass(frozen=True)
class Verdict:
    violations: tuple[Violation, ...] = ()

    @property
    def holds(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.holds


def _key_violations(
    instance: Instance, constraint: PrimaryKey | ForeignKey, relation: str, attrs: tuple[str, ...]
) -> list[Violation]:
    kind_prefix = "" if isinstance(constraint, PrimaryKey) else "referenced-"
    found = []
    groups: dict[tuple, list[str]] = {}
    for row in instance.rows(relation):
        nulls = tuple(a for a in attrs if row[a] is None)
        if nulls:
            found.append(Violation(constraint, kind_prefix + "null-key", (row.tid,), nulls))
        groups.setdefault(tuple(row[a] for a in attrs), []).append(row.tid)
    for key, tids in groups.items():
        if len(tids) > 1 and None not in key:
            found.append(Violation(constraint, kind_prefix + "duplicate-key", tuple(tids), attrs))
    return found


def satisfies(instance: Instance, constraints: ConstraintSet) -> Verdict:
    """Decide I |= Σ, collecting every violation found."""
    violations: list[Violation] = []
    for pk in constraints.primary_keys:
        violations += _key_violations(instance, pk, pk.relation, pk.attributes)
    for fk in constraints.foreign_keys:
        # a foreign key also requires its referenced attributes to behave as a key
        violations += _key_violations(instance, fk, fk.ref_relation, fk.ref_attributes)
        targets = {tuple(s[b] for b in fk.ref_attributes) for s in instance.rows(fk.ref_relation)}
        for row in instance.rows(fk.relation):
            values = tuple(row[a] for a in fk.attributes)
            if None in values:
                continue
            if values not in targets:
                violations.append(Violation(fk, "dangling", (row.tid,), fk.attributes))
    return Verdict(tuple(violations))


def instance_contained(first: Instance, second: Instance) -> bool:
    """True iff every value-row of ``first`` also occurs in ``second``."""
    if first.schema != second.schema:
        raise SchemaError("instances are over different schemas")
    other = second.value_sets()
    return all(rows <= other[name] for name, rows in first.value_sets().items())


# -- JSON / CSV ingestion ----------------------------------------------------


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def _parse_constraints(doc: Mapping[str, Any]) -> ConstraintSet:
    raw = doc.get("constraints", {}) or {}
    _expect(isinstance(raw, dict), "'constraints' must be an object")
    pks, fks = [], []
    for entry in raw.get("primary_keys", []) or []:
        _expect(isinstance(entry, dict), "primary key entries must be objects")
        pks.append(PrimaryKey(entry.get("relation"), tuple(entry.get("attributes") or ())))
    for entry in raw.get("foreign_keys", []) or []:
        _expect(isinstance(entry, dict), "foreign key entries must be objects")
        fks.append(
            ForeignKey(
                entry.get("relation"),
                tuple(entry.get("attributes") or ()),
                entry.get("ref_relation"),
                tuple(entry.get("ref_attributes") or ()),
            )
        )
    return ConstraintSet(tuple(pks), tuple(fks))


def database_from_document(doc: Any, base: str | None = None) -> Database:
    _expect(isinstance(doc, dict), "database document must be a JSON object")
    raw_relations = doc.get("relations")
    _expect(isinstance(raw_relations, list), "'relations' must be a list")
    relations, rows = [], {}
    for entry in raw_relations:
        _expect(isinstance(entry, dict), "relation entries must be objects")
        name = entry.get("name")
        attrs = entry.get("attributes")
        _expect(isinstance(attrs, list), f"relation {name!r} needs an 'attributes' list")
        relations.append(Relation(name, tuple(attrs)))
        tuples = entry.get("tuples", []) or []
        _expect(isinstance(tuples, list), f"'tuples' of {name!r} must be a list")
        for t in tuples:
            _expect(isinstance(t, list), f"tuples of {name!r} must be lists")
            for v in t:
                _expect(v is None or isinstance(v, str), f"value {v!r} in {name!r} is not a string or null")
        rows[name] = tuples
    schema = RelationalSchema(tuple(relations))
    constraints = _parse_constraints(doc)
    constraints.validate(schema)
    instance = Instance.from_rows(schema, rows)
    chosen = base or doc.get("base") or "http://example.edu/db/"
    _expect(isinstance(chosen, str), "'base' must be a string")
    return Database(schema, constraints, instance, chosen)


def load_database(source: str | Path | Mapping[str, Any], base: str | None = None) -> Database:
    """Load a database from a JSON document, a path to one, or its parsed form."""
    if isinstance(source, Mapping):
        return database_from_document(source, base)
    path = Path(source)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return database_from_document(doc, base)


def loads_database(text: str, base: str | None = None) -> Database:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON ({exc})") from exc
    return database_from_document(doc, base)


def load_csv_database(sidecar: str | Path, base: str | None = None) -> Database:
    """Load a schema sidecar (JSON document without tuples) plus one CSV per relation.

    Each relation may name its file with ``"csv"`` (relative to the sidecar);
    the default is ``<name>.csv``.  The CSV header must list the attributes and
    an empty field stands for NULL.
    """
    sidecar = Path(sidecar)
    doc = json.loads(sidecar.read_text(encoding="utf-8"))
    _expect(isinstance(doc, dict) and isinstance(doc.get("relations"), list), "bad sidecar")
    for entry in doc["relations"]:
        path = sidecar.parent / entry.get("csv", f"{entry.get('name')}.csv")
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            _expect(header == list(entry.get("attributes", [])), f"{path}: header does not match attributes")
            entry["tuples"] = [[v if v != "" else None for v in row] for row in reader if row]
    return database_from_document(doc, base)


def dump_database(db: Database, include_constraints: bool = True) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "base": db.base,
        "relations": [
            {
                "name": rel.name,
                "attributes": list(rel.attributes),
                "tuples": [[row[a] for a in rel.attributes] for row in db.instance.rows(rel.name)],
            }
            for rel in db.schema.relations
        ],
    }
    if include_constraints:
        doc["constraints"] = {
            "primary_keys": [
                {"relation": pk.relation, "attributes": list(pk.attributes)}
                for pk in db.constraints.primary_keys
            ],
            "foreign_keys": [
                {
                    "relation": fk.relation,
                    "attributes": list(fk.attributes),
                    "ref_relation": fk.ref_relation,
                    "ref_attributes": list(fk.ref_attributes),
                }
                for fk in db.constraints.foreign_keys
            ],
        }
    return doc


def dumps_database(db: Database, include_constraints: bool = True) -> str:
    return json.dumps(dump_database(db, include_constraints), indent=2, ensure_ascii=False) + "\n"
