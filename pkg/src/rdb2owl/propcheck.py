"""Randomised and constructed checks of the mapping's properties.

* information preservation: the inverse mapping recovers every satisfying instance;
* query preservation: tr(⟦Q⟧_I) equals the translated pattern evaluated on the image;
* monotonicity: growing the instance only adds triples (dm, dm-pk), and a
  constructed witness shows dm-pk-fk is not monotone;
* semantics preservation: consistency of the image against constraint satisfaction.

Every check is deterministic in ``GeneratorParams.seed``.
"""
from __future__ import annotations

import json
import random
from collections import Counter
from collections.abc import Callable
from dataclasses import asdict, dataclass, field, replace
from typing import Any

from . import relalg as ra
from .directmap import MappingConfig, Variant, direct_map
from .inverse import recover_database, same_instance
from .ra2sparql import Translator, tr_result
from .rdfgraph import graph_contained, is_consistent
from .relmodel import (
    ConstraintSet,
    Database,
    ForeignKey,
    Instance,
    PrimaryKey,
    Relation,
    RelationalSchema,
    TupleRow,
    Value,
    dump_database,
    satisfies,
)
from .sparql import SolutionMapping, eval_pattern, is_non_parametric, mapping_to_json

ATTRIBUTE_POOL = ("A", "B", "C", "D", "E", "F", "G")
VALUE_POOL = ("1", "2", "3")
DEFAULT_BASE = "http://example.edu/db/"


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    max_relations: int = 5
    max_attributes: int = 5
    max_rows: int = 8
    min_rows: int = 0
    null_probability: float = 0.2
    pk_probability: float = 0.7
    fk_density: float = 0.5
    binrel_probability: float = 0.3
    satisfying: bool = True
    base: str = DEFAULT_BASE

    def __post_init__(self) -> None:
        for name in ("null_probability", "pk_probability", "fk_density", "binrel_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.max_relations < 1 or self.max_attributes < 1 or self.max_rows < 0:
            raise ValueError("generator sizes must be positive")
        if self.max_attributes > len(ATTRIBUTE_POOL):
            raise ValueError(f"at most {len(ATTRIBUTE_POOL)} attributes per relation")

    def trial(self, index: int) -> GeneratorParams:
        return replace(self, seed=self.seed * 1_000_003 + index)


@dataclass
class Failure:
    trial: int
    message: str
    database: dict[str, Any] | None = None
    query: str | None = None
    expected: Any = None
    actual: Any = None


@dataclass
class PropertyReport:
    property: str
    variant: str
    trials: int = 0
    failures: list[Failure] = field(default_factory=list)
    stats: Counter = field(default_factory=Counter)
    coverage: Counter = field(default_factory=Counter)
    witnesses: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict[str, Any]:
        return {
            "property": self.property,
            "variant": self.variant,
            "trials": self.trials,
            "passed": self.passed,
            "failures": [asdict(f) for f in sorted(self.failures, key=lambda f: f.trial)],
            "stats": dict(sorted(self.stats.items())),
            "coverage": dict(sorted(self.coverage.items())),
            "witnesses": self.witnesses,
        }

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"{status} {self.property} [{self.variant}]: {self.trials} trials, "
                 f"{len(self.failures)} failures"]
        for k, v in sorted(self.stats.items()):
            lines.append(f"  {k}: {v}")
        for f in sorted(self.failures, key=lambda f: f.trial)[:5]:
            lines.append(f"  trial {f.trial}: {f.message}")
            if f.query:
                lines.append(f"    query: {f.query}")
            if f.database is not None:
                lines.append("    database: " + json.dumps(f.database, sort_keys=True))
        return "\n".join(lines) + "\n"


# -- random databases --------------------------------------------------------


def _fresh_rows(rng: random.Random, attrs: tuple[str, ...], params: GeneratorParams) -> list[dict[str, Value]]:
    count = rng.randint(min(params.min_rows, params.max_rows), params.max_rows)
    return [
        {a: None if rng.random() < params.null_probability else rng.choice(VALUE_POOL) for a in attrs}
        for _ in range(count)
    ]


def _build(
    relations: list[Relation],
    constraints: ConstraintSet,
    rows: dict[str, list[dict[str, Value]]],
    base: str,
) -> Database:
    schema = RelationalSchema(tuple(relations))
    instance = Instance(
        schema,
        {r.name: [TupleRow(f"id{i}", d) for i, d in enumerate(rows[r.name], start=1)] for r in relations},
    )
    return Database(schema, constraints, instance, base)


def repair(db: Database, max_rows: int) -> Database:
    """Make the instance satisfy its constraints by deleting and inserting rows."""
    schema, constraints = db.schema, db.constraints
    rows = {name: [dict(r.values) for r in db.instance.rows(name)] for name in schema.names}
    inserts = 0  # capped so that self-referencing keys cannot make repair oscillate
    for _ in range(10_000):
        current = _build(list(schema.relations), constraints, rows, db.base)
        verdict = satisfies(current.instance, constraints)
        if verdict.holds:
            return current
        v = verdict.violations[0]
        c = v.constraint
        tid_index = {name: {f"id{i}": i - 1 for i in range(1, len(rows[name]) + 1)} for name in rows}
        if isinstance(c, PrimaryKey):
            doomed = v.tuple_ids if v.kind == "null-key" else v.tuple_ids[1:]
            drop = {tid_index[c.relation][t] for t in doomed}
            rows[c.relation] = [r for i, r in enumerate(rows[c.relation]) if i not in drop]
        elif v.kind == "dangling":
            (tid,) = v.tuple_ids
            row = rows[c.relation][tid_index[c.relation][tid]]
            pk = constraints.primary_key(c.ref_relation)
            can_insert = (
                inserts < max_rows
                and len(rows[c.ref_relation]) < max_rows
                and pk is not None
                and set(pk.attributes) <= set(c.ref_attributes)
            )
            if can_insert:
                new = {a: None for a in schema.attributes(c.ref_relation)}
                for x, y in zip(c.attributes, c.ref_attributes):
                    new[y] = row[x]
                rows[c.ref_relation].append(new)
                inserts += 1
            else:
                own_pk = constraints.primary_key(c.relation)
                nullable = [a for a in c.attributes if own_pk is None or a not in own_pk.attributes]
                if nullable:
                    row[nullable[0]] = None
                else:
                    rows[c.relation].remove(row)
        else:
            # referenced attributes are not a key: drop the offending target rows
            doomed = set(v.tuple_ids if v.kind.endswith("null-key") else v.tuple_ids[1:])
            rows[c.ref_relation] = [
                r for i, r in enumerate(rows[c.ref_relation]) if f"id{i + 1}" not in doomed
            ]
    raise RuntimeError("repair did not converge")


def gen_random_database(params: GeneratorParams) -> Database:
    """A random schema, PK/FK set and instance; satisfying by construction if requested."""
    rng = random.Random(params.seed)
    n = rng.randint(1, params.max_relations)
    relations: list[Relation] = []
    pks: list[PrimaryKey] = []
    fks: list[ForeignKey] = []
    binrels: set[str] = set()

    n_binrel = 1 if n >= 3 and rng.random() < params.binrel_probability else 0
    for i in range(1, n - n_binrel + 1):
        k = rng.randint(1, params.max_attributes)
        attrs = tuple(sorted(rng.sample(ATTRIBUTE_POOL, k), key=ATTRIBUTE_POOL.index))
        relations.append(Relation(f"R{i}", attrs))
        if rng.random() < params.pk_probability:
            size = 1 if k == 1 or rng.random() < 0.7 else 2
            pks.append(PrimaryKey(f"R{i}", tuple(sorted(rng.sample(attrs, size), key=attrs.index))))

    single = [pk for pk in pks if len(pk.attributes) == 1]
    if n_binrel and single:
        s, t = rng.choice(single), rng.choice(single)
        x = s.attributes[0]
        y = t.attributes[0] if t.attributes[0] != x else rng.choice([a for a in ATTRIBUTE_POOL if a != x])
        name = f"L{len(relations) + 1}"
        relations.append(Relation(name, (x, y)))
        pks.append(PrimaryKey(name, (x, y)))
        fks.append(ForeignKey(name, (x,), s.relation, s.attributes))
        fks.append(ForeignKey(name, (y,), t.relation, t.attributes))
        binrels.add(name)

    targets = [pk for pk in pks if pk.relation not in binrels]
    for rel in relations:
        if rel.name in binrels or not targets or rng.random() >= params.fk_density:
            continue
        pk = rng.choice(targets)
        if len(pk.attributes) > len(rel.attributes):
            continue
        same = [a for a in pk.attributes if a in rel.attributes]
        if len(same) == len(pk.attributes) and rng.random() < 0.6:
            src = tuple(pk.attributes)
        else:
            src = tuple(rng.sample(rel.attributes, len(pk.attributes)))
        fk = ForeignKey(rel.name, src, pk.relation, pk.attributes)
        if fk not in fks:
            fks.append(fk)

    constraints = ConstraintSet(tuple(pks), tuple(fks))
    rows = {rel.name: _fresh_rows(rng, rel.attributes, params) for rel in relations}
    db = _build(relations, constraints, rows, params.base)
    return repair(db, params.max_rows) if params.satisfying else db


def gen_violating_database(params: GeneratorParams) -> Database:
    """A random database with one deliberately injected violation when possible."""
    db = gen_random_database(replace(params, satisfying=True))
    rng = random.Random(params.seed ^ 0x5EED)
    schema, constraints = db.schema, db.constraints
    rows = {name: [dict(r.values) for r in db.instance.rows(name)] for name in schema.names}
    options = []
    for pk in constraints.primary_keys:
        options.append(("pk-null", pk))
        if rows[pk.relation]:
            options.append(("pk-duplicate", pk))
    for fk in constraints.foreign_keys:
        options.append(("fk-dangling", fk))
    if not options:
        return db
    kind, c = rng.choice(options)
    if kind == "pk-null":
        new = {a: rng.choice(VALUE_POOL) for a in schema.attributes(c.relation)}
        new[rng.choice(c.attributes)] = None
        rows[c.relation].append(new)
    elif kind == "pk-duplicate":
        new = dict(rng.choice(rows[c.relation]))
        others = [a for a in schema.attributes(c.relation) if a not in c.attributes]
        if others:
            a = rng.choice(others)
            new[a] = "dup" if new[a] != "dup" else "dup2"
        else:
            # the key spans every attribute, so a duplicate key is a duplicate row
            return db
        rows[c.relation].append(new)
    else:
        new = {a: None for a in schema.attributes(c.relation)}
        for a in c.attributes:
            new[a] = "9"
        rows[c.relation].append(new)
    return _build(list(schema.relations), constraints, rows, db.base)


def drop_relation(db: Database, name: str) -> Database:
    relations = [r for r in db.schema.relations if r.name != name]
    pks = tuple(pk for pk in db.constraints.primary_keys if pk.relation != name)
    fks = tuple(
        fk for fk in db.constraints.foreign_keys if name not in (fk.relation, fk.ref_relation)
    )
    schema = RelationalSchema(tuple(relations))
    instance = Instance(schema, {r.name: db.instance.rows(r.name) for r in relations})
    return Database(schema, ConstraintSet(pks, fks), instance, db.base)


def drop_row(db: Database, name: str, tid: str) -> Database:
    instance = db.instance.with_rows({name: [r for r in db.instance.rows(name) if r.tid != tid]})
    return Database(db.schema, db.constraints, instance, db.base)


def minimize(db: Database, fails: Callable[[Database], bool]) -> Database:
    """Greedy row deletion, then relation deletion, while ``fails`` stays true."""

    def still(candidate: Database) -> bool:
        try:
            return fails(candidate)
        except Exception:
            return False

    progress = True
    while progress:
        progress = False
        for name in db.schema.names:
            for row in db.instance.rows(name):
                smaller = drop_row(db, name, row.tid)
                if still(smaller):
                    db, progress = smaller, True
                    break
            if progress:
                break
    progress = True
    while progress and len(db.schema.relations) > 1:
        progress = False
        for name in db.schema.names:
            smaller = drop_relation(db, name)
            if still(smaller):
                db, progress = smaller, True
                break
    return db


# -- random queries ----------------------------------------------------------

QUERY_WEIGHTS = {"base": 40, "select": 20, "join": 15, "project-rename": 15, "union": 5, "difference": 5}


class QueryGenerator:
    def __init__(self, schema: RelationalSchema, rng: random.Random, max_difference_arity: int = 3,
                 outer_join_probability: float = 0.2, nullrel_probability: float = 0.08):
        self.schema = schema
        self.rng = rng
        self.max_difference_arity = max_difference_arity
        self.outer = outer_join_probability
        self.nullrel = nullrel_probability

    def att(self, e: ra.RAExpr) -> tuple[str, ...]:
        return ra.attributes(e, self.schema)

    def base(self) -> ra.RAExpr:
        if self.rng.random() < self.nullrel:
            return ra.NullRel(self.rng.choice(ATTRIBUTE_POOL))
        return ra.Rel(self.rng.choice(self.schema.names))

    def condition(self, attrs: tuple[str, ...]) -> ra.Condition:
        a = self.rng.choice(attrs)
        kind = self.rng.randrange(4)
        if kind == 0:
            return ra.Eq(a, self.rng.choice(VALUE_POOL))
        if kind == 1:
            return ra.Neq(a, self.rng.choice(VALUE_POOL))
        return ra.IsNull(a) if kind == 2 else ra.IsNotNull(a)

    def conform(self, e: ra.RAExpr, target: tuple[str, ...]) -> ra.RAExpr:
        """Reshape ``e`` to have exactly the attributes ``target``."""
        att = list(self.att(e))
        if not set(att) & set(target):
            missing = [t for t in target if t not in att]
            e = ra.Rename(att[0], self.rng.choice(missing), e)
            att = list(self.att(e))
        keep = tuple(a for a in att if a in target)
        if len(keep) != len(att):
            e = ra.Project(keep, e)
        for t in target:
            if t not in keep:
                e = ra.Join(e, ra.NullRel(t))
        return e

    def limit_arity(self, e: ra.RAExpr) -> ra.RAExpr:
        att = self.att(e)
        if len(att) <= self.max_difference_arity:
            return e
        k = self.rng.randint(1, self.max_difference_arity)
        return ra.Project(tuple(self.rng.sample(att, k)), e)

    def generate(self, depth: int) -> ra.RAExpr:
        """A well-formed expression with ``ra.depth(e) <= depth``."""
        for _ in range(20):
            e = self._generate(depth)
            if ra.depth(e) <= depth:
                return e
        return self.base()

    def _generate(self, depth: int) -> ra.RAExpr:
        if depth <= 0:
            return self.base()
        kinds = list(QUERY_WEIGHTS)
        kind = self.rng.choices(kinds, weights=[QUERY_WEIGHTS[k] for k in kinds])[0]
        if kind == "base":
            return self.base()
        if kind == "select":
            child = self.generate(depth - 1)
            return ra.Select(self.condition(self.att(child)), child)
        if kind == "project-rename":
            child = self.generate(depth - 1)
            att = self.att(child)
            if self.rng.random() < 0.5:
                k = self.rng.randint(1, len(att))
                return ra.Project(tuple(self.rng.sample(att, k)), child)
            free = [a for a in ATTRIBUTE_POOL if a not in att]
            if not free:
                return child
            return ra.Rename(self.rng.choice(att), self.rng.choice(free), child)
        if kind == "join":
            left, right = self.generate(depth - 1), self.generate(depth - 1)
            shared = set(self.att(left)) & set(self.att(right))
            if shared and self.rng.random() < self.outer:
                cls = self.rng.choice([ra.LeftOuterJoin, ra.RightOuterJoin, ra.FullOuterJoin])
                return cls(left, right)
            return ra.Join(left, right)
        left = self.generate(depth - 1)
        if kind == "difference":
            left = self.limit_arity(left)
        if self.rng.random() < 0.4:
            right: ra.RAExpr = ra.Select(self.condition(self.att(left)), left)
        else:
            right = self.conform(self.generate(depth - 1), self.att(left))
        return ra.Union(left, right) if kind == "union" else ra.Difference(left, right)


def gen_random_query(schema: RelationalSchema, rng: random.Random, depth: int = 4,
                     max_difference_arity: int = 3) -> ra.RAExpr:
    return QueryGenerator(schema, rng, max_difference_arity).generate(rng.randint(0, depth))


# -- checks ------------------------------------------------------------------


def _doc(db: Database) -> dict[str, Any]:
    return dump_database(db)


def _mapping_list(ms: set[SolutionMapping]) -> list[dict[str, str]]:
    return sorted((mapping_to_json(m) for m in ms), key=lambda d: json.dumps(d, sort_keys=True))


def _map(db: Database, variant: Variant, coverage: Counter | None = None):
    trace: dict | None = {} if coverage is not None else None
    graph = direct_map(db, MappingConfig(db.base, variant), trace)
    if coverage is not None:
        coverage[f"variant:{variant.value}"] += 1
        for rules in trace.values():
            for rule in rules:
                coverage[f"rule:{rule}"] += 1
    return graph


def information_preserved(db: Database, variant: Variant = Variant.DM) -> bool:
    schema, instance = recover_database(_map(db, variant), db.base)
    return same_instance(db.instance, instance)


def check_information_preservation(params: GeneratorParams, trials: int = 200,
                                   variant: Variant = Variant.DM) -> PropertyReport:
    report = PropertyReport("information-preservation", Variant(variant).value)
    for i in range(trials):
        db = gen_random_database(replace(params.trial(i), satisfying=True))
        report.trials += 1
        report.stats["rows"] += len(db.instance)
        _map(db, Variant(variant), report.coverage)
        try:
            ok = information_preserved(db, Variant(variant))
            message = "recovered instance differs from the original"
        except Exception as exc:  # a crash is a failure of the inverse, not of the harness
            ok, message = False, f"{type(exc).__name__}: {exc}"
        if not ok:
            small = minimize(db, lambda d: not information_preserved(d, Variant(variant)))
            report.failures.append(Failure(i, message, _doc(small)))
    return report


@dataclass
class QueryTrial:
    index: int
    database: Database
    query: ra.RAExpr
    pattern: Any
    graph: Any
    expected: set[SolutionMapping]
    actual: set[SolutionMapping]


def query_preserved(db: Database, q: ra.RAExpr, translator: Translator | None = None):
    translator = translator or Translator(db.schema, db.constraints, db.base)
    graph = direct_map(db, MappingConfig(db.base, Variant.DM))
    pattern = translator.translate(q)
    expected = tr_result(ra.evaluate(q, db.instance))
    actual = eval_pattern(pattern, graph)
    return expected == actual, pattern, graph, expected, actual


def check_query_preservation(
    params: GeneratorParams,
    trials: int = 300,
    depth: int = 4,
    max_difference_arity: int = 3,
    on_trial: Callable[[QueryTrial], None] | None = None,
) -> PropertyReport:
    report = PropertyReport("query-preservation", Variant.DM.value)
    for i in range(trials):
        p = replace(params.trial(i), satisfying=True)
        db = gen_random_database(p)
        rng = random.Random(p.seed ^ 0xA1FA)
        q = gen_random_query(db.schema, rng, depth, max_difference_arity)
        report.trials += 1
        translator = Translator(db.schema, db.constraints, db.base)
        try:
            ok, pattern, graph, expected, actual = query_preserved(db, q, translator)
        except Exception as exc:
            report.failures.append(Failure(i, f"{type(exc).__name__}: {exc}", _doc(db), ra.format_ra(q)))
            continue
        report.coverage.update(translator.coverage)
        report.stats["answers"] += len(expected)
        report.stats["nonempty-answers"] += bool(expected)
        report.stats["query-size"] += ra.size(q)
        if not is_non_parametric(pattern):
            report.failures.append(Failure(i, "translation is parametric", _doc(db), ra.format_ra(q)))
        if on_trial is not None:
            on_trial(QueryTrial(i, db, q, pattern, graph, expected, actual))
        if not ok:
            small = minimize(db, lambda d: not query_preserved(d, q)[0])
            _, _, _, exp2, act2 = query_preserved(small, q)
            report.failures.append(Failure(
                i, "tr(eval(Q)) differs from the SPARQL answer", _doc(small), ra.format_ra(q),
                _mapping_list(exp2), _mapping_list(act2),
            ))
    return report


def shrink_instance(db: Database, rng: random.Random, keep_probability: float = 0.6) -> Database:
    """A sub-instance of ``db`` (same tuple ids) obtained by deleting random rows."""
    kept = {
        name: [r for r in db.instance.rows(name) if rng.random() < keep_probability]
        for name in db.schema.names
    }
    return Database(db.schema, db.constraints, db.instance.with_rows(kept), db.base)


def monotonicity_witness(base: str = DEFAULT_BASE) -> tuple[Database, Database]:
    """I1 ⊆ I2 where I1 has a dangling foreign key that I2 repairs."""
    schema = RelationalSchema((Relation("DEPT", ("DID", "NAME")), Relation("COURSE", ("CID", "CODE"))))
    constraints = ConstraintSet(
        (PrimaryKey("DEPT", ("DID",)), PrimaryKey("COURSE", ("CID",))),
        (ForeignKey("COURSE", ("CODE",), "DEPT", ("DID",)),),
    )
    course = [TupleRow("id1", {"CID": "1", "CODE": "7"})]
    i1 = Instance(schema, {"COURSE": course})
    i2 = Instance(schema, {"COURSE": course, "DEPT": [TupleRow("id1", {"DID": "7", "NAME": "CS"})]})
    return Database(schema, constraints, i1, base), Database(schema, constraints, i2, base)


def check_monotonicity(params: GeneratorParams, variant: Variant = Variant.DM,
                       trials: int = 200) -> PropertyReport:
    """Containment for dm and dm-pk; for dm-pk-fk the check looks for counterexamples instead."""
    variant = Variant(variant)
    expect_monotone = variant is not Variant.DM_PK_FK
    report = PropertyReport("monotonicity" if expect_monotone else "non-monotonicity", variant.value)
    for i in range(trials):
        p = params.trial(i)
        db2 = gen_random_database(replace(p, satisfying=i % 2 == 0))
        db1 = shrink_instance(db2, random.Random(p.seed ^ 0x30D0))
        report.trials += 1
        g1, g2 = _map(db1, variant, report.coverage), _map(db2, variant)
        contained = graph_contained(g1, g2)
        report.stats["contained"] += contained
        if not contained:
            witness = {"trial": i, "I1": _doc(db1), "I2": _doc(db2),
                       "missing": [t.n3() for t in sorted(g1.triples - g2.triples)]}
            if expect_monotone:
                report.failures.append(Failure(i, "DM(I1) is not contained in DM(I2)", witness))
            else:
                report.witnesses.append(witness)
    if not expect_monotone:
        db1, db2 = monotonicity_witness(params.base)
        g1, g2 = _map(db1, variant, report.coverage), _map(db2, variant)
        if not graph_contained(g1, g2):
            report.witnesses.append({"trial": "constructed", "I1": _doc(db1), "I2": _doc(db2),
                                     "missing": [t.n3() for t in sorted(g1.triples - g2.triples)]})
        if not report.witnesses:
            report.failures.append(Failure(-1, "no witness of non-monotonicity found"))
    return report


def semantics_agree(db: Database, variant: Variant) -> tuple[bool, bool, bool]:
    """(consistent, satisfied, agreement) for the variant's notion of preservation."""
    variant = Variant(variant)
    constraints = db.constraints.only_primary_keys() if variant is Variant.DM_PK else db.constraints
    consistent = is_consistent(direct_map(db, MappingConfig(db.base, variant)))
    satisfied = satisfies(db.instance, constraints).holds
    if variant is Variant.DM:
        return consistent, satisfied, consistent
    return consistent, satisfied, consistent == satisfied


def check_semantics_preservation(params: GeneratorParams, variant: Variant = Variant.DM_PK_FK,
                                 trials: int = 400) -> PropertyReport:
    """dm: always consistent.  dm-pk: iff over the PK-only constraint set.  dm-pk-fk: iff over Σ."""
    variant = Variant(variant)
    report = PropertyReport("semantics-preservation", variant.value)
    for i in range(trials):
        p = params.trial(i)
        db = gen_random_database(p) if i % 2 == 0 else gen_violating_database(p)
        if variant is Variant.DM_PK:
            db = Database(db.schema, db.constraints.only_primary_keys(), db.instance, db.base)
        report.trials += 1
        _map(db, variant, report.coverage)
        consistent, satisfied, agree = semantics_agree(db, variant)
        report.stats["satisfying"] += satisfied
        report.stats["violating"] += not satisfied
        report.stats["consistent"] += consistent
        if not agree:
            expected = "consistent" if variant is Variant.DM else f"consistent == {satisfied}"
            small = minimize(db, lambda d: not semantics_agree(d, variant)[2])
            report.failures.append(Failure(i, f"expected {expected}, got consistent = {consistent}",
                                           _doc(small)))
    return report


def pk_fk_gap_witness(base: str = DEFAULT_BASE) -> Database:
    """A database violating only a foreign key: dm-pk maps it to a consistent graph."""
    return monotonicity_witness(base)[0]


PROPERTIES = ("info", "query", "mono", "sem")


def run_property(name: str, params: GeneratorParams, variant: Variant | None = None,
                 trials: int | None = None) -> PropertyReport:
    kwargs = {} if trials is None else {"trials": trials}
    if name == "info":
        return check_information_preservation(params, variant=variant or Variant.DM, **kwargs)
    if name == "query":
        return check_query_preservation(params, **kwargs)
    if name == "mono":
        return check_monotonicity(params, variant or Variant.DM, **kwargs)
    if name == "sem":
        return check_semantics_preservation(params, variant or Variant.DM_PK_FK, **kwargs)
    raise ValueError(f"unknown property {name!r}; expected one of {', '.join(PROPERTIES)}")


# -- checks on a given database ----------------------------------------------


def check_database(db: Database, name: str, variant: Variant | None = None, trials: int = 50,
                   seed: int = 0) -> PropertyReport:
    """Run one property against a fixed database (queries are still random)."""
    rng = random.Random(seed)
    if name == "info":
        v = Variant(variant or Variant.DM)
        report = PropertyReport("information-preservation", v.value, trials=1)
        if not satisfies(db.instance, db.constraints).holds:
            report.stats["skipped-violating"] += 1
        elif not information_preserved(db, v):
            report.failures.append(Failure(0, "recovered instance differs from the original", _doc(db)))
        return report
    if name == "query":
        report = PropertyReport("query-preservation", Variant.DM.value)
        for i in range(trials):
            q = gen_random_query(db.schema, rng)
            report.trials += 1
            translator = Translator(db.schema, db.constraints, db.base)
            ok, pattern, *_ = query_preserved(db, q, translator)
            report.coverage.update(translator.coverage)
            if not ok or not is_non_parametric(pattern):
                report.failures.append(Failure(i, "query not preserved", None, ra.format_ra(q)))
        return report
    if name == "mono":
        v = Variant(variant or Variant.DM)
        report = PropertyReport("monotonicity", v.value)
        g2 = _map(db, v)
        for i in range(trials):
            db1 = shrink_instance(db, rng)
            report.trials += 1
            if not graph_contained(_map(db1, v), g2):
                if v is Variant.DM_PK_FK:
                    report.witnesses.append({"trial": i, "I1": _doc(db1)})
                else:
                    report.failures.append(Failure(i, "DM(I1) is not contained in DM(I)", _doc(db1)))
        return report
    if name == "sem":
        v = Variant(variant or Variant.DM_PK_FK)
        report = PropertyReport("semantics-preservation", v.value, trials=1)
        consistent, satisfied, agree = semantics_agree(db, v)
        report.stats["consistent"] += consistent
        report.stats["satisfying"] += satisfied
        if not agree:
            report.failures.append(Failure(0, f"consistent = {consistent}, satisfied = {satisfied}"))
        return report
    raise ValueError(f"unknown property {name!r}; expected one of {', '.join(PROPERTIES)}")
