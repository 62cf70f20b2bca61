from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import consistent_oracle
from rdb2owl.directmap import (
    BinaryRelation,
    MappingConfig,
    ObjectProperty,
    Variant,
    direct_map,
    extract_ontology,
    find_binary_relations,
    generate_iri,
    schema_triples,
)
from rdb2owl.propcheck import GeneratorParams, gen_random_database
from rdb2owl.rdfgraph import (
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
    Triple,
    is_consistent,
    serialize_ntriples,
)
from rdb2owl.relmodel import ConstraintSet, Database, PrimaryKey, RelationalSchema, load_database

EX = "http://example.edu/db/"


def iri(local: str) -> IRI:
    return IRI(EX + local)


def db_of(relations: dict, tuples: dict, pks=(), fks=()) -> Database:
    return load_database({
        "base": EX,
        "relations": [{"name": n, "attributes": a, "tuples": tuples.get(n, [])} for n, a in relations.items()],
        "constraints": {
            "primary_keys": [{"relation": r, "attributes": list(a)} for r, a in pks],
            "foreign_keys": [
                {"relation": r, "attributes": list(a), "ref_relation": s, "ref_attributes": list(b)}
                for r, a, s, b in fks
            ],
        },
    })


# -- ontology ----------------------------------------------------------------


def test_university_ontology(university):
    onto = extract_ontology(university.schema, university.constraints)
    assert onto.classes == ("STUDENT", "COURSE", "DEPT")
    assert onto.binary_relations == (BinaryRelation("ENROLLED", "SID", "CID", "STUDENT", "SID", "COURSE", "CID"),)
    fk_props = [p for p in onto.object_properties if p.origin == "fk"]
    assert fk_props == [ObjectProperty(("CODE",), ("DID",), "COURSE", "DEPT", "fk", "COURSE")]
    assert set(onto.datatype_properties) == {
        ("SID", "STUDENT"), ("NAME", "STUDENT"), ("CID", "COURSE"), ("TITLE", "COURSE"),
        ("CODE", "COURSE"), ("DID", "DEPT"), ("NAME", "DEPT"),
    }


BINREL_BASE = dict(
    relations={"S": ["C"], "T": ["D"], "R": ["A", "B"]},
    pks=[("S", ["C"]), ("T", ["D"]), ("R", ["A", "B"])],
    fks=[("R", ["A"], "S", ["C"]), ("R", ["B"], "T", ["D"])],
)


def binrels(relations, pks, fks):
    db = db_of(relations, {}, pks, fks)
    return find_binary_relations(db.schema, db.constraints)


def test_binrel_detected():
    assert binrels(**BINREL_BASE) == [BinaryRelation("R", "A", "B", "S", "C", "T", "D")]


@pytest.mark.parametrize(
    "change",
    [
        "three-attributes", "single-pk", "missing-fk", "self-reference", "two-fk-from",
        "fk-over-pair", "incoming-fk",
    ],
)
def test_binrel_conditions(change):
    relations = dict(BINREL_BASE["relations"])
    pks, fks = list(BINREL_BASE["pks"]), list(BINREL_BASE["fks"])
    if change == "three-attributes":
        relations["R"] = ["A", "B", "E"]
    elif change == "single-pk":
        pks[2] = ("R", ["A"])
    elif change == "missing-fk":
        fks = fks[:1]
    elif change == "self-reference":
        relations["R"] = ["A", "B"]
        fks[0] = ("R", ["A"], "R", ["B"])
    elif change == "two-fk-from":
        relations["U"] = ["E"]
        pks.append(("U", ["E"]))
        fks.append(("R", ["A"], "U", ["E"]))
    elif change == "fk-over-pair":
        relations["W"] = ["X", "Y"]
        pks.append(("W", ["X", "Y"]))
        fks.append(("R", ["A", "B"], "W", ["X", "Y"]))
    elif change == "incoming-fk":
        relations["V"] = ["A", "B"]
        fks.append(("V", ["A", "B"], "R", ["A", "B"]))
    assert binrels(relations, pks, fks) == []


def test_same_fk_target_twice_is_still_one_target():
    relations = dict(BINREL_BASE["relations"])
    fks = list(BINREL_BASE["fks"]) + [("R", ["A"], "S", ["C"])]
    assert len(binrels(relations, BINREL_BASE["pks"], fks)) == 1


def test_binrel_may_link_a_class_to_itself():
    found = binrels({"P": ["ID"], "F": ["X", "Y"]}, [("P", ["ID"]), ("F", ["X", "Y"])],
                    [("F", ["X"], "P", ["ID"]), ("F", ["Y"], "P", ["ID"])])
    assert found == [BinaryRelation("F", "X", "Y", "P", "ID", "P", "ID")]


# -- IRIs --------------------------------------------------------------------


@pytest.mark.parametrize(
    "kind, components, expected",
    [
        ("class", ("STUDENT",), "STUDENT"),
        ("dtp", ("NAME", "STUDENT"), "STUDENT#NAME"),
        ("op-binrel", ("ENROLLED", "SID", "CID", "SID", "CID"), "ENROLLED#SID,CID,SID,CID"),
        ("op-fk", (["CODE"], ["DID"], "COURSE", "DEPT"), "COURSE,DEPT#CODE,DID"),
        ("op-fk", (["X", "Y"], ["U", "V"], "R", "S"), "R,S#X,Y,U,V"),
        ("row", ("STUDENT", [("SID", "1")]), "STUDENT#SID=1"),
        ("row", ("ENROLLED", [("SID", "1"), ("CID", "c1")]), "ENROLLED#SID=1,CID=c1"),
    ],
)
def test_generate_iri(kind, components, expected):
    assert generate_iri(kind, components, EX) == iri(expected)


@pytest.mark.parametrize(
    "kind, components",
    [("nope", ()), ("op-fk", ([], [], "R", "S")), ("op-fk", (["A"], [], "R", "S")),
     ("row", ("R", [("A", "x,y")])), ("class", ("R#1",))],
)
def test_generate_iri_errors(kind, components):
    with pytest.raises(ValueError):
        generate_iri(kind, components, EX)


# -- graphs ------------------------------------------------------------------


def test_example2_graph(example2, golden_dir):
    g = direct_map(example2)
    assert len(g) == 9
    assert serialize_ntriples(g) == (golden_dir / "example2_dm.nt").read_text()
    assert is_consistent(g)
    assert Triple(iri("STUDENT#SID=1"), RDF_TYPE, iri("STUDENT")) in g


def test_example2_variants_detect_duplicate(example2):
    violation = Triple(iri("violation"), OWL_DIFFERENT_FROM, iri("violation"))
    for variant in (Variant.DM_PK, Variant.DM_PK_FK):
        g = direct_map(example2, MappingConfig(EX, variant))
        assert violation in g
        assert not is_consistent(g)


def test_university_graph(university):
    g = direct_map(university)
    assert is_consistent(g)
    expected = [
        Triple(iri("STUDENT"), RDF_TYPE, OWL_CLASS),
        Triple(iri("COURSE,DEPT#CODE,DID"), RDF_TYPE, OWL_OBJECT_PROPERTY),
        Triple(iri("COURSE,DEPT#CODE,DID"), RDFS_DOMAIN, iri("COURSE")),
        Triple(iri("COURSE,DEPT#CODE,DID"), RDFS_RANGE, iri("DEPT")),
        Triple(iri("ENROLLED#SID,CID,SID,CID"), RDF_TYPE, OWL_OBJECT_PROPERTY),
        Triple(iri("ENROLLED#SID,CID,SID,CID"), RDFS_DOMAIN, iri("STUDENT")),
        Triple(iri("ENROLLED#SID,CID,SID,CID"), RDFS_RANGE, iri("COURSE")),
        Triple(iri("COURSE#TITLE"), RDF_TYPE, OWL_DATATYPE_PROPERTY),
        Triple(iri("COURSE#CID=c1"), iri("COURSE,DEPT#CODE,DID"), iri("DEPT#DID=d1")),
        Triple(iri("STUDENT#SID=1"), iri("ENROLLED#SID,CID,SID,CID"), iri("COURSE#CID=c2")),
        Triple(iri("STUDENT#SID=2"), iri("ENROLLED#SID,CID,SID,CID"), iri("COURSE#CID=c1")),
    ]
    for t in expected:
        assert t in g, t
    assert iri("ENROLLED") not in {t.subject for t in g}
    # NULL values: no literal triple, no reference triple
    assert not list(g.match(iri("STUDENT#SID=3"), iri("STUDENT#NAME")))
    assert not list(g.match(iri("COURSE#CID=c2"), iri("COURSE,DEPT#CODE,DID")))
    # 7 DTPs x 2 + 3 classes + 2 ObjPs x 3 = 23 schema triples
    assert len(schema_triples(g)) == 23
    # 7 table + 14 literal (two NULLs among 16 values) + 4 references
    assert len(g) - 23 == 7 + 14 + 4


def test_no_primary_key_gives_blank_nodes():
    db = db_of({"R": ["A"]}, {"R": [["1"], ["2"]]})
    subjects = {t.subject for t in direct_map(db).match(p=RDF_TYPE, o=iri("R"))}
    assert subjects == {BlankNode("Rid1"), BlankNode("Rid2")}


def test_null_key_value_falls_back_to_blank_node():
    db = db_of({"R": ["A", "B"]}, {"R": [[None, "x"]]}, pks=[("R", ["A"])])
    g = direct_map(db)
    assert Triple(BlankNode("Rid1"), iri("R#B"), Literal("x")) in g
    assert not is_consistent(direct_map(db, MappingConfig(EX, Variant.DM_PK)))


def test_fk_references_join_on_values_not_null():
    db = db_of({"R": ["X"], "S": ["Y"]}, {"R": [[None], ["1"]], "S": [["1"]]},
               pks=[("S", ["Y"])], fks=[("R", ["X"], "S", ["Y"])])
    refs = list(direct_map(db).match(p=iri("R,S#X,Y")))
    assert [t.object for t in refs] == [iri("S#Y=1")]


def _trace(db, variant):
    trace: dict = {}
    direct_map(db, MappingConfig(EX, variant), trace)
    return {r for rules in trace.values() for r in rules}


def test_violation_rules():
    base = dict(relations={"R": ["X"], "S": ["Y", "Z"]}, pks=[("S", ["Y"])], fks=[("R", ["X"], "S", ["Y"])])
    dangling = db_of(tuples={"R": [["9"]], "S": [["1", "a"]]}, **base)
    assert "fk-dangling" in _trace(dangling, Variant.DM_PK_FK)
    assert "fk-dangling" not in _trace(dangling, Variant.DM_PK)
    assert is_consistent(direct_map(dangling, MappingConfig(EX, Variant.DM_PK)))
    dup = db_of(tuples={"S": [["1", "a"], ["1", "b"]]}, **base)
    rules = _trace(dup, Variant.DM_PK_FK)
    assert {"pk-duplicate", "fk-referenced-key"} <= rules
    null = db_of(tuples={"S": [[None, "a"]]}, **base)
    assert "pk-null" in _trace(null, Variant.DM_PK)
    assert "fk-referenced-key" in _trace(null, Variant.DM_PK_FK)


def test_fk_to_non_key_attributes():
    db = db_of({"R": ["X"], "S": ["Y"]}, {"R": [["1"]], "S": [["1"]]}, fks=[("R", ["X"], "S", ["Y"])])
    assert is_consistent(direct_map(db, MappingConfig(EX, Variant.DM_PK_FK)))
    db2 = db_of({"R": ["X"], "S": ["Y", "Z"]}, {"R": [["1"]], "S": [["1", "a"], ["1", "b"]]},
                fks=[("R", ["X"], "S", ["Y"])])
    assert not is_consistent(direct_map(db2, MappingConfig(EX, Variant.DM_PK_FK)))


def test_custom_violation_iri(example2):
    g = direct_map(example2, MappingConfig(EX, Variant.DM_PK, "http://other.org/bad"))
    bad = IRI("http://other.org/bad")
    assert Triple(bad, OWL_DIFFERENT_FROM, bad) in g


def test_trace_names_every_triple(university):
    trace: dict = {}
    g = direct_map(university, MappingConfig(EX, Variant.DM_PK_FK), trace)
    assert set(trace) == set(g.triples)
    assert trace[Triple(iri("STUDENT#SID=1"), RDF_TYPE, iri("STUDENT"))] == ["table"]


def test_mapping_is_deterministic(university):
    assert serialize_ntriples(direct_map(university)) == serialize_ntriples(direct_map(university))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(list(Variant)))
def test_consistency_matches_oracle(seed, variant):
    db = gen_random_database(GeneratorParams(seed=seed, satisfying=False))
    g = direct_map(db, MappingConfig(EX, variant))
    assert is_consistent(g) == consistent_oracle(g)
    if variant is Variant.DM:
        assert is_consistent(g)


def test_empty_schema_maps_to_empty_graph():
    db = Database(RelationalSchema(()), ConstraintSet(), load_database({"relations": []}).instance)
    assert len(direct_map(db)) == 0


def test_unused_keys_are_harmless():
    db = db_of({"R": ["A"]}, {}, pks=[("R", ["A"])])
    assert direct_map(db, MappingConfig(EX, Variant.DM_PK_FK)) == direct_map(db)
    assert PrimaryKey("R", ("A",)) in db.constraints.primary_keys
