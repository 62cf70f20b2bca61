from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdb2owl.directmap import MappingConfig, Variant, direct_map
from rdb2owl.inverse import (
    InverseMappingError,
    binary_query,
    class_query,
    recover_as_database,
    recover_database,
    same_instance,
    tr_inverse,
)
from rdb2owl.propcheck import GeneratorParams, gen_random_database
from rdb2owl.rdfgraph import IRI, OWL_CLASS, RDF_TYPE, Literal, RdfGraph, Triple, parse_ntriples, serialize_ntriples
from rdb2owl.sparql import SolutionMapping, is_non_parametric

EX = "http://example.edu/db/"


def test_tr_inverse():
    mu = SolutionMapping({"?A": Literal("1")})
    assert tr_inverse(mu, ["A", "B"]) == {"A": "1", "B": None}
    with pytest.raises(InverseMappingError):
        tr_inverse(SolutionMapping({"?A": IRI(EX + "x")}), ["A"])


def test_university_roundtrip(university):
    schema, instance = recover_database(direct_map(university), EX)
    assert schema.names == ("COURSE", "DEPT", "ENROLLED", "STUDENT")
    assert schema.attributes("COURSE") == ("CID", "CODE", "TITLE")
    assert schema.attributes("ENROLLED") == ("SID", "CID")
    assert same_instance(university.instance, instance)


def test_roundtrip_through_ntriples_text(university):
    text = serialize_ntriples(direct_map(university))
    recovered = recover_as_database(parse_ntriples(text), EX)
    assert same_instance(university.instance, recovered.instance)
    assert recovered.constraints.primary_keys == ()


def test_recover_is_insensitive_to_violation_triples(university):
    g = direct_map(university, MappingConfig(EX, Variant.DM_PK_FK))
    assert same_instance(university.instance, recover_database(g, EX)[1])


def test_same_instance_detects_differences(university, example2):
    assert not same_instance(university.instance, example2.instance)
    _, inst = recover_database(direct_map(university), EX)
    fewer = inst.with_rows({"STUDENT": inst.rows("STUDENT")[1:]})
    assert not same_instance(university.instance, fewer)


def test_recovery_queries_are_non_parametric():
    q = class_query(IRI(EX + "R"), [("A", IRI(EX + "R#A"))])
    assert is_non_parametric(q)
    q = binary_query(IRI(EX + "E#A,B,C,D"), "A", "B", IRI(EX + "S#C"), IRI(EX + "T#D"))
    assert is_non_parametric(q)


def test_foreign_graphs_rejected():
    g = RdfGraph([Triple(IRI("http://elsewhere/R"), RDF_TYPE, OWL_CLASS)])
    with pytest.raises(InverseMappingError, match="not an IRI under base"):
        recover_database(g, EX)
    g = RdfGraph([Triple(IRI(EX + "R"), RDF_TYPE, OWL_CLASS)])
    with pytest.raises(InverseMappingError, match="no datatype properties"):
        recover_database(g, EX)


def test_example2_collapses_duplicate_key_rows(example2):
    # both rows share one IRI; recovery still sees both NAME values
    _, inst = recover_database(direct_map(example2), EX)
    assert same_instance(example2.instance, inst)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 1_000_000))
def test_random_satisfying_databases_roundtrip(seed):
    db = gen_random_database(GeneratorParams(seed=seed))
    _, inst = recover_database(direct_map(db), db.base)
    assert same_instance(db.instance, inst)
