from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdb2owl.rdfgraph import (
    IRI,
    OWL_DIFFERENT_FROM,
    RDF_TYPE,
    BlankNode,
    Literal,
    NTriplesError,
    RdfGraph,
    Triple,
    graph_contained,
    is_consistent,
    parse_ntriples,
    serialize_ntriples,
)

EX = "http://example.edu/db/"


def test_ill_typed_triples_rejected():
    with pytest.raises(TypeError):
        RdfGraph([Triple(Literal("x"), RDF_TYPE, IRI(EX + "R"))])
    with pytest.raises(TypeError):
        RdfGraph([Triple(IRI(EX + "a"), BlankNode("b"), IRI(EX + "R"))])


def test_set_semantics_and_operations():
    a = Triple(IRI(EX + "a"), RDF_TYPE, IRI(EX + "R"))
    b = Triple(BlankNode("b"), IRI(EX + "R#A"), Literal("1"))
    g = RdfGraph([a, a, b])
    assert len(g) == 2
    assert RdfGraph([a]) <= g
    assert graph_contained(RdfGraph([a]), g)
    assert not graph_contained(g, RdfGraph([a]))
    assert (g - RdfGraph([a])) == RdfGraph([b])
    assert list(g.match(p=RDF_TYPE)) == [a]
    assert list(g.match(s=BlankNode("b"))) == [b]


def test_consistency_is_reflexive_different_from():
    a, b = IRI(EX + "a"), IRI(EX + "b")
    assert is_consistent(RdfGraph([Triple(a, OWL_DIFFERENT_FROM, b)]))
    assert not is_consistent(RdfGraph([Triple(a, OWL_DIFFERENT_FROM, a)]))
    assert is_consistent(RdfGraph())


def test_serialization_is_sorted_and_escaped():
    g = RdfGraph([
        Triple(IRI(EX + "b"), IRI(EX + "p"), Literal('say "hi"\\\n')),
        Triple(BlankNode("x"), IRI(EX + "p"), IRI(EX + "a")),
        Triple(IRI(EX + "a"), IRI(EX + "p"), Literal("1")),
    ])
    assert serialize_ntriples(g) == (
        '<http://example.edu/db/a> <http://example.edu/db/p> "1" .\n'
        '<http://example.edu/db/b> <http://example.edu/db/p> "say \\"hi\\"\\\\\\n" .\n'
        "_:x <http://example.edu/db/p> <http://example.edu/db/a> .\n"
    )


def test_parse_skips_comments_and_blank_lines():
    text = "# comment\n\n<http://a/s> <http://a/p> \"v\" .\r\n"
    assert parse_ntriples(text) == RdfGraph([Triple(IRI("http://a/s"), IRI("http://a/p"), Literal("v"))])


@pytest.mark.parametrize(
    "text, line",
    [
        ("<http://a/s> <http://a/p> \"v\"\n", 1),
        ("\n\"v\" <http://a/p> <http://a/o> .\n", 2),
        ("<http://a/s> _:p <http://a/o> .\n", 1),
        ("<http://a/s> <http://a/p> \"bad \\q\" .\n", 1),
        ("<http://a/s> <http://a/p> .\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(NTriplesError) as info:
        parse_ntriples(text)
    assert info.value.line == line


iris = st.from_regex(r"http://ex\.org/[A-Za-z0-9#,=_]{1,12}", fullmatch=True).map(IRI)
bnodes = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True).map(BlankNode)
literals = st.text(max_size=20).map(Literal)
triples = st.builds(Triple, st.one_of(iris, bnodes), iris, st.one_of(iris, bnodes, literals))


@given(st.lists(triples, max_size=15))
def test_ntriples_roundtrip(ts):
    g = RdfGraph(ts)
    text = serialize_ntriples(g)
    assert parse_ntriples(text) == g
    assert serialize_ntriples(parse_ntriples(text)) == text
