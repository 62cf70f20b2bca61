from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import nested_loop_loj, ra_eval
from rdb2owl import relalg as ra
from rdb2owl.propcheck import GeneratorParams, QueryGenerator, gen_random_database, gen_random_query
from rdb2owl.relmodel import Instance, RelationalSchema


@pytest.fixture
def rs():
    schema = RelationalSchema.of({"R": ["A", "B"], "S": ["B", "C"]})
    inst = Instance.from_rows(schema, {
        "R": [["1", "x"], ["2", None], ["3", "y"]],
        "S": [["x", "c1"], ["x", "c2"], [None, "c3"], ["z", "c4"]],
    })
    return schema, inst


def rows(result):
    """Tuples in sorted attribute order; NULL sorts first."""
    out = [tuple(d[a] for a in sorted(d)) for d in result.dicts()]
    return sorted(out, key=lambda t: [(v is not None, v or "") for v in t])


def test_selection_never_matches_null(rs):
    _, inst = rs
    assert rows(ra.evaluate(ra.parse_ra("select(B=x, R)"), inst)) == [("1", "x")]
    assert rows(ra.evaluate(ra.parse_ra("select(B!=x, R)"), inst)) == [("3", "y")]
    assert rows(ra.evaluate(ra.parse_ra("select(isnull(B), R)"), inst)) == [("2", None)]
    assert len(ra.evaluate(ra.parse_ra("select(isnotnull(B), R)"), inst)) == 2


def test_join_requires_non_null_equal(rs):
    _, inst = rs
    out = ra.evaluate(ra.parse_ra("join(R, S)"), inst)
    assert out.attributes == ("A", "B", "C")
    assert rows(out) == [("1", "x", "c1"), ("1", "x", "c2")]


def test_join_without_shared_attributes_is_product(rs):
    schema, inst = rs
    q = ra.parse_ra("join(R, rename(B->D, S))")
    assert len(ra.evaluate(q, inst)) == 12


def test_union_and_difference_treat_null_as_equal(rs):
    _, inst = rs
    q = ra.parse_ra("diff(R, select(isnull(B), R))")
    assert rows(ra.evaluate(q, inst)) == [("1", "x"), ("3", "y")]
    q = ra.parse_ra("union(R, select(isnull(B), R))")
    assert len(ra.evaluate(q, inst)) == 3


def test_left_outer_join_hand_computed(rs):
    _, inst = rs
    out = ra.evaluate(ra.parse_ra("louter(R, S)"), inst)
    assert rows(out) == [("1", "x", "c1"), ("1", "x", "c2"), ("2", None, None), ("3", "y", None)]


def test_right_and_full_outer_join(rs):
    _, inst = rs
    right = ra.evaluate(ra.parse_ra("router(R, S)"), inst)
    assert rows(right) == [(None, None, "c3"), (None, "z", "c4"), ("1", "x", "c1"), ("1", "x", "c2")]
    full = ra.evaluate(ra.parse_ra("fouter(R, S)"), inst)
    assert len(full) == 6


def test_nullrel():
    schema = RelationalSchema.of({"R": ["A"]})
    inst = Instance.from_rows(schema, {"R": [["1"]]})
    assert rows(ra.evaluate(ra.NullRel("Z"), inst)) == [(None,)]
    assert rows(ra.evaluate(ra.parse_ra("join(R, nullrel(Z))"), inst)) == [("1", None)]
    assert len(ra.evaluate(ra.parse_ra("join(R, nullrel(A))"), inst)) == 0


@pytest.mark.parametrize(
    "text, message",
    [
        ("select(Z=1, R)", "selection on"),
        ("project({Z}, R)", "projection attributes"),
        ("rename(A->B, R)", "already in"),
        ("rename(Z->Q, R)", "rename source"),
        ("union(R, S)", "incompatible"),
        ("diff(R, S)", "incompatible"),
        ("louter(R, rename(B->D, S))", "shared attribute"),
        ("T", "unknown relation"),
    ],
)
def test_well_formedness(rs, text, message):
    schema, _ = rs
    with pytest.raises(ra.RAError, match=message):
        ra.attributes(ra.parse_ra(text), schema)


def test_empty_projection_rejected(rs):
    schema, _ = rs
    with pytest.raises(ra.RAError, match="empty"):
        ra.attributes(ra.Project((), ra.Rel("R")), schema)


def test_attribute_order(rs):
    schema, _ = rs
    assert ra.attributes(ra.parse_ra("project({B, A}, R)"), schema) == ("A", "B")
    assert ra.attributes(ra.parse_ra("rename(A->Z, R)"), schema) == ("Z", "B")


def test_desugared_loj_uses_only_basic_operators(rs):
    schema, _ = rs
    e = ra.desugar_left_outer_join(ra.Rel("R"), ra.Rel("S"), schema)

    def walk(x):
        assert not isinstance(x, ra.OUTER_JOINS)
        for child in ("child", "left", "right"):
            if hasattr(x, child):
                walk(getattr(x, child))

    walk(e)
    assert isinstance(e, ra.Union)


@pytest.mark.parametrize(
    "text",
    [
        "join(select(NAME=Juan, STUDENT), ENROLLED)",
        "project({A, B}, rename(C->D, R))",
        'select(A="a b", R)',
        'select(A!="x->y", R)',
        "select(isnull(A), select(isnotnull(B), R))",
        "louter(R, router(S, fouter(T, nullrel(A))))",
        "union(diff(R, S), R)",
        'select(A="isnull", R)',
        'select(A="", R)',
    ],
)
def test_parse_format_roundtrip(text):
    e = ra.parse_ra(text)
    assert ra.parse_ra(ra.format_ra(e)) == e


@pytest.mark.parametrize("text", ["join(R", "select(A, R)", "R S", "frob(R)", "project({}, R)", "select(A=1 R)"])
def test_parse_errors(text):
    with pytest.raises((ra.RAError, ValueError)):
        ra.parse_ra(text)


def test_size_and_depth():
    e = ra.parse_ra("join(select(A=1, R), S)")
    assert ra.size(e) == 4
    assert ra.depth(e) == 2


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_evaluate_agrees_with_naive_oracle(seed):
    db = gen_random_database(GeneratorParams(seed=seed, satisfying=seed % 2 == 0))
    q = gen_random_query(db.schema, random.Random(seed), depth=4)
    assert set(ra.evaluate(q, db.instance).rows) == ra_eval(q, db.instance)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_format_roundtrip_on_random_queries(seed):
    db = gen_random_database(GeneratorParams(seed=seed))
    q = gen_random_query(db.schema, random.Random(seed), depth=4)
    assert ra.parse_ra(ra.format_ra(q)) == q


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_desugared_loj_matches_nested_loop(seed):
    rng = random.Random(seed)
    db = gen_random_database(GeneratorParams(seed=seed, satisfying=False))
    gen = QueryGenerator(db.schema, rng)
    lhs, rhs = gen.generate(2), gen.generate(2)
    la, rb = ra.attributes(lhs, db.schema), ra.attributes(rhs, db.schema)
    if not set(la) & set(rb):
        return
    got = ra.evaluate(ra.desugar_left_outer_join(lhs, rhs, db.schema), db.instance)
    want = nested_loop_loj(ra_eval(lhs, db.instance), ra_eval(rhs, db.instance), la, rb)
    assert set(got.rows) == want
