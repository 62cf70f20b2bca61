"""Null-aware relational algebra: expression trees, evaluation, outer joins.

Selection and join never match NULL.  Union and difference compare whole
tuples, where NULL is equal to NULL.
"""
from __future__ import annotations

import json
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import Union as TUnion

from .relmodel import Instance, RelationalSchema, Value, check_name

Row = frozenset  # frozenset[tuple[str, Value]]


class RAError(ValueError):
    """Ill-formed relational algebra expression or syntax error."""


# -- conditions --------------------------------------------------------------


@dataclass(frozen=True)
class Eq:
    attribute: str
    value: str


@dataclass(frozen=True)
class Neq:
    attribute: str
    value: str


@dataclass(frozen=True)
class IsNull:
    attribute: str


@dataclass(frozen=True)
class IsNotNull:
    attribute: str


Condition = TUnion[Eq, Neq, IsNull, IsNotNull]


def holds(cond: Condition, row: Mapping[str, Value]) -> bool:
    v = row[cond.attribute]
    if isinstance(cond, Eq):
        return v is not None and v == cond.value
    if isinstance(cond, Neq):
        return v is not None and v != cond.value
    if isinstance(cond, IsNull):
        return v is None
    return v is not None


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Rel:
    name: str


@dataclass(frozen=True)
class NullRel:
    attribute: str


@dataclass(frozen=True)
class Select:
    condition: Condition
    child: "RAExpr"


@dataclass(frozen=True)
class Project:
    attributes: tuple[str, ...]
    child: "RAExpr"


@dataclass(frozen=True)
class Rename:
    old: str
    new: str
    child: "RAExpr"


@dataclass(frozen=True)
class Join:
    left: "RAExpr"
    right: "RAExpr"


@dataclass(frozen=True)
class Union:
    left: "RAExpr"
    right: "RAExpr"


@dataclass(frozen=True)
class Difference:
    left: "RAExpr"
    right: "RAExpr"


@dataclass(frozen=True)
class LeftOuterJoin:
    left: "RAExpr"
    right: "RAExpr"


@dataclass(frozen=True)
class RightOuterJoin:
    left: "RAExpr"
    right: "RAExpr"


@dataclass(frozen=True)
class FullOuterJoin:
    left: "RAExpr"
    right: "RAExpr"


RAExpr = TUnion[
    Rel, NullRel, Select, Project, Rename, Join, Union, Difference,
    LeftOuterJoin, RightOuterJoin, FullOuterJoin,
]
BINARY_NODES = (Join, Union, Difference, LeftOuterJoin, RightOuterJoin, FullOuterJoin)
OUTER_JOINS = (LeftOuterJoin, RightOuterJoin, FullOuterJoin)


def attributes(e: RAExpr, schema: RelationalSchema) -> tuple[str, ...]:
    """att(e) as an ordered tuple; raises RAError when a side condition fails."""
    if isinstance(e, Rel):
        if e.name not in schema:
            raise RAError(f"unknown relation {e.name!r}")
        return schema.attributes(e.name)
    if isinstance(e, NullRel):
        return (e.attribute,)
    if isinstance(e, Select):
        att = attributes(e.child, schema)
        if e.condition.attribute not in att:
            raise RAError(f"selection on {e.condition.attribute!r}, not an attribute of {att}")
        return att
    if isinstance(e, Project):
        att = attributes(e.child, schema)
        if not e.attributes:
            raise RAError("projection onto the empty attribute set")
        missing = set(e.attributes) - set(att)
        if missing:
            raise RAError(f"projection attributes {sorted(missing)} not in {att}")
        return tuple(a for a in att if a in e.attributes)
    if isinstance(e, Rename):
        att = attributes(e.child, schema)
        if e.old not in att:
            raise RAError(f"rename source {e.old!r} not in {att}")
        if e.new in att:
            raise RAError(f"rename target {e.new!r} already in {att}")
        return tuple(e.new if a == e.old else a for a in att)
    if isinstance(e, (Join, LeftOuterJoin, RightOuterJoin, FullOuterJoin)):
        left = attributes(e.left, schema)
        right = attributes(e.right, schema)
        if isinstance(e, OUTER_JOINS) and not set(left) & set(right):
            raise RAError("outer join needs at least one shared attribute")
        return left + tuple(a for a in right if a not in left)
    if isinstance(e, (Union, Difference)):
        left = attributes(e.left, schema)
        right = attributes(e.right, schema)
        if set(left) != set(right):
            op = "union" if isinstance(e, Union) else "difference"
            raise RAError(f"{op} of incompatible attribute sets {left} and {right}")
        return left
    raise RAError(f"not a relational algebra expression: {e!r}")


# -- results -----------------------------------------------------------------


class ResultSet:
    """A set of tuples over a fixed attribute set (order is presentation only)."""

    __slots__ = ("attributes", "rows")

    def __init__(self, attributes: Iterable[str], rows: Iterable[Row]):
        self.attributes = tuple(attributes)
        self.rows = frozenset(rows)

    @classmethod
    def of(cls, attributes: Iterable[str], tuples: Iterable[Iterable[Value]]) -> ResultSet:
        attrs = tuple(attributes)
        return cls(attrs, (frozenset(zip(attrs, t)) for t in tuples))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ResultSet)
            and set(self.attributes) == set(other.attributes)
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((frozenset(self.attributes), self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def dicts(self) -> list[dict[str, Value]]:
        """Rows as dicts, sorted for stable display (NULL sorts first)."""
        out = [dict(r) for r in self.rows]
        out.sort(key=lambda d: [(d[a] is not None, d[a] or "") for a in self.attributes])
        return out

    def __repr__(self) -> str:
        return f"ResultSet({self.attributes}, {self.dicts()})"


def _rename_row(row: Row, old: str, new: str) -> Row:
    return frozenset((new if a == old else a, v) for a, v in row)


def _join_rows(left: Iterable[Row], right: Iterable[Row], shared: tuple[str, ...]) -> set[Row]:
    index: dict[tuple, list[Row]] = {}
    for r in right:
        d = dict(r)
        key = tuple(d[a] for a in shared)
        if None not in key:
            index.setdefault(key, []).append(r)
    out = set()
    for l in left:
        d = dict(l)
        key = tuple(d[a] for a in shared)
        if None in key:
            continue
        for r in index.get(key, ()):
            out.add(l | r)
    return out


def evaluate(e: RAExpr, instance: Instance) -> ResultSet:
    """⟦e⟧ over ``instance``; outer joins are evaluated through their desugaring."""
    schema = instance.schema
    att = attributes(e, schema)

    def go(e: RAExpr) -> set[Row] | frozenset[Row]:
        if isinstance(e, Rel):
            return {row.value_key for row in instance.rows(e.name)}
        if isinstance(e, NullRel):
            return {frozenset({(e.attribute, None)})}
        if isinstance(e, Select):
            return {r for r in go(e.child) if holds(e.condition, dict(r))}
        if isinstance(e, Project):
            keep = set(e.attributes)
            return {frozenset(p for p in r if p[0] in keep) for r in go(e.child)}
        if isinstance(e, Rename):
            return {_rename_row(r, e.old, e.new) for r in go(e.child)}
        if isinstance(e, Join):
            left_att = attributes(e.left, schema)
            right_att = attributes(e.right, schema)
            shared = tuple(a for a in left_att if a in right_att)
            return _join_rows(go(e.left), go(e.right), shared)
        if isinstance(e, Union):
            return set(go(e.left)) | set(go(e.right))
        if isinstance(e, Difference):
            return set(go(e.left)) - set(go(e.right))
        if isinstance(e, OUTER_JOINS):
            return go(desugar(e, schema))
        raise RAError(f"not a relational algebra expression: {e!r}")

    return ResultSet(att, go(e))


eval_ra = evaluate


# -- outer joins -------------------------------------------------------------


def _chain(op, items: list[RAExpr]) -> RAExpr:
    out = items[0]
    for item in items[1:]:
        out = op(out, item)
    return out


def desugar_left_outer_join(lhs: RAExpr, rhs: RAExpr, schema: RelationalSchema) -> RAExpr:
    """Express lhs ⟕ rhs with the eight basic operators.

    (lhs ⋈ rhs) ∪ [(σ_isnull(A1)(lhs) ∪ … ∪ σ_isnull(Ak)(lhs)
                    ∪ lhs ⋈ (σ_isnotnull(A1..Ak)(π_A(lhs)) ∖ π_A(rhs))) ⋈ NULL_B1 ⋈ … ⋈ NULL_Bl]
    where A are the shared attributes and B the attributes only in rhs.
    """
    left_att = attributes(lhs, schema)
    right_att = attributes(rhs, schema)
    shared = tuple(a for a in left_att if a in right_att)
    if not shared:
        raise RAError("left outer join needs at least one shared attribute")
    extra = tuple(a for a in right_att if a not in left_att)

    keys: RAExpr = Project(shared, lhs)
    for a in shared:
        keys = Select(IsNotNull(a), keys)
    unmatched = Join(lhs, Difference(keys, Project(shared, rhs)))
    dangling = _chain(Union, [Select(IsNull(a), lhs) for a in shared] + [unmatched])
    padded = _chain(Join, [dangling] + [NullRel(b) for b in extra])
    return Union(Join(lhs, rhs), padded)


def desugar_right_outer_join(lhs: RAExpr, rhs: RAExpr, schema: RelationalSchema) -> RAExpr:
    return desugar_left_outer_join(rhs, lhs, schema)


def desugar_full_outer_join(lhs: RAExpr, rhs: RAExpr, schema: RelationalSchema) -> RAExpr:
    return Union(
        desugar_left_outer_join(lhs, rhs, schema),
        desugar_left_outer_join(rhs, lhs, schema),
    )


def desugar(e: RAExpr, schema: RelationalSchema) -> RAExpr:
    """Remove every outer-join node, bottom-up."""
    if isinstance(e, (Rel, NullRel)):
        return e
    if isinstance(e, Select):
        return Select(e.condition, desugar(e.child, schema))
    if isinstance(e, Project):
        return Project(e.attributes, desugar(e.child, schema))
    if isinstance(e, Rename):
        return Rename(e.old, e.new, desugar(e.child, schema))
    left, right = desugar(e.left, schema), desugar(e.right, schema)
    if isinstance(e, LeftOuterJoin):
        return desugar_left_outer_join(left, right, schema)
    if isinstance(e, RightOuterJoin):
        return desugar_right_outer_join(left, right, schema)
    if isinstance(e, FullOuterJoin):
        return desugar_full_outer_join(left, right, schema)
    return type(e)(left, right)


def size(e: RAExpr) -> int:
    if isinstance(e, (Rel, NullRel)):
        return 1
    if isinstance(e, (Select, Project, Rename)):
        return 1 + size(e.child)
    return 1 + size(e.left) + size(e.right)


def depth(e: RAExpr) -> int:
    if isinstance(e, (Rel, NullRel)):
        return 0
    if isinstance(e, (Select, Project, Rename)):
        return 1 + depth(e.child)
    return 1 + max(depth(e.left), depth(e.right))


# -- text syntax -------------------------------------------------------------

_TOKEN = re.compile(
    r'\s*(?:(?P<str>"(?:[^"\\]|\\.)*")|(?P<arrow>->)|(?P<neq>!=)|(?P<punct>[(),{}=])'
    r'|(?P<word>(?:[^\s(),{}="!-]|-(?!>))+))'
)
_BINARY_KEYWORDS = {
    "join": Join, "union": Union, "diff": Difference,
    "louter": LeftOuterJoin, "router": RightOuterJoin, "fouter": FullOuterJoin,
}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise RAError(f"unexpected character {text[pos:].lstrip()[:1]!r} at offset {pos}")
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "str":
            value = json.loads(value)
        tokens.append((kind, value, m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.end = len(text)
        self.i = 0

    def peek(self, offset: int = 0):
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else ("eof", "", self.end)

    def take(self, kind: str | None = None, value: str | None = None) -> str:
        tok = self.peek()
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise RAError(f"expected {want!r} but found {got!r} at offset {tok[2]}")
        self.i += 1
        return tok[1]

    def name(self, what: str) -> str:
        tok = self.peek()
        value = self.take("word")
        try:
            return check_name(value, what)
        except ValueError as exc:
            raise RAError(f"{exc} at offset {tok[2]}") from None

    def value(self) -> str:
        tok = self.peek()
        if tok[0] in ("word", "str"):
            self.i += 1
            return tok[1]
        raise RAError(f"expected a constant at offset {tok[2]}")

    def condition(self) -> Condition:
        kind, word, _ = self.peek()
        if kind == "word" and word in ("isnull", "isnotnull") and self.peek(1)[1] == "(":
            self.i += 1
            self.take("punct", "(")
            attr = self.name("attribute")
            self.take("punct", ")")
            return IsNull(attr) if word == "isnull" else IsNotNull(attr)
        attr = self.name("attribute")
        if self.peek()[0] == "neq":
            self.i += 1
            return Neq(attr, self.value())
        self.take("punct", "=")
        return Eq(attr, self.value())

    def expr(self) -> RAExpr:
        kind, word, _ = self.peek()
        if kind != "word":
            raise RAError(f"expected an expression at offset {self.peek()[2]}")
        if self.peek(1)[1] != "(":
            return Rel(self.name("relation"))
        self.i += 2
        if word == "select":
            cond = self.condition()
            self.take("punct", ",")
            node: RAExpr = Select(cond, self.expr())
        elif word == "project":
            self.take("punct", "{")
            attrs = [self.name("attribute")]
            while self.peek()[1] == ",":
                self.i += 1
                attrs.append(self.name("attribute"))
            self.take("punct", "}")
            self.take("punct", ",")
            node = Project(tuple(attrs), self.expr())
        elif word == "rename":
            old = self.name("attribute")
            self.take("arrow")
            new = self.name("attribute")
            self.take("punct", ",")
            node = Rename(old, new, self.expr())
        elif word == "nullrel":
            node = NullRel(self.name("attribute"))
        elif word in _BINARY_KEYWORDS:
            left = self.expr()
            self.take("punct", ",")
            node = _BINARY_KEYWORDS[word](left, self.expr())
        else:
            raise RAError(f"unknown operator {word!r}")
        self.take("punct", ")")
        return node


def parse_ra(text: str) -> RAExpr:
    """Parse the textual syntax, e.g. ``join(select(NAME=Juan, STUDENT), ENROLLED)``."""
    parser = _Parser(text)
    e = parser.expr()
    if parser.peek()[0] != "eof":
        raise RAError(f"trailing input at offset {parser.peek()[2]}")
    return e


_BARE = re.compile(r'^[^\s(),{}="!\\]+$')


def _fmt_value(v: str) -> str:
    bare = _BARE.match(v) and "->" not in v and v not in ("isnull", "isnotnull")
    return v if bare else json.dumps(v)


def format_ra(e: RAExpr) -> str:
    """Inverse of parse_ra."""
    if isinstance(e, Rel):
        return e.name
    if isinstance(e, NullRel):
        return f"nullrel({e.attribute})"
    if isinstance(e, Select):
        c = e.condition
        if isinstance(c, Eq):
            cond = f"{c.attribute}={_fmt_value(c.value)}"
        elif isinstance(c, Neq):
            cond = f"{c.attribute}!={_fmt_value(c.value)}"
        elif isinstance(c, IsNull):
            cond = f"isnull({c.attribute})"
        else:
            cond = f"isnotnull({c.attribute})"
        return f"select({cond}, {format_ra(e.child)})"
    if isinstance(e, Project):
        return f"project({{{', '.join(e.attributes)}}}, {format_ra(e.child)})"
    if isinstance(e, Rename):
        return f"rename({e.old}->{e.new}, {format_ra(e.child)})"
    for word, cls in _BINARY_KEYWORDS.items():
        if type(e) is cls:
            return f"{word}({format_ra(e.left)}, {format_ra(e.right)})"
    raise RAError(f"not a relational algebra expression: {e!r}")
