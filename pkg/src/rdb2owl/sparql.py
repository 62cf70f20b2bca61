"""SPARQL graph patterns over the AND/OPT/UNION/MINUS/FILTER/SELECT fragment.

Variables are strings starting with ``?``.  Evaluation is set based: each
pattern denotes a set of solution mappings.  Equality tests on unbound
variables are false rather than errors.
"""
from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Any, Union

from .rdfgraph import IRI, BlankNode, Literal, RdfGraph, Term, parse_ntriples

Var = str
PatternTerm = Union[Var, IRI, Literal]
FRESH_PREFIX = "?__fresh"


class SparqlError(ValueError):
    """Ill-formed or parametric graph pattern."""


def is_var(x: object) -> bool:
    return isinstance(x, str) and x.startswith("?") and len(x) > 1


# -- patterns ----------------------------------------------------------------


@dataclass(frozen=True)
class EmptyPattern:
    pass


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: Union[Var, IRI]
    object: PatternTerm


@dataclass(frozen=True)
class And:
    left: "GraphPattern"
    right: "GraphPattern"


@dataclass(frozen=True)
class Opt:
    left: "GraphPattern"
    right: "GraphPattern"


@dataclass(frozen=True)
class UnionP:
    left: "GraphPattern"
    right: "GraphPattern"


@dataclass(frozen=True)
class Minus:
    left: "GraphPattern"
    right: "GraphPattern"


@dataclass(frozen=True)
class Filter:
    pattern: "GraphPattern"
    condition: "BuiltInCondition"


@dataclass(frozen=True)
class SelectP:
    """SELECT {?A1 AS ?B1, ..., ?C1, ...} (pattern)."""

    renames: tuple[tuple[Var, Var], ...]
    keep: tuple[Var, ...]
    pattern: "GraphPattern"


GraphPattern = Union[EmptyPattern, TriplePattern, And, Opt, UnionP, Minus, Filter, SelectP]
BINARY_PATTERNS = (And, Opt, UnionP, Minus)


# -- built-in conditions -----------------------------------------------------


@dataclass(frozen=True)
class Bound:
    var: Var


@dataclass(frozen=True)
class EqConst:
    var: Var
    const: Union[IRI, Literal]


@dataclass(frozen=True)
class EqVar:
    left: Var
    right: Var


@dataclass(frozen=True)
class Not:
    operand: "BuiltInCondition"


@dataclass(frozen=True)
class Conj:
    operands: tuple["BuiltInCondition", ...]


@dataclass(frozen=True)
class Disj:
    operands: tuple["BuiltInCondition", ...]


BuiltInCondition = Union[Bound, EqConst, EqVar, Not, Conj, Disj]


def conj(conditions: Iterable[BuiltInCondition]) -> BuiltInCondition | None:
    """Conjunction of the given conditions; a single one is returned bare."""
    items = tuple(conditions)
    if not items:
        return None
    return items[0] if len(items) == 1 else Conj(items)


# -- solution mappings -------------------------------------------------------


class SolutionMapping(Mapping):
    """A finite partial function from variables to RDF terms."""

    __slots__ = ("_d", "_key")

    def __init__(self, items: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        self._d = dict(items)
        self._key = frozenset(self._d.items())

    def __getitem__(self, var: Var) -> Term:
        return self._d[var]

    def __iter__(self) -> Iterator[Var]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def __hash__(self) -> int:
        return hash(self._key)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SolutionMapping):
            return self._key == other._key
        return isinstance(other, Mapping) and dict(self._d) == dict(other)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}→{v.n3()}" for k, v in sorted(self._d.items()))
        return "μ{" + body + "}"

    @property
    def domain(self) -> frozenset[Var]:
        return frozenset(self._d)

    def compatible(self, other: SolutionMapping) -> bool:
        small, large = (self, other) if len(self) <= len(other) else (other, self)
        for k, v in small._d.items():
            w = large._d.get(k)
            if w is not None and w != v:
                return False
        return True

    def merge(self, other: SolutionMapping) -> SolutionMapping:
        if not other._d:
            return self
        if not self._d:
            return other
        d = dict(self._d)
        d.update(other._d)
        return SolutionMapping(d)

    def restrict(self, variables: Iterable[Var]) -> SolutionMapping:
        keep = set(variables)
        return SolutionMapping((k, v) for k, v in self._d.items() if k in keep)

    def rename(self, pairs: Iterable[tuple[Var, Var]]) -> SolutionMapping:
        table = dict(pairs)
        if set(table.values()) & (self.domain - set(table)):
            raise SparqlError("rename target already bound")
        return SolutionMapping((table.get(k, k), v) for k, v in self._d.items())


EMPTY_MAPPING = SolutionMapping()


def satisfies_condition(mu: Mapping[Var, Term], cond: BuiltInCondition) -> bool:
    if isinstance(cond, Bound):
        return cond.var in mu
    if isinstance(cond, EqConst):
        return cond.var in mu and mu[cond.var] == cond.const
    if isinstance(cond, EqVar):
        return cond.left in mu and cond.right in mu and mu[cond.left] == mu[cond.right]
    if isinstance(cond, Not):
        return not satisfies_condition(mu, cond.operand)
    if isinstance(cond, Conj):
        return all(satisfies_condition(mu, c) for c in cond.operands)
    if isinstance(cond, Disj):
        return any(satisfies_condition(mu, c) for c in cond.operands)
    raise SparqlError(f"not a built-in condition: {cond!r}")


# -- variables ---------------------------------------------------------------


def condition_variables(cond: BuiltInCondition) -> list[Var]:
    if isinstance(cond, Bound):
        return [cond.var]
    if isinstance(cond, EqConst):
        return [cond.var]
    if isinstance(cond, EqVar):
        return [cond.left, cond.right]
    if isinstance(cond, Not):
        return condition_variables(cond.operand)
    return [v for c in cond.operands for v in condition_variables(c)]


def _occurrences(
    p: GraphPattern, out: Counter, selects: list | None = None, validate: bool = False
) -> Counter:
    """Count every occurrence of every variable in ``p`` (into ``out``)."""
    if isinstance(p, EmptyPattern):
        pass
    elif isinstance(p, TriplePattern):
        for x in (p.subject, p.predicate, p.object):
            if is_var(x):
                out[x] += 1
    elif isinstance(p, BINARY_PATTERNS):
        _occurrences(p.left, out, selects, validate)
        _occurrences(p.right, out, selects, validate)
    elif isinstance(p, Filter):
        _occurrences(p.pattern, out, selects, validate)
        out.update(condition_variables(p.condition))
    elif isinstance(p, SelectP):
        inner = Counter()
        _occurrences(p.pattern, inner, selects, validate)
        if validate:
            check_select(p, inner)
        listed = Counter(v for pair in p.renames for v in pair)
        listed.update(p.keep)
        if selects is not None:
            visible = {a for a, _ in p.renames} | set(p.keep)
            selects.append((set(inner) - visible, inner + listed))
        out.update(inner)
        out.update(listed)
    else:
        raise SparqlError(f"not a graph pattern: {p!r}")
    return out


def variables(p: GraphPattern) -> set[Var]:
    return set(_occurrences(p, Counter()))


def is_non_parametric(p: GraphPattern, validate: bool = False) -> bool:
    """Every variable hidden by a nested SELECT occurs nowhere outside it."""
    selects: list = []
    total = _occurrences(p, Counter(), selects, validate)
    for hidden, inside in selects:
        for x in hidden:
            if total[x] > inside[x]:
                return False
    return True


def rename_variables(p: GraphPattern, table: Mapping[Var, Var]) -> GraphPattern:
    """Rename variables everywhere in ``p``, including SELECT lists."""
    r = lambda x: table.get(x, x) if is_var(x) else x  # noqa: E731

    def cond(c: BuiltInCondition) -> BuiltInCondition:
        if isinstance(c, Bound):
            return Bound(r(c.var))
        if isinstance(c, EqConst):
            return EqConst(r(c.var), c.const)
        if isinstance(c, EqVar):
            return EqVar(r(c.left), r(c.right))
        if isinstance(c, Not):
            return Not(cond(c.operand))
        return type(c)(tuple(cond(x) for x in c.operands))

    def go(p: GraphPattern) -> GraphPattern:
        if isinstance(p, EmptyPattern):
            return p
        if isinstance(p, TriplePattern):
            return TriplePattern(r(p.subject), r(p.predicate), r(p.object))
        if isinstance(p, BINARY_PATTERNS):
            return type(p)(go(p.left), go(p.right))
        if isinstance(p, Filter):
            return Filter(go(p.pattern), cond(p.condition))
        if isinstance(p, SelectP):
            return SelectP(
                tuple((r(a), r(b)) for a, b in p.renames),
                tuple(r(c) for c in p.keep),
                go(p.pattern),
            )
        raise SparqlError(f"not a graph pattern: {p!r}")

    return go(p)


def check_select(p: SelectP, inner: Iterable[Var] | None = None) -> None:
    targets = [b for _, b in p.renames]
    sources = [a for a, _ in p.renames]
    listed = sources + targets + list(p.keep)
    if not all(is_var(v) for v in listed):
        raise SparqlError(f"SELECT lists must contain variables: {listed}")
    if len(set(listed)) != len(listed):
        raise SparqlError(f"SELECT variables must be pairwise distinct: {listed}")
    mentioned = set(targets) & set(variables(p.pattern) if inner is None else inner)
    if mentioned:
        raise SparqlError(f"AS targets {sorted(mentioned)} are mentioned in the inner pattern")


# -- evaluation --------------------------------------------------------------


def _match_triple(tp: TriplePattern, graph: RdfGraph) -> set[SolutionMapping]:
    out = set()
    pool = graph.with_predicate(tp.predicate) if isinstance(tp.predicate, IRI) else graph
    parts = (tp.subject, tp.predicate, tp.object)
    for t in pool:
        binding: dict[Var, Term] = {}
        ok = True
        for pat, term in zip(parts, t):
            if is_var(pat):
                seen = binding.get(pat)
                if seen is None:
                    binding[pat] = term
                elif seen != term:
                    ok = False
                    break
            elif pat != term:
                ok = False
                break
        if ok:
            out.add(SolutionMapping(binding))
    return out


def _always_bound(ms: Iterable[SolutionMapping]) -> set[Var]:
    it = iter(ms)
    first = next(it, None)
    if first is None:
        return set()
    common = set(first.domain)
    for m in it:
        common &= m.domain
        if not common:
            break
    return common


def _compatible_pairs(left: set[SolutionMapping], right: set[SolutionMapping]):
    """Yield (μ1, μ2) for compatible pairs, hash-partitioned on always-bound shared variables."""
    key = sorted(_always_bound(left) & _always_bound(right))
    index: dict[tuple, list[SolutionMapping]] = {}
    for m in right:
        index.setdefault(tuple(m[v] for v in key), []).append(m)
    for m1 in left:
        for m2 in index.get(tuple(m1[v] for v in key), ()):
            if m1.compatible(m2):
                yield m1, m2


def _eval(p: GraphPattern, graph: RdfGraph) -> set[SolutionMapping]:
    if isinstance(p, EmptyPattern):
        return {EMPTY_MAPPING} if len(graph) else set()
    if isinstance(p, TriplePattern):
        return _match_triple(p, graph)
    if isinstance(p, And):
        left, right = _eval(p.left, graph), _eval(p.right, graph)
        return {m1.merge(m2) for m1, m2 in _compatible_pairs(left, right)}
    if isinstance(p, Opt):
        left, right = _eval(p.left, graph), _eval(p.right, graph)
        out, matched = set(), set()
        for m1, m2 in _compatible_pairs(left, right):
            out.add(m1.merge(m2))
            matched.add(m1)
        return out | (left - matched)
    if isinstance(p, UnionP):
        return _eval(p.left, graph) | _eval(p.right, graph)
    if isinstance(p, Minus):
        left, right = _eval(p.left, graph), _eval(p.right, graph)
        return {
            m for m in left
            if all(not m.compatible(m2) or not (m.domain & m2.domain) for m2 in right)
        }
    if isinstance(p, Filter):
        return {m for m in _eval(p.pattern, graph) if satisfies_condition(m, p.condition)}
    if isinstance(p, SelectP):
        visible = [a for a, _ in p.renames] + list(p.keep)
        return {m.restrict(visible).rename(p.renames) for m in _eval(p.pattern, graph)}
    raise SparqlError(f"not a graph pattern: {p!r}")


def eval_pattern(p: GraphPattern, graph: RdfGraph) -> set[SolutionMapping]:
    """⟦p⟧ over ``graph``; ill-formed SELECTs and parametric patterns are rejected."""
    if not is_non_parametric(p, validate=True):
        raise SparqlError("pattern is parametric: a variable hidden by a nested SELECT is used outside it")
    return _eval(p, graph)


# -- SPARQL text -------------------------------------------------------------


def _term_text(x: PatternTerm) -> str:
    if is_var(x):
        return x
    if isinstance(x, (IRI, Literal)):
        return x.n3()
    raise SparqlError(f"bad pattern term {x!r}")


def serialize_condition(c: BuiltInCondition) -> str:
    if isinstance(c, Bound):
        return f"bound({c.var})"
    if isinstance(c, EqConst):
        return f"{c.var} = {_term_text(c.const)}"
    if isinstance(c, EqVar):
        return f"{c.left} = {c.right}"
    if isinstance(c, Not):
        return f"!({serialize_condition(c.operand)})"
    op = " && " if isinstance(c, Conj) else " || "
    if not c.operands:
        return "true" if isinstance(c, Conj) else "false"
    return "(" + op.join(serialize_condition(x) for x in c.operands) + ")"


def _select_head(p: SelectP) -> str:
    items = [f"({a} AS {b})" for a, b in p.renames] + list(p.keep)
    return "SELECT " + (" ".join(items) if items else "?__none")


def _group(p: GraphPattern, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(p, EmptyPattern):
        return "{ }"
    if isinstance(p, TriplePattern):
        return "{ " + " ".join(_term_text(x) for x in (p.subject, p.predicate, p.object)) + " . }"
    if isinstance(p, SelectP):
        return f"{{\n{inner}{_select_head(p)} WHERE {_group(p.pattern, indent + 1)}\n{pad}}}"
    if isinstance(p, Filter):
        return (
            f"{{\n{inner}{_group(p.pattern, indent + 1)}\n"
            f"{inner}FILTER ({serialize_condition(p.condition)})\n{pad}}}"
        )
    keyword = {And: ".", Opt: "OPTIONAL", UnionP: "UNION", Minus: "MINUS"}[type(p)]
    return (
        f"{{\n{inner}{_group(p.left, indent + 1)}\n"
        f"{inner}{keyword}\n"
        f"{inner}{_group(p.right, indent + 1)}\n{pad}}}"
    )


def serialize_sparql(p: GraphPattern) -> str:
    """SPARQL 1.1 query text with explicit grouping braces."""
    if isinstance(p, SelectP):
        return f"{_select_head(p)} WHERE {_group(p.pattern, 0)}\n"
    return f"SELECT * WHERE {_group(p, 0)}\n"


# -- JSON form ---------------------------------------------------------------


def _term_to_json(x: PatternTerm) -> str:
    return x if is_var(x) else _term_text(x)


def _term_from_json(text: str) -> PatternTerm:
    if is_var(text):
        return text
    graph = parse_ntriples(f"<urn:x> <urn:x> {text} .")
    (t,) = graph
    if isinstance(t.object, BlankNode):
        raise SparqlError("blank nodes are not allowed in patterns")
    return t.object


def condition_to_json(c: BuiltInCondition) -> dict[str, Any]:
    if isinstance(c, Bound):
        return {"bound": c.var}
    if isinstance(c, EqConst):
        return {"eq": [c.var, _term_to_json(c.const)]}
    if isinstance(c, EqVar):
        return {"eq": [c.left, c.right]}
    if isinstance(c, Not):
        return {"not": condition_to_json(c.operand)}
    key = "and" if isinstance(c, Conj) else "or"
    return {key: [condition_to_json(x) for x in c.operands]}


def condition_from_json(d: Mapping[str, Any]) -> BuiltInCondition:
    if "bound" in d:
        return Bound(d["bound"])
    if "eq" in d:
        left, right = d["eq"]
        return EqVar(left, right) if is_var(right) else EqConst(left, _term_from_json(right))
    if "not" in d:
        return Not(condition_from_json(d["not"]))
    if "and" in d:
        return Conj(tuple(condition_from_json(x) for x in d["and"]))
    if "or" in d:
        return Disj(tuple(condition_from_json(x) for x in d["or"]))
    raise SparqlError(f"unknown condition {d!r}")


_JSON_KINDS = {And: "and", Opt: "opt", UnionP: "union", Minus: "minus"}


def pattern_to_json(p: GraphPattern) -> dict[str, Any]:
    if isinstance(p, EmptyPattern):
        return {"type": "empty"}
    if isinstance(p, TriplePattern):
        return {"type": "triple", "s": _term_to_json(p.subject), "p": _term_to_json(p.predicate),
                "o": _term_to_json(p.object)}
    if isinstance(p, BINARY_PATTERNS):
        return {"type": _JSON_KINDS[type(p)], "left": pattern_to_json(p.left),
                "right": pattern_to_json(p.right)}
    if isinstance(p, Filter):
        return {"type": "filter", "pattern": pattern_to_json(p.pattern),
                "condition": condition_to_json(p.condition)}
    if isinstance(p, SelectP):
        return {"type": "select", "renames": [list(x) for x in p.renames], "keep": list(p.keep),
                "pattern": pattern_to_json(p.pattern)}
    raise SparqlError(f"not a graph pattern: {p!r}")


def pattern_from_json(d: Mapping[str, Any]) -> GraphPattern:
    kind = d.get("type")
    if kind == "empty":
        return EmptyPattern()
    if kind == "triple":
        return TriplePattern(_term_from_json(d["s"]), _term_from_json(d["p"]), _term_from_json(d["o"]))
    for cls, name in _JSON_KINDS.items():
        if kind == name:
            return cls(pattern_from_json(d["left"]), pattern_from_json(d["right"]))
    if kind == "filter":
        return Filter(pattern_from_json(d["pattern"]), condition_from_json(d["condition"]))
    if kind == "select":
        return SelectP(tuple(tuple(x) for x in d["renames"]), tuple(d["keep"]),
                       pattern_from_json(d["pattern"]))
    raise SparqlError(f"unknown pattern type {kind!r}")


def mapping_to_json(mu: SolutionMapping) -> dict[str, str]:
    return {k: mu[k].n3() for k in sorted(mu)}


def mappings_table(ms: Iterable[SolutionMapping], columns: Iterable[Var]) -> str:
    """Plain-text table, one mapping per row; unbound shown as blank."""
    cols = list(columns)
    rows = sorted(
        ([str(m[c]) if c in m else "" for c in cols] for m in ms),
    )
    widths = [max([len(c)] + [len(r[i]) for r in rows]) for i, c in enumerate(cols)]
    line = lambda cells: " | ".join(x.ljust(w) for x, w in zip(cells, widths)).rstrip()  # noqa: E731
    out = [line(cols), "-+-".join("-" * w for w in widths)]
    out += [line(r) for r in rows]
    return "\n".join(out) + "\n"


__all__ = [
    "EmptyPattern", "TriplePattern", "And", "Opt", "UnionP", "Minus", "Filter", "SelectP",
    "Bound", "EqConst", "EqVar", "Not", "Conj", "Disj", "conj", "SolutionMapping",
    "EMPTY_MAPPING", "satisfies_condition", "eval_pattern", "is_non_parametric",
    "rename_variables", "variables", "serialize_sparql", "pattern_to_json",
    "pattern_from_json", "SparqlError", "is_var", "FRESH_PREFIX",
]
