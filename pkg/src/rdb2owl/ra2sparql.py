"""Compile relational algebra into SPARQL graph patterns over the mapped graph.

For every expression Q the pattern Q* returned by ``translate`` satisfies
tr(⟦Q⟧_I) = ⟦Q*⟧ over the direct-mapping image of I.  Attribute A becomes
variable ?A; helper variables come from the reserved ``?__fresh<n>`` space.

Two measures keep every output non-parametric:

* below a projection or rename, variables of Q1* that the SELECT does not
  expose are renamed to fresh ones, so hidden names never clash with
  attribute names;
* each copy of Q1* and Q2* made by the difference case gets its own fresh
  variables.
"""
from __future__ import annotations

from collections import Counter
from collections.abc import Mapping

from . import relalg as ra
from .directmap import binrel_iri, class_iri, dtp_iri, extract_ontology
from .rdfgraph import RDF_TYPE, Literal
from .relmodel import ConstraintSet, RelationalSchema, Value
from .sparql import (
    FRESH_PREFIX,
    And,
    Bound,
    EmptyPattern,
    EqConst,
    Filter,
    GraphPattern,
    Minus,
    Not,
    Opt,
    SelectP,
    SolutionMapping,
    TriplePattern,
    UnionP,
    conj,
    rename_variables,
    variables,
)

DEFAULT_MAX_DIFFERENCE_ARITY = 12


class TranslationError(ValueError):
    pass


def tr(row: Mapping[str, Value]) -> SolutionMapping:
    """Tuple to solution mapping: NULL attributes are left unbound."""
    return SolutionMapping({"?" + a: Literal(v) for a, v in row.items() if v is not None})


def tr_result(result: ra.ResultSet) -> set[SolutionMapping]:
    return {tr(dict(row)) for row in result.rows}


def var(attribute: str) -> str:
    return "?" + attribute


class Translator:
    """Stateful compiler: owns the fresh-variable counter and case coverage."""

    def __init__(
        self,
        schema: RelationalSchema,
        constraints: ConstraintSet,
        base: str,
        max_difference_arity: int = DEFAULT_MAX_DIFFERENCE_ARITY,
    ):
        self.schema = schema
        self.constraints = constraints
        self.base = base
        self.max_difference_arity = max_difference_arity
        self.ontology = extract_ontology(schema, constraints)
        self.counter = 0
        self.coverage: Counter[str] = Counter()

    def fresh(self) -> str:
        self.counter += 1
        return f"{FRESH_PREFIX}{self.counter}"

    def refresh(self, p: GraphPattern) -> GraphPattern:
        """Copy of ``p`` whose helper variables are all new."""
        old = sorted(v for v in variables(p) if v.startswith(FRESH_PREFIX))
        return rename_variables(p, {v: self.fresh() for v in old})

    def standardize(self, p: GraphPattern, keep: tuple[str, ...]) -> GraphPattern:
        """Rename every variable of ``p`` outside ``keep`` that is not already fresh."""
        visible = {var(a) for a in keep}
        old = sorted(v for v in variables(p) if v not in visible and not v.startswith(FRESH_PREFIX))
        if not old:
            return p
        return rename_variables(p, {v: self.fresh() for v in old})

    # -- cases ---------------------------------------------------------------

    def translate(self, q: ra.RAExpr) -> GraphPattern:
        ra.attributes(q, self.schema)  # well-formedness
        return self._t(ra.desugar(q, self.schema))

    def _t(self, q: ra.RAExpr) -> GraphPattern:
        if isinstance(q, ra.Rel):
            return self._base(q.name)
        if isinstance(q, ra.NullRel):
            self.coverage["nullrel"] += 1
            return EmptyPattern()
        if isinstance(q, ra.Select):
            return self._select(q)
        if isinstance(q, ra.Project):
            self.coverage["project"] += 1
            keep = ra.attributes(q, self.schema)
            inner = self.standardize(self._t(q.child), keep)
            return SelectP((), tuple(var(a) for a in keep), inner)
        if isinstance(q, ra.Rename):
            self.coverage["rename"] += 1
            att = ra.attributes(q.child, self.schema)
            inner = self.standardize(self._t(q.child), att)
            rest = tuple(var(a) for a in att if a != q.old)
            return SelectP(((var(q.old), var(q.new)),), rest, inner)
        if isinstance(q, ra.Join):
            return self._join(q)
        if isinstance(q, ra.Union):
            self.coverage["union"] += 1
            return UnionP(self._t(q.left), self._t(q.right))
        if isinstance(q, ra.Difference):
            return self._difference(q)
        raise TranslationError(f"cannot translate {q!r}")

    def _base(self, name: str) -> GraphPattern:
        att = self.schema.attributes(name)
        binrel = self.ontology.binary(name)
        if binrel is None:
            self.coverage["relation"] += 1
            x = self.fresh()
            pattern: GraphPattern = TriplePattern(x, RDF_TYPE, class_iri(self.base, name))
            for a in att:
                pattern = Opt(pattern, TriplePattern(x, dtp_iri(self.base, name, a), var(a)))
            return SelectP((), tuple(var(a) for a in att), pattern)
        self.coverage["binary-relation"] += 1
        b = binrel
        t1, t2 = self.fresh(), self.fresh()
        pattern = And(
            And(
                TriplePattern(t1, binrel_iri(self.base, b.relation, b.a, b.b, b.c, b.d), t2),
                TriplePattern(t1, dtp_iri(self.base, b.s, b.c), var(b.a)),
            ),
            TriplePattern(t2, dtp_iri(self.base, b.t, b.d), var(b.b)),
        )
        return SelectP((), (var(b.a), var(b.b)), pattern)

    def _select(self, q: ra.Select) -> GraphPattern:
        inner = self._t(q.child)
        c = q.condition
        v = var(c.attribute)
        if isinstance(c, ra.Eq):
            self.coverage["select-eq"] += 1
            return Filter(inner, EqConst(v, Literal(c.value)))
        if isinstance(c, ra.Neq):
            self.coverage["select-neq"] += 1
            return Filter(inner, conj([Not(EqConst(v, Literal(c.value))), Bound(v)]))
        if isinstance(c, ra.IsNull):
            self.coverage["select-isnull"] += 1
            return Filter(inner, Not(Bound(v)))
        self.coverage["select-isnotnull"] += 1
        return Filter(inner, Bound(v))

    def _join(self, q: ra.Join) -> GraphPattern:
        self.coverage["join"] += 1
        left_att = ra.attributes(q.left, self.schema)
        right_att = ra.attributes(q.right, self.schema)
        shared = [a for a in left_att if a in right_att]
        left, right = self._t(q.left), self._t(q.right)
        cond = conj(Bound(var(a)) for a in shared)
        if cond is not None:
            left, right = Filter(left, cond), Filter(right, cond)
        return And(left, right)

    def _difference(self, q: ra.Difference) -> GraphPattern:
        self.coverage["difference"] += 1
        att = ra.attributes(q.left, self.schema)
        ell = len(att)
        if ell > self.max_difference_arity:
            raise TranslationError(
                f"difference over {ell} attributes would need {2 ** ell - 1} MINUS blocks; "
                f"the limit is {self.max_difference_arity} attributes"
            )
        q1, q2 = self._t(q.left), self._t(q.right)

        def condition(members: set[int]):
            return conj(Bound(var(a)) if i in members else Not(Bound(var(a))) for i, a in enumerate(att))

        out: GraphPattern | None = None
        for k in range(1, 2 ** ell):
            r = condition({i for i in range(ell) if k >> i & 1})
            p = Minus(Filter(self.refresh(q1), r), Filter(self.refresh(q2), r))
            out = p if out is None else UnionP(out, p)
        r0 = condition(set())
        x, y, z = self.fresh(), self.fresh(), self.fresh()
        p0 = Filter(
            Opt(
                Filter(self.refresh(q1), r0),
                And(Filter(self.refresh(q2), r0), TriplePattern(x, y, z)),
            ),
            Not(Bound(x)),
        )
        return p0 if out is None else UnionP(out, p0)


def translate(
    q: ra.RAExpr,
    schema: RelationalSchema,
    constraints: ConstraintSet,
    base: str,
    max_difference_arity: int = DEFAULT_MAX_DIFFERENCE_ARITY,
) -> GraphPattern:
    return Translator(schema, constraints, base, max_difference_arity).translate(q)
