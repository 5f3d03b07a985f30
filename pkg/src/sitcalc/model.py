"""Domain axiomatisation object model.

A :class:`DomainSpec` is what the parser produces and every other module
consumes.  All declarations are frozen dataclasses; equality is structural
and ignores source spans, which is what the parser round-trip relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import SourceSpan
from .nodes import Expr, Program, Sort, program_exprs, program_prims, referenced_names


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Param:
    """A declared parameter: ``x: sort``, ``x in <set-expr>``, or bare ``x``."""

    name: str
    sort: Optional[Sort] = None
    domain: Optional[Expr] = None


@dataclass(frozen=True)
class SchemaDef:
    name: str
    fields: tuple[tuple[str, Sort], ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ConstDef:
    name: str
    sort: Optional[Sort]
    expr: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class MacroDef:
    """Pure, situation-independent helper function."""

    name: str
    params: tuple[Param, ...]
    sort: Optional[Sort]
    body: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SuccessorRule:
    """``F(do(a(params), s)) = expr``; ``expr is None`` means ``unchanged``."""

    action: str
    params: tuple[str, ...]
    expr: Optional[Expr]

    @property
    def unchanged(self) -> bool:
        return self.expr is None


@dataclass(frozen=True)
class FluentDef:
    """A fluent.  Stored fluents carry ``init`` and ``rules``; derived ones a ``definition``."""

    name: str
    params: tuple[Param, ...]
    sort: Optional[Sort]
    definition: Optional[Expr] = None
    init: Optional[Expr] = None
    rules: tuple[SuccessorRule, ...] = ()
    span: Optional[SourceSpan] = _span()

    @property
    def derived(self) -> bool:
        return self.definition is not None

    @property
    def kind(self) -> str:
        return "derived" if self.derived else "stored"

    def rule_for(self, action: str) -> Optional[SuccessorRule]:
        for r in self.rules:
            if r.action == action:
                return r
        return None


@dataclass(frozen=True)
class Derivation:
    """An extra way to compute ``fluent`` from other fluents (one more seed set)."""

    fluent: str
    params: tuple[str, ...]
    expr: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ActionDef:
    name: str
    params: tuple[Param, ...]
    pre: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TestDef:
    name: str
    params: tuple[Param, ...]
    body: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ProcDef:
    name: str
    body: Program
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PolicyBinding:
    """Execution choices for one request kind: raw, supplement, altern, reject."""

    kind: str
    params: tuple[Param, ...]
    raw: Program
    supplement: Optional[Program] = None
    altern: Optional[Program] = None
    reject_label: Optional[str] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Request:
    """One entry of a scenario: a request kind plus ground argument values."""

    kind: str
    args: tuple = ()
    label: Optional[str] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class DomainSpec:
    schemas: tuple[SchemaDef, ...] = ()
    consts: tuple[ConstDef, ...] = ()
    macros: tuple[MacroDef, ...] = ()
    fluents: tuple[FluentDef, ...] = ()
    derivations: tuple[Derivation, ...] = ()
    actions: tuple[ActionDef, ...] = ()
    tests: tuple[TestDef, ...] = ()
    procs: tuple[ProcDef, ...] = ()
    validity: Optional[str] = None
    policies: tuple[PolicyBinding, ...] = ()
    source: Optional[str] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for attr, items in (
            ("schema", self.schemas), ("const", self.consts), ("macro", self.macros),
            ("fluent", self.fluents), ("action", self.actions), ("test", self.tests),
            ("proc", self.procs), ("policy", self.policies),
        ):
            key = "kind" if attr == "policy" else "name"
            object.__setattr__(self, f"_{attr}_map", {getattr(d, key): d for d in items})

    # Lookups return None for unknown names; validation reports them.
    def schema(self, name: str) -> Optional[SchemaDef]:
        return self._schema_map.get(name)

    def const(self, name: str) -> Optional[ConstDef]:
        return self._const_map.get(name)

    def macro(self, name: str) -> Optional[MacroDef]:
        return self._macro_map.get(name)

    def fluent(self, name: str) -> Optional[FluentDef]:
        return self._fluent_map.get(name)

    def action(self, name: str) -> Optional[ActionDef]:
        return self._action_map.get(name)

    def test(self, name: str) -> Optional[TestDef]:
        return self._test_map.get(name)

    def proc(self, name: str) -> Optional[ProcDef]:
        return self._proc_map.get(name)

    def policy(self, kind: str) -> Optional[PolicyBinding]:
        return self._policy_map.get(kind)

    def derivations_of(self, fluent: str) -> tuple[Derivation, ...]:
        return tuple(d for d in self.derivations if d.fluent == fluent)

    @property
    def stored_fluents(self) -> tuple[FluentDef, ...]:
        return tuple(f for f in self.fluents if not f.derived)

    @property
    def global_names(self) -> set[str]:
        names: set[str] = set()
        for items in (self.consts, self.macros, self.fluents, self.actions, self.tests, self.procs):
            names.update(d.name for d in items)
        return names

    def fluents_in(self, expr: Expr, bound: frozenset[str] = frozenset(),
                   _seen: frozenset[str] = frozenset()) -> frozenset[str]:
        """Fluents an expression reads, looking through macro and test calls."""
        out: set[str] = set()
        for name, _ in referenced_names(expr, bound):
            if name in self._fluent_map:
                out.add(name)
            elif name not in _seen:
                callee = self._macro_map.get(name) or self._test_map.get(name)
                if callee is not None:
                    out |= self.fluents_in(
                        callee.body, frozenset(p.name for p in callee.params), _seen | {name}
                    )
        return frozenset(out)

    def fluents_in_program(self, program: Program, _seen: frozenset[str] = frozenset()) -> frozenset[str]:
        out: set[str] = set()
        for _, expr, bound in program_exprs(program):
            out |= self.fluents_in(expr, bound)
        for prim in program_prims(program):
            proc = self._proc_map.get(prim.name)
            if proc is not None and prim.name not in _seen:
                out |= self.fluents_in_program(proc.body, _seen | {prim.name})
        return frozenset(out)
