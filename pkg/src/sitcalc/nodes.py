"""Syntax trees for sorts, expressions and deterministic complex actions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .values import Value


# --------------------------------------------------------------------- sorts

@dataclass(frozen=True)
class Sort:
    kind: str  # bool | int | string | record | set | tuple | any
    name: Optional[str] = None  # record schema name
    args: tuple["Sort", ...] = ()

    def __str__(self) -> str:
        if self.kind == "record":
            return self.name
        if self.kind == "set":
            return f"set({self.args[0]})"
        if self.kind == "tuple":
            return "tuple(" + ", ".join(str(a) for a in self.args) + ")"
        return self.kind

    @property
    def elem(self) -> "Sort":
        return self.args[0] if self.kind == "set" else ANY


BOOL = Sort("bool")
INT = Sort("int")
STRING = Sort("string")
ANY = Sort("any")


def set_of(elem: Sort) -> Sort:
    return Sort("set", args=(elem,))


def tuple_of(*items: Sort) -> Sort:
    return Sort("tuple", args=tuple(items))


def record_sort(name: str) -> Sort:
    return Sort("record", name=name)


# --------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Field:
    obj: "Expr"
    name: str


@dataclass(frozen=True)
class Index:
    obj: "Expr"
    index: int


@dataclass(frozen=True)
class SetLit:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class SetComp:
    var: str
    domain: "Expr"
    cond: "Expr"


@dataclass(frozen=True)
class TupleLit:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class RecordLit:
    schema: str
    fields: tuple[tuple[str, "Expr"], ...]


@dataclass(frozen=True)
class Unary:
    op: str  # not | neg
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Quant:
    kind: str  # forall | exists
    var: str
    domain: "Expr"
    body: "Expr"


@dataclass(frozen=True)
class IfExpr:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"


Expr = Union[Lit, Name, Call, Field, Index, SetLit, SetComp, TupleLit, RecordLit,
             Unary, Binary, Quant, IfExpr]

BOOL_OPS = ("and", "or", "implies")
ARITH_OPS = ("+", "-", "*", "/", "%")
SET_OPS = ("union", "inter")
COMPARE_OPS = ("=", "!=", "<", "<=", ">", ">=", "in", "notin", "subset")


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Lit, Name)):
        return ()
    if isinstance(e, Call):
        return e.args
    if isinstance(e, (Field, Index)):
        return (e.obj,)
    if isinstance(e, (SetLit, TupleLit)):
        return e.items
    if isinstance(e, SetComp):
        return (e.domain, e.cond)
    if isinstance(e, RecordLit):
        return tuple(x for _, x in e.fields)
    if isinstance(e, Unary):
        return (e.operand,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Quant):
        return (e.domain, e.body)
    if isinstance(e, IfExpr):
        return (e.cond, e.then, e.orelse)
    raise TypeError(f"not an expression: {e!r}")


def referenced_names(e: Expr, bound: frozenset[str] = frozenset()) -> Iterator[tuple[str, bool]]:
    """Yield ``(name, is_call)`` for every free global reference in ``e``."""
    if isinstance(e, Name):
        if e.id not in bound:
            yield e.id, False
    elif isinstance(e, Call):
        yield e.name, True
        for a in e.args:
            yield from referenced_names(a, bound)
    elif isinstance(e, (SetComp, Quant)):
        yield from referenced_names(e.domain, bound)
        inner = e.cond if isinstance(e, SetComp) else e.body
        yield from referenced_names(inner, bound | {e.var})
    else:
        for c in children(e):
            yield from referenced_names(c, bound)


def free_variables(e: Expr, globals_: set[str] | frozenset[str]) -> set[str]:
    return {n for n, is_call in referenced_names(e) if not is_call and n not in globals_}


# ------------------------------------------------------------ complex actions

@dataclass(frozen=True)
class Prim:
    """Primitive action, or a call to a parameterless procedure."""

    name: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Test:
    cond: Expr


@dataclass(frozen=True)
class Seq:
    first: "Program"
    second: "Program"


@dataclass(frozen=True)
class Choice:
    first: "Program"
    second: "Program"


@dataclass(frozen=True)
class ArgChoice:
    var: str
    domain: Expr
    key: Expr
    body: "Program"


@dataclass(frozen=True)
class Iter:
    body: "Program"


Program = Union[Prim, Test, Seq, Choice, ArgChoice, Iter]


def if_then_else(cond: Expr, then: Program, orelse: Optional[Program] = None) -> Program:
    """``if φ then δ1 else δ2 endif`` as ``[φ?; δ1] >> [¬φ?; δ2]``."""
    neg = Test(Unary("not", cond))
    return Choice(Seq(Test(cond), then), neg if orelse is None else Seq(neg, orelse))


def while_do(cond: Expr, body: Program) -> Program:
    """``while φ do δ endwhile`` as ``[φ?; δ]∞``."""
    return Iter(Seq(Test(cond), body))


def program_exprs(p: Program, bound: frozenset[str] = frozenset()) -> Iterator[tuple[str, Expr, frozenset[str]]]:
    """Yield ``(role, expr, bound_vars)`` for every expression inside ``p``."""
    if isinstance(p, Prim):
        for a in p.args:
            yield "arg", a, bound
    elif isinstance(p, Test):
        yield "test", p.cond, bound
    elif isinstance(p, (Seq, Choice)):
        yield from program_exprs(p.first, bound)
        yield from program_exprs(p.second, bound)
    elif isinstance(p, ArgChoice):
        yield "domain", p.domain, bound
        inner = bound | {p.var}
        yield "key", p.key, inner
        yield from program_exprs(p.body, inner)
    elif isinstance(p, Iter):
        yield from program_exprs(p.body, bound)
    else:
        raise TypeError(f"not a program: {p!r}")


def program_prims(p: Program) -> Iterator[Prim]:
    if isinstance(p, Prim):
        yield p
    elif isinstance(p, (Seq, Choice)):
        yield from program_prims(p.first)
        yield from program_prims(p.second)
    elif isinstance(p, (ArgChoice, Iter)):
        yield from program_prims(p.body)


def program_size(p: Program) -> int:
    if isinstance(p, (Prim, Test)):
        return 1
    if isinstance(p, (Seq, Choice)):
        return 1 + program_size(p.first) + program_size(p.second)
    return 1 + program_size(p.body)
