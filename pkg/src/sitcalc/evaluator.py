"""Expression evaluation.

Expressions are compiled once into nested Python closures of the form
``fn(env, state) -> Value``.  ``state`` is a :class:`State`, which knows how
to read stored fluents directly and how to compute the rest from their
definitions or declared derivations.
"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Any, Callable, Iterator, Optional

from .errors import (
    ArgumentOutOfDomain,
    EvalError,
    QuantifierDomainNotSet,
    SortMismatch,
    UnboundVariable,
    UnknownFluent,
)
from .model import DomainSpec, FluentDef
from .nodes import (
    Binary, Call, Expr, Field, IfExpr, Index, Lit, Name, Quant, RecordLit, SetComp, SetLit,
    TupleLit, Unary,
)
from .values import Record, Table, Value, value_key, values_equal

Compiled = Callable[[dict, "State"], Value]

BUILTINS = {"size"}


def _bool(v: Value, what: str) -> bool:
    if v is True or v is False:
        return v
    raise SortMismatch(f"{what} expects a bool, got {v!r}")


def _int(v: Value, what: str) -> int:
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    raise SortMismatch(f"{what} expects an int, got {v!r}")


def _set(v: Value, what: str) -> frozenset:
    if isinstance(v, frozenset):
        return v
    raise SortMismatch(f"{what} expects a set, got {v!r}")


def _ordered(a: Value, b: Value, op: str) -> None:
    ok = (isinstance(a, int) and not isinstance(a, bool) and isinstance(b, int)
          and not isinstance(b, bool)) or (isinstance(a, str) and isinstance(b, str))
    if not ok:
        raise SortMismatch(f"'{op}' needs two ints or two strings, got {a!r} and {b!r}")


def _arith(op: str) -> Callable[[Value, Value], Value]:
    def add(a, b):
        return _int(a, "+") + _int(b, "+")

    def sub(a, b):
        if isinstance(a, frozenset):
            return a - _set(b, "-")
        return _int(a, "-") - _int(b, "-")

    def mul(a, b):
        return _int(a, "*") * _int(b, "*")

    def div(a, b):
        d = _int(b, "/")
        if d == 0:
            raise EvalError("division by zero")
        return _int(a, "/") // d

    def mod(a, b):
        d = _int(b, "%")
        if d == 0:
            raise EvalError("division by zero")
        return _int(a, "%") % d

    def union(a, b):
        return _set(a, "union") | _set(b, "union")

    def inter(a, b):
        return _set(a, "inter") & _set(b, "inter")

    def eq(a, b):
        return values_equal(a, b)

    def ne(a, b):
        return not values_equal(a, b)

    def lt(a, b):
        _ordered(a, b, "<")
        return a < b

    def le(a, b):
        _ordered(a, b, "<=")
        return a <= b

    def gt(a, b):
        _ordered(a, b, ">")
        return a > b

    def ge(a, b):
        _ordered(a, b, ">=")
        return a >= b

    def member(a, b):
        return a in _set(b, "in")

    def notmember(a, b):
        return a not in _set(b, "notin")

    def subset(a, b):
        return _set(a, "subset") <= _set(b, "subset")

    return {
        "+": add, "-": sub, "*": mul, "/": div, "%": mod, "union": union, "inter": inter,
        "=": eq, "!=": ne, "<": lt, "<=": le, ">": gt, ">=": ge,
        "in": member, "notin": notmember, "subset": subset,
    }[op]


class Evaluator:
    """Compiles and evaluates expressions against one domain."""

    def __init__(self, spec: DomainSpec):
        self.spec = spec
        self._cache: dict[tuple[int, frozenset], tuple[Expr, Compiled]] = {}
        self._consts: dict[str, Value] = {}
        self._const_busy: set[str] = set()
        self._models: dict[tuple[str, ...], StateModel] = {}
        self._domains: dict[tuple[str, str], tuple[Value, ...]] = {}

    # -- constants and parameter domains

    def const_value(self, name: str) -> Value:
        if name in self._consts:
            return self._consts[name]
        decl = self.spec.const(name)
        if decl is None:
            raise UnboundVariable(name)
        if name in self._const_busy:
            raise EvalError(f"constant {name} depends on itself")
        self._const_busy.add(name)
        try:
            value = self.compile(decl.expr)({}, EMPTY_STATE_FOR(self))
        finally:
            self._const_busy.discard(name)
        self._consts[name] = value
        return value

    def param_domain(self, owner: str, param) -> tuple[Value, ...]:
        """Values of a ``x in <set-expr>`` parameter, canonically ordered."""
        key = (owner, param.name)
        if key not in self._domains:
            if param.domain is None:
                raise EvalError(f"parameter {param.name} of {owner} has no finite domain")
            dom = self.compile(param.domain)({}, EMPTY_STATE_FOR(self))
            if not isinstance(dom, frozenset):
                raise QuantifierDomainNotSet(f"domain of {owner}.{param.name} is not a set")
            self._domains[key] = tuple(sorted(dom, key=value_key))
        return self._domains[key]

    def state_model(self, tracked: tuple[str, ...]) -> "StateModel":
        model = self._models.get(tracked)
        if model is None:
            model = self._models[tracked] = StateModel(self, tracked)
        return model

    # -- compilation

    def compile(self, expr: Expr, scope: frozenset[str] = frozenset()) -> Compiled:
        key = (id(expr), scope)
        hit = self._cache.get(key)
        if hit is not None and hit[0] is expr:
            return hit[1]
        fn = self._compile(expr, scope)
        self._cache[key] = (expr, fn)
        return fn

    def evaluate(self, expr: Expr, env: Mapping[str, Value], state: "State") -> Value:
        return self.compile(expr, frozenset(env))(dict(env), state)

    def _compile(self, e: Expr, scope: frozenset[str]) -> Compiled:
        spec = self.spec
        if isinstance(e, Lit):
            v = e.value
            return lambda env, st: v

        if isinstance(e, Name):
            name = e.id
            if name in scope:
                return lambda env, st: env[name]
            if spec.const(name) is not None:
                return lambda env, st: self.const_value(name)
            if spec.fluent(name) is not None:
                return lambda env, st: st.read(name, ())
            if spec.macro(name) is not None or spec.test(name) is not None:
                return self._compile(Call(name, ()), scope)

            def unbound(env, st):
                raise UnboundVariable(f"unbound name '{name}'")
            return unbound

        if isinstance(e, Call):
            return self._compile_call(e, scope)

        if isinstance(e, Field):
            obj = self.compile(e.obj, scope)
            fname = e.name

            def field(env, st):
                r = obj(env, st)
                if not isinstance(r, Record):
                    raise SortMismatch(f"field access .{fname} on non-record {r!r}")
                try:
                    return r[fname]
                except KeyError:
                    raise SortMismatch(f"record {r.schema} has no field {fname}") from None
            return field

        if isinstance(e, Index):
            obj = self.compile(e.obj, scope)
            i = e.index

            def index(env, st):
                t = obj(env, st)
                if not isinstance(t, tuple):
                    raise SortMismatch(f"indexing non-tuple {t!r}")
                if not 0 <= i < len(t):
                    raise SortMismatch(f"tuple index {i} out of range")
                return t[i]
            return index

        if isinstance(e, SetLit):
            items = [self.compile(x, scope) for x in e.items]
            return lambda env, st: frozenset(f(env, st) for f in items)

        if isinstance(e, TupleLit):
            items = [self.compile(x, scope) for x in e.items]
            return lambda env, st: tuple(f(env, st) for f in items)

        if isinstance(e, SetComp):
            dom = self.compile(e.domain, scope)
            cond = self.compile(e.cond, scope | {e.var})
            var = e.var

            def comp(env, st):
                d = dom(env, st)
                if not isinstance(d, frozenset):
                    raise QuantifierDomainNotSet(f"comprehension over non-set {d!r}")
                inner = dict(env)
                out = []
                for x in d:
                    inner[var] = x
                    if _bool(cond(inner, st), "comprehension filter"):
                        out.append(x)
                return frozenset(out)
            return comp

        if isinstance(e, RecordLit):
            return self._compile_record(e, scope)

        if isinstance(e, Unary):
            operand = self.compile(e.operand, scope)
            if e.op == "not":
                return lambda env, st: not _bool(operand(env, st), "not")
            if e.op == "neg":
                return lambda env, st: -_int(operand(env, st), "unary -")
            raise EvalError(f"unknown unary operator {e.op}")

        if isinstance(e, Binary):
            left = self.compile(e.left, scope)
            right = self.compile(e.right, scope)
            op = e.op
            if op == "and":
                return lambda env, st: _bool(left(env, st), "and") and _bool(right(env, st), "and")
            if op == "or":
                return lambda env, st: _bool(left(env, st), "or") or _bool(right(env, st), "or")
            if op == "implies":
                return lambda env, st: (not _bool(left(env, st), "implies")) or _bool(right(env, st), "implies")
            fn = _arith(op)
            return lambda env, st: fn(left(env, st), right(env, st))

        if isinstance(e, Quant):
            dom = self.compile(e.domain, scope)
            body = self.compile(e.body, scope | {e.var})
            var = e.var
            universal = e.kind == "forall"

            def quant(env, st):
                d = dom(env, st)
                if not isinstance(d, frozenset):
                    raise QuantifierDomainNotSet(f"quantifier over non-set {d!r}")
                inner = dict(env)
                for x in d:
                    inner[var] = x
                    if _bool(body(inner, st), e.kind) is not universal:
                        return not universal
                return universal
            return quant

        if isinstance(e, IfExpr):
            cond = self.compile(e.cond, scope)
            then = self.compile(e.then, scope)
            orelse = self.compile(e.orelse, scope)
            return lambda env, st: then(env, st) if _bool(cond(env, st), "if") else orelse(env, st)

        raise EvalError(f"cannot evaluate {e!r}")

    def _compile_call(self, e: Call, scope: frozenset[str]) -> Compiled:
        spec = self.spec
        name = e.name
        args = [self.compile(a, scope) for a in e.args]

        if spec.fluent(name) is not None:
            if len(args) == 0:
                return lambda env, st: st.read(name, ())
            return lambda env, st: st.read(name, tuple(a(env, st) for a in args))

        callee = spec.macro(name) or spec.test(name)
        if callee is not None:
            params = [p.name for p in callee.params]
            if len(params) != len(args):
                def arity(env, st):
                    raise SortMismatch(f"{name} expects {len(params)} arguments, got {len(args)}")
                return arity
            body_scope = frozenset(params)
            body_ref: list[Compiled] = []

            def call(env, st):
                # compiled on first use so that a recursive macro cannot hang compilation
                if not body_ref:
                    body_ref.append(self.compile(callee.body, body_scope))
                return body_ref[0]({p: a(env, st) for p, a in zip(params, args)}, st)
            return call

        if name == "size" and len(args) == 1:
            arg = args[0]
            return lambda env, st: len(_set(arg(env, st), "size"))

        def unknown(env, st):
            raise UnknownFluent(f"unknown fluent or function '{name}'")
        return unknown

    def _compile_record(self, e: RecordLit, scope: frozenset[str]) -> Compiled:
        schema = self.spec.schema(e.schema)
        given = {n: self.compile(x, scope) for n, x in e.fields}
        name = e.schema

        def bad(msg):
            def fail(env, st):
                raise SortMismatch(msg)
            return fail

        if schema is None:
            return bad(f"unknown record schema {name}")
        declared = [f for f, _ in schema.fields]
        if set(declared) != set(given) or len(given) != len(e.fields):
            return bad(f"record {name} literal fields {sorted(given)} do not match schema {declared}")
        ordered = [(f, given[f]) for f in declared]
        return lambda env, st: Record(name, [(f, fn(env, st)) for f, fn in ordered])


class StateModel:
    """How a state with a given set of stored fluents answers fluent queries.

    ``plan`` maps every non-tracked fluent that can be computed to the
    definition or derivation used for it.  Plans only depend on fluents that
    were already computable, so evaluation cannot loop.
    """

    def __init__(self, evaluator: Evaluator, tracked: tuple[str, ...]):
        spec = evaluator.spec
        self.evaluator = evaluator
        self.tracked = tracked
        self.index = {name: i for i, name in enumerate(tracked)}
        self.plan: dict[str, tuple[tuple[str, ...], Compiled]] = {}
        known = set(tracked)
        changed = True
        while changed:
            changed = False
            for f in spec.fluents:
                if f.name in known:
                    continue
                for params, expr in _definitions(spec, f):
                    if spec.fluents_in(expr, frozenset(params)) <= known:
                        self.plan[f.name] = (params, evaluator.compile(expr, frozenset(params)))
                        known.add(f.name)
                        changed = True
                        break
        self.readable = frozenset(known)

    def make(self, values: tuple[Value, ...]) -> "State":
        return State(self, values)


def _definitions(spec: DomainSpec, f: FluentDef) -> Iterator[tuple[tuple[str, ...], Expr]]:
    if f.definition is not None:
        yield tuple(p.name for p in f.params), f.definition
    for d in spec.derivations_of(f.name):
        yield d.params, d.expr


class State(Mapping):
    """Immutable valuation of the tracked fluents, with a cache for derived ones."""

    __slots__ = ("model", "values", "_cache", "_hash")

    def __init__(self, model: StateModel, values: tuple[Value, ...]):
        self.model = model
        self.values = tuple(values)
        self._cache: dict[tuple[str, tuple], Value] = {}
        self._hash = hash(self.values)

    def read(self, name: str, args: tuple) -> Value:
        i = self.model.index.get(name)
        if i is not None:
            v = self.values[i]
            if isinstance(v, Table):
                try:
                    return v.lookup(args)
                except KeyError:
                    raise ArgumentOutOfDomain(f"{name}{args!r} is outside the fluent's domain") from None
            if args:
                raise SortMismatch(f"fluent {name} takes no arguments")
            return v
        key = (name, args)
        if key in self._cache:
            return self._cache[key]
        planned = self.model.plan.get(name)
        if planned is None:
            if self.model.evaluator.spec.fluent(name) is None:
                raise UnknownFluent(f"unknown fluent '{name}'")
            raise UnknownFluent(f"fluent '{name}' is neither tracked nor derivable from the tracked fluents")
        params, fn = planned
        if len(params) != len(args):
            raise SortMismatch(f"fluent {name} expects {len(params)} arguments, got {len(args)}")
        value = fn(dict(zip(params, args)), self)
        self._cache[key] = value
        return value

    # Mapping interface over the tracked fluents
    def __getitem__(self, name: str) -> Value:
        return self.values[self.model.index[name]]

    def __iter__(self):
        return iter(self.model.tracked)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, State):
            return self.model.tracked == other.model.tracked and self.values == other.values
        return Mapping.__eq__(self, other)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "State(" + ", ".join(f"{n}={v!r}" for n, v in zip(self.model.tracked, self.values)) + ")"


def EMPTY_STATE_FOR(evaluator: Evaluator) -> State:
    return evaluator.state_model(()).make(())


def get_evaluator(spec: DomainSpec) -> Evaluator:
    ev = spec.__dict__.get("_evaluator")
    if ev is None:
        ev = Evaluator(spec)
        object.__setattr__(spec, "_evaluator", ev)
    return ev


def make_state(spec: DomainSpec, values: Mapping[str, Value]) -> State:
    """Build a :class:`State` from a plain ``{fluent: value}`` mapping."""
    if isinstance(values, State):
        return values
    names = tuple(values)
    return get_evaluator(spec).state_model(names).make(tuple(values[n] for n in names))


def eval_expr(expr: Expr, env: Mapping[str, Value], state: Any, spec: DomainSpec) -> Value:
    """Evaluate ``expr`` with variables from ``env`` against ``state``.

    ``state`` is a :class:`State` or a plain mapping from stored fluent names
    to values; derived fluents are computed on demand.
    """
    st = make_state(spec, state or {})
    return get_evaluator(spec).evaluate(expr, env, st)
