"""Static checks on a parsed domain: name resolution, sorts, completeness."""

from __future__ import annotations

from typing import Iterable, Optional

from .analysis import build_graph, compute_pfb
from .errors import Diagnostic, SourceSpan
from .evaluator import get_evaluator
from .model import DomainSpec, FluentDef, Param
from .nodes import (
    ANY, BOOL, INT, STRING, ArgChoice, Binary, Call, Choice, Expr, Field, IfExpr, Index, Iter,
    Lit, Name, Prim, Program, Quant, RecordLit, Seq, SetComp, SetLit, Sort, Test, TupleLit, Unary,
    program_prims, referenced_names, set_of, tuple_of,
)


def compatible(a: Sort, b: Sort) -> bool:
    if a.kind == "any" or b.kind == "any":
        return True
    if a.kind != b.kind:
        return False
    if a.kind == "record":
        return a.name == b.name
    if a.kind in ("set", "tuple"):
        return len(a.args) == len(b.args) and all(compatible(x, y) for x, y in zip(a.args, b.args))
    return True


def join(a: Sort, b: Sort) -> Sort:
    """The more informative of two compatible sorts."""
    if a.kind == "any":
        return b
    if b.kind == "any" or a.kind not in ("set", "tuple"):
        return a
    return Sort(a.kind, a.name, tuple(join(x, y) for x, y in zip(a.args, b.args)))


class _Checker:
    def __init__(self, spec: DomainSpec):
        self.spec = spec
        self.diags: list[Diagnostic] = []
        self.span: Optional[SourceSpan] = None
        self._const_sorts: dict[str, Sort] = {}
        self._const_busy: set[str] = set()

    def report(self, code: str, message: str, severity: str = "error") -> None:
        self.diags.append(Diagnostic(code, message, severity, span=self.span))

    # -- sorts of declarations

    def check_sort(self, sort: Optional[Sort], where: str) -> None:
        if sort is None:
            return
        if sort.kind == "record" and self.spec.schema(sort.name) is None:
            self.report("UnknownSchema", f"{where}: unknown record schema '{sort.name}'")
        for a in sort.args:
            self.check_sort(a, where)

    def param_sort(self, p: Param, env: dict[str, Sort]) -> Sort:
        if p.sort is not None:
            return p.sort
        if p.domain is not None:
            dom = self.infer(p.domain, {})
            if dom.kind not in ("set", "any"):
                self.report("SortMismatch", f"domain of parameter {p.name} is {dom}, not a set")
                return ANY
            return dom.elem
        return ANY

    def param_env(self, params: Iterable[Param], where: str) -> dict[str, Sort]:
        env: dict[str, Sort] = {}
        for p in params:
            self.check_sort(p.sort, where)
            if p.name in env:
                self.report("DuplicateParameter", f"{where}: parameter '{p.name}' declared twice")
            env[p.name] = self.param_sort(p, env)
        return env

    def const_sort(self, name: str) -> Sort:
        if name in self._const_sorts:
            return self._const_sorts[name]
        decl = self.spec.const(name)
        if decl.sort is not None:
            return decl.sort
        if name in self._const_busy:
            return ANY
        self._const_busy.add(name)
        sort = self.infer(decl.expr, {})
        self._const_busy.discard(name)
        self._const_sorts[name] = sort
        return sort

    @staticmethod
    def fluent_sort(f: FluentDef) -> Sort:
        return f.sort if f.sort is not None else ANY

    # -- expressions

    def expect(self, e: Expr, want: Sort, env: dict[str, Sort], what: str) -> Sort:
        got = self.infer(e, env)
        if not compatible(got, want):
            self.report("SortMismatch", f"{what} should be {want}, found {got}")
        return got

    def infer(self, e: Expr, env: dict[str, Sort]) -> Sort:
        spec = self.spec
        if isinstance(e, Lit):
            v = e.value
            if isinstance(v, bool):
                return BOOL
            if isinstance(v, int):
                return INT
            return STRING
        if isinstance(e, Name):
            if e.id in env:
                return env[e.id]
            if spec.const(e.id) is not None:
                return self.const_sort(e.id)
            if spec.fluent(e.id) is not None or spec.macro(e.id) is not None or spec.test(e.id) is not None:
                return self.infer(Call(e.id, ()), env)
            self.report("UnboundName", f"unbound name '{e.id}'")
            return ANY
        if isinstance(e, Call):
            return self.infer_call(e, env)
        if isinstance(e, Field):
            obj = self.infer(e.obj, env)
            if obj.kind == "any":
                return ANY
            if obj.kind != "record":
                self.report("SortMismatch", f"field access .{e.name} on {obj}")
                return ANY
            schema = spec.schema(obj.name)
            if schema is None:
                return ANY
            for fname, fsort in schema.fields:
                if fname == e.name:
                    return fsort
            self.report("UnknownField", f"schema {obj.name} has no field '{e.name}'")
            return ANY
        if isinstance(e, Index):
            obj = self.infer(e.obj, env)
            if obj.kind == "tuple":
                if 0 <= e.index < len(obj.args):
                    return obj.args[e.index]
                self.report("SortMismatch", f"tuple index {e.index} out of range for {obj}")
                return ANY
            if obj.kind != "any":
                self.report("SortMismatch", f"indexing {obj}")
            return ANY
        if isinstance(e, SetLit):
            elem = ANY
            for x in e.items:
                s = self.infer(x, env)
                if not compatible(elem, s):
                    self.report("SortMismatch", f"set literal mixes {elem} and {s}")
                else:
                    elem = join(elem, s)
            return set_of(elem)
        if isinstance(e, SetComp):
            dom = self.set_sort(e.domain, env, "comprehension domain")
            self.expect(e.cond, BOOL, {**env, e.var: dom.elem}, "comprehension filter")
            return dom
        if isinstance(e, TupleLit):
            return tuple_of(*(self.infer(x, env) for x in e.items))
        if isinstance(e, RecordLit):
            schema = spec.schema(e.schema)
            if schema is None:
                self.report("UnknownSchema", f"unknown record schema '{e.schema}'")
                for _, x in e.fields:
                    self.infer(x, env)
                return ANY
            declared = dict(schema.fields)
            given = [n for n, _ in e.fields]
            if sorted(given) != sorted(declared) or len(set(given)) != len(given):
                self.report("RecordFields", f"{e.schema} literal has fields {given}, schema declares {list(declared)}")
            for n, x in e.fields:
                self.expect(x, declared.get(n, ANY), env, f"field {e.schema}.{n}")
            return Sort("record", e.schema)
        if isinstance(e, Unary):
            if e.op == "not":
                self.expect(e.operand, BOOL, env, "operand of not")
                return BOOL
            self.expect(e.operand, INT, env, "operand of unary -")
            return INT
        if isinstance(e, Binary):
            return self.infer_binary(e, env)
        if isinstance(e, Quant):
            dom = self.set_sort(e.domain, env, f"{e.kind} domain")
            self.expect(e.body, BOOL, {**env, e.var: dom.elem}, f"{e.kind} body")
            return BOOL
        if isinstance(e, IfExpr):
            self.expect(e.cond, BOOL, env, "if condition")
            a, b = self.infer(e.then, env), self.infer(e.orelse, env)
            if not compatible(a, b):
                self.report("SortMismatch", f"if branches have sorts {a} and {b}")
                return ANY
            return join(a, b)
        raise TypeError(f"not an expression: {e!r}")

    def set_sort(self, e: Expr, env: dict[str, Sort], what: str) -> Sort:
        s = self.infer(e, env)
        if s.kind == "any":
            return set_of(ANY)
        if s.kind != "set":
            self.report("QuantifierDomainNotSet", f"{what} is {s}, not a set")
            return set_of(ANY)
        return s

    def infer_call(self, e: Call, env: dict[str, Sort]) -> Sort:
        spec = self.spec
        fluent = spec.fluent(e.name)
        callee = fluent or spec.macro(e.name) or spec.test(e.name)
        if callee is not None:
            params = callee.params
            if len(params) != len(e.args):
                self.report("CallArity", f"{e.name} takes {len(params)} argument(s), got {len(e.args)}")
            for p, a in zip(params, e.args):
                self.expect(a, self.param_sort(p, {}), env, f"argument {p.name} of {e.name}")
            for a in e.args[len(params):]:
                self.infer(a, env)
            if fluent is not None:
                return self.fluent_sort(fluent)
            if spec.test(e.name) is not None and spec.macro(e.name) is None:
                return BOOL
            return callee.sort if callee.sort is not None else ANY
        if e.name == "size":
            if len(e.args) != 1:
                self.report("CallArity", f"size takes 1 argument, got {len(e.args)}")
            for a in e.args:
                self.set_sort(a, env, "argument of size")
            return INT
        self.report("UnknownFunction", f"call to undeclared '{e.name}'")
        for a in e.args:
            self.infer(a, env)
        return ANY

    def infer_binary(self, e: Binary, env: dict[str, Sort]) -> Sort:
        op = e.op
        if op in ("and", "or", "implies"):
            self.expect(e.left, BOOL, env, f"left operand of {op}")
            self.expect(e.right, BOOL, env, f"right operand of {op}")
            return BOOL
        left, right = self.infer(e.left, env), self.infer(e.right, env)
        if op in ("+", "*", "/", "%"):
            for side, s in (("left", left), ("right", right)):
                if not compatible(s, INT):
                    self.report("SortMismatch", f"{side} operand of {op} should be int, found {s}")
            return INT
        if op == "-":
            if left.kind == "set" or right.kind == "set":
                if not compatible(left, right):
                    self.report("SortMismatch", f"set difference of {left} and {right}")
                return join(left, right)
            for side, s in (("left", left), ("right", right)):
                if not compatible(s, INT):
                    self.report("SortMismatch", f"{side} operand of - should be int or set, found {s}")
            return INT
        if op in ("union", "inter"):
            for side, s in (("left", left), ("right", right)):
                if s.kind not in ("set", "any"):
                    self.report("SortMismatch", f"{side} operand of {op} should be a set, found {s}")
            if left.kind == "set" and right.kind == "set" and not compatible(left, right):
                self.report("SortMismatch", f"{op} of {left} and {right}")
            return join(left if left.kind == "set" else set_of(ANY), right if right.kind == "set" else set_of(ANY))
        if op in ("=", "!="):
            if not compatible(left, right):
                self.report("SortMismatch", f"comparing {left} with {right}")
            return BOOL
        if op in ("<", "<=", ">", ">="):
            ok = (compatible(left, INT) and compatible(right, INT)) or (
                compatible(left, STRING) and compatible(right, STRING))
            if not ok or (left.kind not in ("int", "string", "any")):
                self.report("SortMismatch", f"'{op}' needs ints or strings, found {left} and {right}")
            return BOOL
        if op in ("in", "notin"):
            if right.kind not in ("set", "any"):
                self.report("SortMismatch", f"right operand of {op} should be a set, found {right}")
            elif not compatible(left, right.elem):
                self.report("SortMismatch", f"membership of {left} in {right}")
            return BOOL
        if op == "subset":
            for side, s in (("left", left), ("right", right)):
                if s.kind not in ("set", "any"):
                    self.report("SortMismatch", f"{side} operand of subset should be a set, found {s}")
            return BOOL
        raise ValueError(f"unknown operator {op}")

    # -- programs

    def program(self, p: Program, env: dict[str, Sort], where: str) -> None:
        spec = self.spec
        if isinstance(p, Prim):
            action = spec.action(p.name)
            if action is not None:
                if len(action.params) != len(p.args):
                    self.report("CallArity", f"{where}: action {p.name} takes {len(action.params)} "
                                f"argument(s), got {len(p.args)}")
                for prm, a in zip(action.params, p.args):
                    self.expect(a, self.param_sort(prm, {}), env, f"{where}: argument {prm.name} of {p.name}")
            elif spec.proc(p.name) is not None:
                if p.args:
                    self.report("CallArity", f"{where}: procedure {p.name} takes no arguments")
            else:
                self.report("UnknownAction", f"{where}: '{p.name}' is neither an action nor a procedure")
        elif isinstance(p, Test):
            self.expect(p.cond, BOOL, env, f"{where}: test")
        elif isinstance(p, (Seq, Choice)):
            self.program(p.first, env, where)
            self.program(p.second, env, where)
        elif isinstance(p, ArgChoice):
            dom = self.set_sort(p.domain, env, f"{where}: pick domain")
            inner = {**env, p.var: dom.elem}
            self.infer(p.key, inner)
            self.program(p.body, inner, where)
        elif isinstance(p, Iter):
            self.program(p.body, env, where)


def _cycles(graph: dict[str, set[str]]) -> list[list[str]]:
    """Strongly connected components that contain a cycle (Tarjan)."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    out: list[list[str]] = []
    counter = [0]

    def visit(v: str) -> None:
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in sorted(graph.get(v, ())):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            if len(comp) > 1 or v in graph.get(v, ()):
                out.append(sorted(comp))

    for v in sorted(graph):
        if v not in index:
            visit(v)
    return out


def validate_domain(spec: DomainSpec) -> list[Diagnostic]:
    """Return every problem found in ``spec``; an empty list means it is loadable.

    Errors block loading; ``warning`` and ``info`` diagnostics do not.
    """
    c = _Checker(spec)

    # schemas have their own namespace; everything else shares one
    seen: dict[str, str] = {}
    for kind, items in (("constant", spec.consts), ("macro", spec.macros), ("fluent", spec.fluents),
                        ("action", spec.actions), ("test", spec.tests), ("procedure", spec.procs)):
        for d in items:
            c.span = d.span
            if d.name in seen:
                c.report("DuplicateName", f"{kind} '{d.name}' clashes with a {seen[d.name]} of the same name")
            else:
                seen[d.name] = kind
            if d.name == "size":
                c.report("ReservedName", "'size' is a built-in function")
    schema_names: set[str] = set()
    for s in spec.schemas:
        c.span = s.span
        if s.name in schema_names:
            c.report("DuplicateName", f"schema '{s.name}' declared twice")
        schema_names.add(s.name)
    kinds: set[str] = set()
    for b in spec.policies:
        c.span = b.span
        if b.kind in kinds:
            c.report("DuplicateName", f"policy '{b.kind}' declared twice")
        kinds.add(b.kind)

    for s in spec.schemas:
        c.span = s.span
        names = [n for n, _ in s.fields]
        if len(set(names)) != len(names):
            c.report("DuplicateField", f"schema {s.name} repeats a field name")
        for _, sort in s.fields:
            c.check_sort(sort, f"schema {s.name}")

    for k in spec.consts:
        c.span = k.span
        c.check_sort(k.sort, f"const {k.name}")
        if k.sort is not None:
            c.expect(k.expr, k.sort, {}, f"const {k.name}")
        else:
            c.const_sort(k.name)
        if spec.fluents_in(k.expr):
            c.report("SituationDependentConst", f"const {k.name} reads fluents")

    for m in spec.macros:
        c.span = m.span
        c.check_sort(m.sort, f"macro {m.name}")
        env = c.param_env(m.params, f"macro {m.name}")
        c.expect(m.body, m.sort or ANY, env, f"body of macro {m.name}")
        if spec.fluents_in(m.body, frozenset(env)):
            c.report("SituationDependentMacro", f"macro {m.name} reads fluents; use a derived fluent or test")

    # recursion among macros and tests (their calls are inlined at evaluation)
    calls: dict[str, set[str]] = {}
    for d in list(spec.macros) + list(spec.tests):
        calls[d.name] = {n for n, _ in referenced_names(d.body, frozenset(p.name for p in d.params))
                         if spec.macro(n) is not None or spec.test(n) is not None}
    for comp in _cycles(calls):
        c.span = None
        c.report("RecursiveMacro", f"recursive definitions: {', '.join(comp)}")

    action_names = {a.name for a in spec.actions}
    for f in spec.fluents:
        c.span = f.span
        where = f"fluent {f.name}"
        c.check_sort(f.sort, where)
        env = c.param_env(f.params, where)
        if f.derived:
            if f.rules:
                c.report("DerivedFluentHasEffect", f"derived fluent {f.name} has successor rules")
            if f.init is not None:
                c.report("DerivedFluentHasInit", f"derived fluent {f.name} has an initial value")
            c.expect(f.definition, c.fluent_sort(f), env, f"definition of {f.name}")
            continue
        for p in f.params:
            if p.domain is None:
                c.report("MissingDomain", f"parameter {p.name} of stored fluent {f.name} needs an 'in' domain")
        if f.init is None:
            c.report("MissingInit", f"stored fluent {f.name} has no initial value")
        else:
            c.expect(f.init, c.fluent_sort(f), env, f"initial value of {f.name}")
            if spec.fluents_in(f.init, frozenset(env)):
                c.report("SituationDependentInit", f"initial value of {f.name} reads fluents")
        ruled: set[str] = set()
        for r in f.rules:
            action = spec.action(r.action)
            if r.action in ruled:
                c.report("DuplicateRule", f"{f.name} has two rules for {r.action}")
            ruled.add(r.action)
            if action is None:
                c.report("UnknownAction", f"{f.name} has a rule for undeclared action '{r.action}'")
                continue
            if len(r.params) != len(action.params):
                c.report("RuleArity", f"rule {f.name} after {r.action} binds {len(r.params)} "
                         f"parameter(s), action takes {len(action.params)}")
            clash = set(r.params) & set(env)
            if clash:
                c.report("DuplicateParameter", f"rule {f.name} after {r.action} rebinds {sorted(clash)}")
            if r.expr is not None:
                renv = dict(env)
                for name, p in zip(r.params, action.params):
                    renv[name] = c.param_sort(p, {})
                c.expect(r.expr, c.fluent_sort(f), renv, f"rule {f.name} after {r.action}")
        for a in sorted(action_names - ruled):
            c.report("MissingSuccessorRule", f"stored fluent {f.name} has no rule for action {a} "
                     f"(write 'after {a} = unchanged' for the frame case)")

    for d in spec.derivations:
        c.span = d.span
        f = spec.fluent(d.fluent)
        if f is None:
            c.report("UnknownFluent", f"derivation for undeclared fluent '{d.fluent}'")
            continue
        if len(d.params) != len(f.params):
            c.report("RuleArity", f"derivation of {f.name} binds {len(d.params)} parameter(s), "
                     f"fluent takes {len(f.params)}")
        env = {n: c.param_sort(p, {}) for n, p in zip(d.params, f.params)}
        c.expect(d.expr, c.fluent_sort(f), env, f"derivation of {f.name}")
        if f.name in spec.fluents_in(d.expr, frozenset(env)):
            c.report("SelfDerivation", f"derivation of {f.name} reads {f.name} itself")

    for a in spec.actions:
        c.span = a.span
        env = c.param_env(a.params, f"action {a.name}")
        c.expect(a.pre, BOOL, env, f"precondition of {a.name}")

    for t in spec.tests:
        c.span = t.span
        env = c.param_env(t.params, f"test {t.name}")
        c.expect(t.body, BOOL, env, f"test {t.name}")

    proc_calls: dict[str, set[str]] = {}
    for p in spec.procs:
        c.span = p.span
        c.program(p.body, {}, f"procedure {p.name}")
        proc_calls[p.name] = {q.name for q in program_prims(p.body) if spec.proc(q.name) is not None}
    for comp in _cycles(proc_calls):
        c.span = None
        c.report("RecursiveProc", f"recursive procedures: {', '.join(comp)}")

    c.span = None
    if spec.validity is not None:
        f = spec.fluent(spec.validity)
        if f is None:
            c.report("UnknownFluent", f"validity names undeclared fluent '{spec.validity}'")
        elif f.params or not compatible(c.fluent_sort(f), BOOL):
            c.report("SortMismatch", f"validity fluent {f.name} must be a 0-ary bool fluent")
    elif spec.policies:
        c.report("MissingValidity", "policies are declared but no validity fluent is")

    for b in spec.policies:
        c.span = b.span
        where = f"policy {b.kind}"
        env = c.param_env(b.params, where)
        for slot in ("raw", "supplement", "altern"):
            prog = getattr(b, slot)
            if prog is not None:
                c.program(prog, env, f"{where} {slot}")

    # derivation loops are legal but worth knowing about
    c.span = None
    seeds: dict[str, set[str]] = {}
    for f in spec.fluents:
        deps: set[str] = set()
        if f.derived:
            deps |= spec.fluents_in(f.definition, frozenset(p.name for p in f.params))
        for d in spec.derivations_of(f.name):
            deps |= spec.fluents_in(d.expr, frozenset(d.params))
        seeds[f.name] = deps
    for comp in _cycles(seeds):
        c.report("DerivationLoop", f"fluents derive from each other: {', '.join(comp)}", "info")
    if not any(d.is_error for d in c.diags):
        model = get_evaluator(spec).state_model(tuple(f.name for f in spec.stored_fluents))
        for f in spec.fluents:
            if f.name not in model.readable:
                c.report("Underivable", f"fluent {f.name} cannot be computed from the stored fluents")

    if not any(d.is_error for d in c.diags):
        pfb = compute_pfb(build_graph(spec))
        for f in spec.stored_fluents:
            if f.name not in pfb:
                c.report("OutsidePFB", f"stored fluent {f.name} feeds no precondition or test; "
                         "it is kept out of the execution state", "info")
    return c.diags


def load_errors(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.is_error]
