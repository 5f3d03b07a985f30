"""Recursive-descent parser for ``.domain`` and ``.scen`` files.

Both parsers collect every diagnostic they can before giving up: a broken
declaration is skipped up to the next top-level keyword and parsing resumes
from there.  If anything was reported, :class:`DomainSyntaxError` is raised
with the whole list.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Optional

from .errors import Diagnostic, DomainSyntaxError, EvalError, SourceSpan
from .evaluator import EMPTY_STATE_FOR, get_evaluator
from .lexer import Token, tokenize
from .model import (
    ActionDef, ConstDef, Derivation, DomainSpec, FluentDef, MacroDef, Param, PolicyBinding,
    ProcDef, Request, SchemaDef, SuccessorRule, TestDef,
)
from .nodes import (
    ANY, BOOL, INT, STRING, ArgChoice, Binary, Call, Choice, Expr, Field, IfExpr, Index, Iter,
    Lit, Name, Prim, Program, Quant, RecordLit, Seq, SetComp, SetLit, Sort, Test, TupleLit, Unary,
    if_then_else, record_sort, set_of, tuple_of, while_do,
)

TOP_LEVEL = ("schema", "const", "macro", "fluent", "derived", "derive", "action", "test",
             "proc", "validity", "policy")

RESERVED = set(TOP_LEVEL) | {
    "init", "after", "pre", "unchanged", "true", "false", "if", "then", "else", "endif",
    "while", "do", "endwhile", "pick", "by", "iterate",
}

COMPARE = ("=", "!=", "<", "<=", ">", ">=", "in", "notin", "subset")
ADDITIVE = ("+", "-", "union", "inter")
MULTIPLICATIVE = ("*", "/", "%")
POLICY_SLOTS = ("raw", "supplement", "altern", "reject")


class _Abort(Exception):
    """Unwinds out of a broken declaration."""


class _Parser:
    def __init__(self, text: str, file: str, newlines: bool = False):
        self.file = file
        self.tokens, self.diags = tokenize(text, file, newlines=newlines)
        self.pos = 0

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("OP", "IDENT") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def error(self, message: str, code: str = "SyntaxError", tok: Optional[Token] = None):
        t = tok or self.tok
        self.diags.append(Diagnostic(code, message, span=t.span))
        raise _Abort()

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected '{text}', found {self.describe(self.tok)}")
        return self.advance()

    def ident(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind != "IDENT" or t.text in RESERVED:
            self.error(f"expected {what}, found {self.describe(t)}")
        self.advance()
        return t.text

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "EOF" else repr(t.text)

    def span_from(self, start: Token) -> SourceSpan:
        end = self.tokens[self.pos - 1] if self.pos > 0 else start
        return SourceSpan(self.file, start.span.start, max(end.span.end, start.span.start),
                          start.span.line, start.span.column)

    # -- sorts and parameters

    def sort(self) -> Sort:
        name = self.tok.text if self.tok.kind == "IDENT" else None
        if name is None:
            self.error(f"expected a sort, found {self.describe(self.tok)}")
        self.advance()
        if name == "bool":
            return BOOL
        if name == "int":
            return INT
        if name == "string":
            return STRING
        if name == "any":
            return ANY
        if name == "set" and self.at("("):
            self.advance()
            elem = self.sort()
            self.expect(")")
            return set_of(elem)
        if name == "tuple" and self.at("("):
            self.advance()
            items = [self.sort()]
            while self.accept(","):
                items.append(self.sort())
            self.expect(")")
            return tuple_of(*items)
        if name in RESERVED:
            self.error(f"'{name}' is not a sort")
        return record_sort(name)

    def params(self) -> tuple[Param, ...]:
        if not self.accept("("):
            return ()
        out: list[Param] = []
        if not self.at(")"):
            out.append(self.param())
            while self.accept(","):
                out.append(self.param())
        self.expect(")")
        return tuple(out)

    def param(self) -> Param:
        name = self.ident("parameter name")
        if self.accept(":"):
            return Param(name, sort=self.sort())
        if self.accept("in"):
            return Param(name, domain=self.expr())
        return Param(name)

    def names(self) -> tuple[str, ...]:
        if not self.accept("("):
            return ()
        out: list[str] = []
        if not self.at(")"):
            out.append(self.ident("parameter name"))
            while self.accept(","):
                out.append(self.ident("parameter name"))
        self.expect(")")
        return tuple(out)

    # -- expressions

    def expr(self) -> Expr:
        left = self.or_expr()
        if self.accept("implies"):
            return Binary("implies", left, self.expr())
        return left

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self.accept("or"):
            left = Binary("or", left, self.and_expr())
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.accept("and"):
            left = Binary("and", left, self.not_expr())
        return left

    def not_expr(self) -> Expr:
        if self.accept("not"):
            return Unary("not", self.not_expr())
        return self.compare()

    def compare(self) -> Expr:
        left = self.additive()
        t = self.tok
        if t.kind == "OP" and t.text in COMPARE:
            self.advance()
            left = Binary(t.text, left, self.additive())
            t2 = self.tok
            if t2.kind == "OP" and t2.text in COMPARE:
                self.error("comparisons do not chain; add parentheses", code="ChainedComparison")
        return left

    def additive(self) -> Expr:
        left = self.multiplicative()
        while self.tok.kind == "OP" and self.tok.text in ADDITIVE:
            op = self.advance().text
            left = Binary(op, left, self.multiplicative())
        return left

    def multiplicative(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "OP" and self.tok.text in MULTIPLICATIVE:
            op = self.advance().text
            left = Binary(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.at("-"):
            self.advance()
            if self.tok.kind == "INT":
                return self.postfix(Lit(-self.advance().value))
            return Unary("neg", self.unary())
        return self.postfix(self.primary())

    def postfix(self, e: Expr) -> Expr:
        while True:
            if self.tok.kind == "ATTR":
                self.advance()
                e = Field(e, self.ident("field name"))
            elif self.at("["):
                self.advance()
                if self.tok.kind != "INT":
                    self.error("tuple index must be an integer literal")
                e = Index(e, self.advance().value)
                self.expect("]")
            else:
                return e

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return Lit(t.value)
        if t.kind == "STRING":
            self.advance()
            return Lit(t.value)
        if t.kind == "OP" and t.text in ("forall", "exists"):
            self.advance()
            var = self.ident("quantified variable")
            self.expect("in")
            domain = self.or_expr()
            self.expect(".")
            return Quant(t.text, var, domain, self.expr())
        if t.kind == "IDENT":
            if t.text == "true" or t.text == "false":
                self.advance()
                return Lit(t.text == "true")
            if t.text == "if":
                self.advance()
                cond = self.expr()
                self.expect("then")
                then = self.expr()
                self.expect("else")
                orelse = self.expr()
                self.expect("endif")
                return IfExpr(cond, then, orelse)
            name = self.ident("expression")
            if self.at("("):
                return Call(name, self.call_args())
            if self.at("{") and self._record_ahead():
                return self.record(name)
            return Name(name)
        if self.at("("):
            self.advance()
            if self.accept(")"):
                return TupleLit(())
            first = self.expr()
            if self.accept(","):
                items = [first]
                while not self.at(")"):
                    items.append(self.expr())
                    if not self.accept(","):
                        break
                self.expect(")")
                return TupleLit(tuple(items))
            self.expect(")")
            return first
        if self.at("{"):
            self.advance()
            if self.accept("}"):
                return SetLit(())
            first = self.expr()
            if (self.at("|") and isinstance(first, Binary) and first.op == "in"
                    and isinstance(first.left, Name)):
                self.advance()
                cond = self.expr()
                self.expect("}")
                return SetComp(first.left.id, first.right, cond)
            items = [first]
            while self.accept(","):
                items.append(self.expr())
            self.expect("}")
            return SetLit(tuple(items))
        self.error(f"expected an expression, found {self.describe(t)}")

    def _record_ahead(self) -> bool:
        nxt, after = self.peek(1), self.peek(2)
        if nxt.kind == "OP" and nxt.text == "}":
            return True
        return nxt.kind == "IDENT" and after.kind == "OP" and after.text == "="

    def record(self, schema: str) -> Expr:
        self.expect("{")
        fields: list[tuple[str, Expr]] = []
        while not self.at("}"):
            fname = self.ident("field name")
            self.expect("=")
            fields.append((fname, self.expr()))
            if not self.accept(","):
                break
        self.expect("}")
        return RecordLit(schema, tuple(fields))

    def call_args(self) -> tuple[Expr, ...]:
        self.expect("(")
        args: list[Expr] = []
        if not self.at(")"):
            args.append(self.expr())
            while self.accept(","):
                args.append(self.expr())
        self.expect(")")
        return tuple(args)

    # -- complex actions

    def program(self) -> Program:
        left = self.sequence()
        while self.accept(">>"):
            left = Choice(left, self.sequence())
        return left

    def sequence(self) -> Program:
        left = self.program_primary()
        while self.accept(";"):
            left = Seq(left, self.program_primary())
        return left

    def program_primary(self) -> Program:
        t = self.tok
        if self.accept("test"):
            return Test(self.expr())
        if self.accept("pick"):
            var = self.ident("pick variable")
            self.expect("in")
            domain = self.expr()
            self.expect("by")
            key = self.expr()
            self.expect(":")
            return ArgChoice(var, domain, key, self.program_primary())
        if self.accept("iterate"):
            return Iter(self.program_primary())
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            then = self.program()
            orelse = self.program() if self.accept("else") else None
            self.expect("endif")
            return if_then_else(cond, then, orelse)
        if self.accept("while"):
            cond = self.expr()
            self.expect("do")
            body = self.program()
            self.expect("endwhile")
            return while_do(cond, body)
        if self.at("[") or self.at("("):
            close = "]" if self.advance().text == "[" else ")"
            body = self.program()
            self.expect(close)
            return body
        if t.kind == "IDENT" and t.text not in RESERVED:
            name = self.ident()
            args = self.call_args() if self.at("(") else ()
            return Prim(name, args)
        self.error(f"expected a complex action, found {self.describe(t)}")

    # -- declarations

    def domain(self) -> DomainSpec:
        parts: dict[str, list] = {k: [] for k in (
            "schemas", "consts", "macros", "fluents", "derivations", "actions", "tests", "procs",
            "policies")}
        validity: list[str] = []
        handlers: dict[str, Callable[[Token], None]] = {
            "schema": lambda s: parts["schemas"].append(self.schema_decl(s)),
            "const": lambda s: parts["consts"].append(self.const_decl(s)),
            "macro": lambda s: parts["macros"].append(self.macro_decl(s)),
            "fluent": lambda s: parts["fluents"].append(self.fluent_decl(s)),
            "derived": lambda s: parts["fluents"].append(self.derived_decl(s)),
            "derive": lambda s: parts["derivations"].append(self.derive_decl(s)),
            "action": lambda s: parts["actions"].append(self.action_decl(s)),
            "test": lambda s: parts["tests"].append(self.test_decl(s)),
            "proc": lambda s: parts["procs"].append(self.proc_decl(s)),
            "validity": lambda s: validity.append(self.ident("validity fluent")),
            "policy": lambda s: parts["policies"].append(self.policy_decl(s)),
        }
        while self.tok.kind != "EOF":
            start = self.tok
            try:
                if start.kind != "IDENT" or start.text not in handlers:
                    self.error(f"expected a declaration, found {self.describe(start)}",
                               code="UnexpectedToken")
                self.advance()
                handlers[start.text](start)
            except _Abort:
                self.recover()
        if len(validity) > 1:
            self.diags.append(Diagnostic("DuplicateValidity", "more than one validity declaration"))
        return DomainSpec(
            schemas=tuple(parts["schemas"]), consts=tuple(parts["consts"]),
            macros=tuple(parts["macros"]), fluents=tuple(parts["fluents"]),
            derivations=tuple(parts["derivations"]), actions=tuple(parts["actions"]),
            tests=tuple(parts["tests"]), procs=tuple(parts["procs"]),
            validity=validity[0] if validity else None, policies=tuple(parts["policies"]),
        )

    def recover(self) -> None:
        self.advance()
        while self.tok.kind != "EOF" and not (self.tok.kind == "IDENT" and self.tok.text in TOP_LEVEL):
            self.advance()

    def schema_decl(self, start: Token) -> SchemaDef:
        name = self.ident("schema name")
        self.expect("{")
        fields: list[tuple[str, Sort]] = []
        while not self.at("}"):
            fname = self.ident("field name")
            self.expect(":")
            fields.append((fname, self.sort()))
            self.accept(",")
        self.expect("}")
        return SchemaDef(name, tuple(fields), span=self.span_from(start))

    def const_decl(self, start: Token) -> ConstDef:
        name = self.ident("constant name")
        sort = self.sort() if self.accept(":") else None
        self.expect("=")
        return ConstDef(name, sort, self.expr(), span=self.span_from(start))

    def macro_decl(self, start: Token) -> MacroDef:
        name = self.ident("macro name")
        params = self.params()
        sort = self.sort() if self.accept(":") else None
        self.expect("=")
        return MacroDef(name, params, sort, self.expr(), span=self.span_from(start))

    def fluent_decl(self, start: Token) -> FluentDef:
        name = self.ident("fluent name")
        params = self.params()
        sort = self.sort() if self.accept(":") else None
        self.expect("{")
        init: Optional[Expr] = None
        rules: list[SuccessorRule] = []
        while not self.at("}"):
            if self.accept("init"):
                self.expect("=")
                if init is not None:
                    self.error(f"fluent {name} has two init clauses", code="DuplicateInit")
                init = self.expr()
            elif self.accept("after"):
                action = self.ident("action name")
                rparams = self.names()
                self.expect("=")
                body = None if self.accept("unchanged") else self.expr()
                rules.append(SuccessorRule(action, rparams, body))
            else:
                self.error(f"expected 'init', 'after' or '}}', found {self.describe(self.tok)}")
        self.expect("}")
        return FluentDef(name, params, sort, init=init, rules=tuple(rules), span=self.span_from(start))

    def derived_decl(self, start: Token) -> FluentDef:
        name = self.ident("fluent name")
        params = self.params()
        sort = self.sort() if self.accept(":") else None
        self.expect("=")
        return FluentDef(name, params, sort, definition=self.expr(), span=self.span_from(start))

    def derive_decl(self, start: Token) -> Derivation:
        name = self.ident("fluent name")
        params = self.names()
        self.expect("=")
        return Derivation(name, params, self.expr(), span=self.span_from(start))

    def action_decl(self, start: Token) -> ActionDef:
        name = self.ident("action name")
        params = self.params()
        pre = self.expr() if self.accept("pre") else Lit(True)
        return ActionDef(name, params, pre, span=self.span_from(start))

    def test_decl(self, start: Token) -> TestDef:
        name = self.ident("test name")
        params = self.params()
        self.expect("=")
        return TestDef(name, params, self.expr(), span=self.span_from(start))

    def proc_decl(self, start: Token) -> ProcDef:
        name = self.ident("procedure name")
        self.expect("=")
        return ProcDef(name, self.program(), span=self.span_from(start))

    def policy_decl(self, start: Token) -> PolicyBinding:
        kind = self.ident("request kind")
        params = self.params()
        self.expect("{")
        slots: dict[str, object] = {}
        while not self.at("}"):
            t = self.tok
            if t.kind != "IDENT" or t.text not in POLICY_SLOTS:
                self.error(f"expected one of {', '.join(POLICY_SLOTS)}, found {self.describe(t)}")
            self.advance()
            if t.text in slots:
                self.error(f"policy {kind} sets '{t.text}' twice", code="DuplicateSlot", tok=t)
            self.expect("=")
            if t.text == "reject":
                if self.tok.kind != "STRING":
                    self.error("reject label must be a string")
                slots["reject"] = self.advance().value
            else:
                slots[t.text] = self.program()
        self.expect("}")
        if "raw" not in slots:
            self.error(f"policy {kind} has no raw action", code="MissingRaw", tok=start)
        return PolicyBinding(kind, params, slots["raw"], slots.get("supplement"),
                             slots.get("altern"), slots.get("reject"), span=self.span_from(start))

    # -- scenarios

    def scenario(self) -> list[tuple[Optional[str], str, tuple[Expr, ...], SourceSpan]]:
        out = []
        while True:
            while self.tok.kind == "NEWLINE" or self.at(";"):
                self.advance()
            if self.tok.kind == "EOF":
                return out
            start = self.tok
            try:
                label = None
                if self.tok.kind == "STRING" and self.peek().text == ":":
                    label = self.advance().value
                    self.advance()
                kind = self.ident("request kind")
                args: list[Expr] = []
                if self.at("("):
                    args = list(self.call_args())
                elif self.tok.kind != "NEWLINE" and not self.at(";") and self.tok.kind != "EOF":
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                if self.tok.kind not in ("NEWLINE", "EOF") and not self.at(";"):
                    self.error(f"expected end of request, found {self.describe(self.tok)}")
                out.append((label, kind, tuple(args), self.span_from(start)))
            except _Abort:
                while self.tok.kind not in ("NEWLINE", "EOF") and not self.at(";"):
                    self.advance()


def parse_domain(text: str, file: str = "<domain>") -> DomainSpec:
    """Parse domain text into a :class:`DomainSpec`, raising on any syntax error."""
    p = _Parser(text, file)
    if p.tok.kind == "EOF":
        raise DomainSyntaxError(p.diags + [Diagnostic("EmptyDomain", "domain text has no declarations",
                                                      span=p.tok.span)])
    spec = p.domain()
    if p.diags:
        raise DomainSyntaxError(p.diags)
    return dataclasses.replace(spec, source=text)


def parse_expr(text: str) -> Expr:
    p = _Parser(text, "<expr>")
    try:
        e = p.expr()
        if p.tok.kind != "EOF":
            p.error(f"unexpected {p.describe(p.tok)} after expression")
    except _Abort:
        pass
    if p.diags:
        raise DomainSyntaxError(p.diags)
    return e


def parse_program(text: str) -> Program:
    p = _Parser(text, "<program>")
    try:
        prog = p.program()
        if p.tok.kind != "EOF":
            p.error(f"unexpected {p.describe(p.tok)} after complex action")
    except _Abort:
        pass
    if p.diags:
        raise DomainSyntaxError(p.diags)
    return prog


def parse_scenario(text: str, spec: DomainSpec, file: str = "<scenario>") -> list[Request]:
    """Parse a request stream; arguments are evaluated to ground values."""
    p = _Parser(text, file, newlines=True)
    raw = p.scenario()
    diags = list(p.diags)
    out: list[Request] = []
    ev = get_evaluator(spec)
    for label, kind, args, span in raw:
        binding = spec.policy(kind)
        if binding is None:
            diags.append(Diagnostic("UnknownPolicy", f"no policy for request kind '{kind}'", span=span))
            continue
        if len(args) != len(binding.params):
            diags.append(Diagnostic(
                "ArityMismatch",
                f"request '{kind}' takes {len(binding.params)} argument(s), got {len(args)}", span=span))
            continue
        try:
            values = tuple(ev.evaluate(a, {}, EMPTY_STATE_FOR(ev)) for a in args)
        except EvalError as exc:
            diags.append(Diagnostic("BadArgument", f"request '{kind}': {exc}", span=span))
            continue
        out.append(Request(kind, values, label, span=span))
    if diags:
        raise DomainSyntaxError(diags)
    return out
