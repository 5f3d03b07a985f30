"""Canonical text form of domains, expressions and complex actions.

The printer is the normative formatting: ``parse_domain(print_domain(s))``
equals ``s`` structurally, and printing is a fixpoint.  Short constructs stay
on one line; long ones are broken at their top-level operator.
"""

from __future__ import annotations

import json

from .model import DomainSpec, FluentDef, Param, PolicyBinding
from .nodes import (
    ArgChoice, Binary, Call, Choice, Expr, Field, IfExpr, Index, Iter, Lit, Name, Prim, Program,
    Quant, RecordLit, Seq, SetComp, SetLit, Test, TupleLit, Unary,
)

WIDTH = 88
INDENT = "  "

# expression precedence levels
IMPLIES, OR, AND, NOT, COMPARE, ADD, MUL, UNARY, POSTFIX, ATOM = range(1, 11)

_BINARY_LEVEL = {
    "implies": IMPLIES, "or": OR, "and": AND,
    "=": COMPARE, "!=": COMPARE, "<": COMPARE, "<=": COMPARE, ">": COMPARE, ">=": COMPARE,
    "in": COMPARE, "notin": COMPARE, "subset": COMPARE,
    "+": ADD, "-": ADD, "union": ADD, "inter": ADD,
    "*": MUL, "/": MUL, "%": MUL,
}


def _operand_levels(op: str) -> tuple[int, int]:
    level = _BINARY_LEVEL[op]
    if op == "implies":
        return OR, IMPLIES
    if level == COMPARE:
        return ADD, ADD
    if level == AND:
        return AND, NOT
    return level, level + 1


def _level(e: Expr) -> int:
    if isinstance(e, (Quant, IfExpr)):
        return 0
    if isinstance(e, Binary):
        return _BINARY_LEVEL[e.op]
    if isinstance(e, Unary):
        return NOT if e.op == "not" else UNARY
    if isinstance(e, Lit) and isinstance(e.value, int) and not isinstance(e.value, bool) and e.value < 0:
        return UNARY
    if isinstance(e, (Field, Index)):
        return POSTFIX
    return ATOM


def _lit(v) -> str:
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"literal of unsupported type: {v!r}")


def print_expr(e: Expr, ctx: int = 0) -> str:
    """Single-line rendering of ``e`` in a context of precedence ``ctx``."""
    text = _flat(e)
    if _level(e) < ctx:
        return "(" + text + ")"
    return text


def _postfix_operand(e: Expr) -> str:
    # a literal directly before "." would not lex as field access
    if isinstance(e, Lit):
        return f"({print_expr(e)})"
    return print_expr(e, POSTFIX)


def _flat(e: Expr) -> str:
    if isinstance(e, Lit):
        return _lit(e.value)
    if isinstance(e, Name):
        return e.id
    if isinstance(e, Call):
        return e.name + "(" + ", ".join(print_expr(a) for a in e.args) + ")"
    if isinstance(e, Field):
        return _postfix_operand(e.obj) + "." + e.name
    if isinstance(e, Index):
        return _postfix_operand(e.obj) + f"[{e.index}]"
    if isinstance(e, SetLit):
        return "{" + ", ".join(print_expr(x) for x in e.items) + "}"
    if isinstance(e, SetComp):
        return "{" + f"{e.var} in {print_expr(e.domain, ADD)} | {print_expr(e.cond)}" + "}"
    if isinstance(e, TupleLit):
        if len(e.items) == 1:
            return "(" + print_expr(e.items[0]) + ",)"
        return "(" + ", ".join(print_expr(x) for x in e.items) + ")"
    if isinstance(e, RecordLit):
        return e.schema + "{" + ", ".join(f"{k} = {print_expr(x)}" for k, x in e.fields) + "}"
    if isinstance(e, Unary):
        if e.op == "not":
            return "not " + print_expr(e.operand, NOT)
        inner = e.operand
        if isinstance(inner, Lit) and isinstance(inner.value, int) and not isinstance(inner.value, bool) \
                and inner.value >= 0:
            return f"-({inner.value})"
        return "-" + print_expr(inner, UNARY)
    if isinstance(e, Binary):
        lctx, rctx = _operand_levels(e.op)
        return f"{print_expr(e.left, lctx)} {e.op} {print_expr(e.right, rctx)}"
    if isinstance(e, Quant):
        return f"{e.kind} {e.var} in {print_expr(e.domain, OR)}. {print_expr(e.body)}"
    if isinstance(e, IfExpr):
        return f"if {print_expr(e.cond)} then {print_expr(e.then)} else {print_expr(e.orelse)} endif"
    raise TypeError(f"not an expression: {e!r}")


def expr_lines(e: Expr, indent: int = 0, ctx: int = 0, col: int = 0) -> list[str]:
    """Layout ``e`` over several lines when it does not fit.

    ``col`` is the column where the first line starts.  The first returned
    line carries no indentation; continuation lines are indented by
    ``indent`` levels.
    """
    flat = print_expr(e, ctx)
    if col + len(flat) <= WIDTH or _level(e) < ctx:
        return [flat]
    pad = INDENT * indent
    if isinstance(e, Binary) and e.op in ("and", "or", "implies"):
        lctx, rctx = _operand_levels(e.op)
        left = expr_lines(e.left, indent, lctx, col)
        right = expr_lines(e.right, indent, rctx, len(pad))
        left[-1] += f" {e.op}"
        return left + [pad + right[0]] + right[1:]
    if isinstance(e, Quant):
        head = f"{e.kind} {e.var} in {print_expr(e.domain, OR)}."
        inner = INDENT * (indent + 1)
        body = expr_lines(e.body, indent + 1, col=len(inner))
        return [head, inner + body[0]] + body[1:]
    return [flat]


# ----------------------------------------------------------------- programs

CHOICE, SEQ, PRIMARY = range(3)


def _sugar_if(p: Program):
    if isinstance(p, Choice) and isinstance(p.first, Seq) and isinstance(p.first.first, Test):
        cond = p.first.first.cond
        neg = Unary("not", cond)
        if isinstance(p.second, Test) and p.second.cond == neg:
            return cond, p.first.second, None
        if isinstance(p.second, Seq) and isinstance(p.second.first, Test) and p.second.first.cond == neg:
            return cond, p.first.second, p.second.second
    return None


def _sugar_while(p: Program):
    if isinstance(p, Iter) and isinstance(p.body, Seq) and isinstance(p.body.first, Test):
        return p.body.first.cond, p.body.second
    return None


def _program_level(p: Program) -> int:
    if _sugar_if(p) is not None:
        return PRIMARY
    if isinstance(p, Choice):
        return CHOICE
    if isinstance(p, Seq):
        return SEQ
    return PRIMARY


def print_program(p: Program, ctx: int = CHOICE) -> str:
    if _program_level(p) < ctx:
        return "[" + print_program(p) + "]"
    sugar = _sugar_if(p)
    if sugar is not None:
        cond, then, orelse = sugar
        text = f"if {print_expr(cond)} then {print_program(then)}"
        if orelse is not None:
            text += f" else {print_program(orelse)}"
        return text + " endif"
    loop = _sugar_while(p)
    if loop is not None:
        return f"while {print_expr(loop[0])} do {print_program(loop[1])} endwhile"
    if isinstance(p, Choice):
        return f"{print_program(p.first, CHOICE)} >> {print_program(p.second, SEQ)}"
    if isinstance(p, Seq):
        return f"{print_program(p.first, SEQ)}; {print_program(p.second, PRIMARY)}"
    if isinstance(p, Test):
        return "test " + print_expr(p.cond)
    if isinstance(p, Prim):
        if not p.args:
            return p.name
        return p.name + "(" + ", ".join(print_expr(a) for a in p.args) + ")"
    if isinstance(p, ArgChoice):
        return (f"pick {p.var} in {print_expr(p.domain)} by {print_expr(p.key)} : "
                f"{print_program(p.body, PRIMARY)}")
    if isinstance(p, Iter):
        return "iterate " + print_program(p.body, PRIMARY)
    raise TypeError(f"not a program: {p!r}")


def program_lines(p: Program, indent: int = 0, ctx: int = CHOICE, col: int = 0) -> list[str]:
    """Multi-line layout of a complex action; the first line is unindented."""
    flat = print_program(p, ctx)
    if col + len(flat) <= WIDTH:
        return [flat]
    pad = INDENT * indent
    inner = INDENT * (indent + 1)
    if _program_level(p) < ctx:
        body = program_lines(p, indent + 1, col=len(inner))
        return ["["] + [inner + body[0]] + body[1:] + [pad + "]"]

    sugar = _sugar_if(p)
    if sugar is not None:
        cond, then, orelse = sugar
        out = [f"if {print_expr(cond)} then"]
        body = program_lines(then, indent + 1, col=len(inner))
        out += [inner + body[0]] + body[1:]
        if orelse is not None:
            out.append(pad + "else")
            body = program_lines(orelse, indent + 1, col=len(inner))
            out += [inner + body[0]] + body[1:]
        return out + [pad + "endif"]
    loop = _sugar_while(p)
    if loop is not None:
        body = program_lines(loop[1], indent + 1, col=len(inner))
        return [f"while {print_expr(loop[0])} do"] + [inner + body[0]] + body[1:] + [pad + "endwhile"]
    if isinstance(p, Choice):
        left = program_lines(p.first, indent, CHOICE, col)
        right = program_lines(p.second, indent, SEQ, len(pad) + 3)
        return left + [pad + ">> " + right[0]] + right[1:]
    if isinstance(p, Seq):
        left = program_lines(p.first, indent, SEQ, col)
        right = program_lines(p.second, indent, PRIMARY, len(pad))
        left[-1] += ";"
        return left + [pad + right[0]] + right[1:]
    if isinstance(p, ArgChoice):
        head = f"pick {p.var} in {print_expr(p.domain)} by {print_expr(p.key)} : "
        body = program_lines(p.body, indent, PRIMARY, col + len(head))
        return [head + body[0]] + body[1:]
    if isinstance(p, Iter):
        body = program_lines(p.body, indent, PRIMARY, col + 8)
        return ["iterate " + body[0]] + body[1:]
    if isinstance(p, Test):
        return ["test " + line if i == 0 else line
                for i, line in enumerate(expr_lines(p.cond, indent + 1, col=col + 5))]
    return [flat]


# ------------------------------------------------------------------ domains

def _params(params: tuple[Param, ...]) -> str:
    if not params:
        return ""
    parts = []
    for p in params:
        if p.sort is not None:
            parts.append(f"{p.name}: {p.sort}")
        elif p.domain is not None:
            parts.append(f"{p.name} in {print_expr(p.domain)}")
        else:
            parts.append(p.name)
    return "(" + ", ".join(parts) + ")"


def _names(names: tuple[str, ...]) -> str:
    return "(" + ", ".join(names) + ")" if names else ""


def _sort(sort) -> str:
    return f": {sort}" if sort is not None else ""


def _join(head: str, lines: list[str]) -> str:
    return head + "\n".join(lines)


def _fluent(f: FluentDef) -> str:
    lines = [f"fluent {f.name}{_params(f.params)}{_sort(f.sort)} {{"]
    if f.init is not None:
        head = INDENT + "init = "
        lines.append(_join(head, expr_lines(f.init, 2, col=len(head))))
    for r in f.rules:
        head = f"{INDENT}after {r.action}{_names(r.params)} = "
        if r.unchanged:
            lines.append(head + "unchanged")
        else:
            lines.append(_join(head, expr_lines(r.expr, 2, col=len(head))))
    lines.append("}")
    return "\n".join(lines)


def _policy(b: PolicyBinding) -> str:
    lines = [f"policy {b.kind}{_params(b.params)} {{"]
    for slot in ("raw", "supplement", "altern"):
        prog = getattr(b, slot)
        if prog is not None:
            head = f"{INDENT}{slot} = "
            lines.append(_join(head, program_lines(prog, 1, col=len(head))))
    if b.reject_label is not None:
        lines.append(f"{INDENT}reject = {json.dumps(b.reject_label)}")
    lines.append("}")
    return "\n".join(lines)


def _decl(head: str, e: Expr) -> str:
    return _join(head, expr_lines(e, 1, col=len(head)))


def _group(items: list[str]) -> str:
    # one-liners of a kind sit together; anything multi-line gets air
    sep = "\n\n" if any("\n" in x for x in items) else "\n"
    return sep.join(items)


def print_domain(spec: DomainSpec) -> str:
    """Canonical text of ``spec``; declarations are grouped by category."""
    groups: list[list[str]] = [
        [f"schema {s.name} {{" + "".join(f"\n{INDENT}{n}: {t}" for n, t in s.fields) + "\n}"
         for s in spec.schemas],
        [_decl(f"const {c.name}{_sort(c.sort)} = ", c.expr) for c in spec.consts],
        [_decl(f"macro {m.name}{_params(m.params)}{_sort(m.sort)} = ", m.body) for m in spec.macros],
        [_fluent(f) for f in spec.fluents if not f.derived],
        [_decl(f"derived {f.name}{_params(f.params)}{_sort(f.sort)} = ", f.definition)
         for f in spec.fluents if f.derived],
        [_decl(f"derive {d.fluent}{_names(d.params)} = ", d.expr) for d in spec.derivations],
        [_decl(f"action {a.name}{_params(a.params)} pre ", a.pre) for a in spec.actions],
        [_decl(f"test {t.name}{_params(t.params)} = ", t.body) for t in spec.tests],
        [f"proc {p.name} =\n" + INDENT + "\n".join(program_lines(p.body, 1, col=len(INDENT)))
         for p in spec.procs],
        [f"validity {spec.validity}"] if spec.validity is not None else [],
        [_policy(b) for b in spec.policies],
    ]
    return "\n\n".join(_group(g) for g in groups if g) + "\n"
