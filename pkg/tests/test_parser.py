from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings

from sitcalc.acs import ACS_DOMAIN, ACS_SCENARIO, BLOCKS_DOMAIN, LOOP_DOMAIN
from sitcalc.errors import DomainSyntaxError
from sitcalc.lexer import tokenize
from sitcalc.nodes import (
    ArgChoice, Binary, Call, Choice, Field, Iter, Lit, Name, Prim, Quant, Seq, Unary,
)
from sitcalc import nodes
from sitcalc.parser import parse_domain, parse_expr, parse_program, parse_scenario
from sitcalc.printer import print_domain, print_expr, print_program

from .conftest import FIXTURES
from .specgen import domains, expressions, programs_over

SHIPPED = [ACS_DOMAIN, BLOCKS_DOMAIN, LOOP_DOMAIN, FIXTURES / "adversarial.domain",
           FIXTURES / "acs_logged.domain"]


def codes(text, fn=parse_domain):
    with pytest.raises(DomainSyntaxError) as info:
        fn(text)
    return info.value.codes


# --------------------------------------------------------------------- lexer

def test_unicode_operators_are_aliases():
    toks, diags = tokenize("∀x ∈ S. ¬p ∧ q ∨ r ⊃ s", "t")
    assert not diags
    assert [t.text for t in toks if t.kind == "OP"] == ["forall", "in", ".", "not", "and", "or", "implies"]


def test_attribute_dot_needs_no_whitespace():
    toks, _ = tokenize("a.b", "t")
    assert [t.kind for t in toks[:2]] == ["IDENT", "ATTR"]
    toks, _ = tokenize("S. b", "t")
    assert toks[1].kind == "OP" and toks[1].text == "."


def test_lexer_reports_bad_characters():
    _, diags = tokenize("a @ b", "t")
    assert [d.code for d in diags] == ["UnexpectedCharacter"]


# -------------------------------------------------------------- expressions

def test_precedence():
    e = parse_expr("a or b and not c implies d")
    assert e == Binary("implies", Binary("or", Name("a"), Binary("and", Name("b"), Unary("not", Name("c")))),
                       Name("d"))
    assert parse_expr("1 + 2 * 3") == Binary("+", Lit(1), Binary("*", Lit(2), Lit(3)))
    assert parse_expr("a implies b implies c") == Binary("implies", Name("a"), Binary("implies", Name("b"),
                                                                                       Name("c")))
    assert parse_expr("-3") == Lit(-3)
    assert parse_expr("-x") == Unary("neg", Name("x"))


def test_quantifier_body_extends_right():
    e = parse_expr("forall b in L. p(b) and q(b)")
    assert isinstance(e, Quant) and isinstance(e.body, Binary) and e.body.op == "and"


def test_field_access_and_calls():
    assert parse_expr("ev.priority") == Field(Name("ev"), "priority")
    assert parse_expr("f(x).id") == Field(Call("f", (Name("x"),)), "id")


def test_chained_comparison_is_rejected():
    assert "ChainedComparison" in codes("a < b < c", parse_expr)


# ----------------------------------------------------------------- programs

def test_program_operators():
    p = parse_program("a; b >> c")
    assert p == Choice(Seq(Prim("a"), Prim("b")), Prim("c"))
    p = parse_program("pick x in S by x.priority : go(x)")
    assert isinstance(p, ArgChoice) and p.body == Prim("go", (Name("x"),))
    assert parse_program("iterate [test p; a]") == Iter(Seq(nodes.Test(Name("p")), Prim("a")))


def test_if_and_while_are_sugar():
    p = parse_program("if p then a else b endif")
    assert p == Choice(Seq(nodes.Test(Name("p")), Prim("a")), Seq(nodes.Test(Unary("not", Name("p"))), Prim("b")))
    w = parse_program("while p do a endwhile")
    assert w == Iter(Seq(nodes.Test(Name("p")), Prim("a")))
    assert print_program(p) == "if p then a else b endif"
    assert print_program(w) == "while p do a endwhile"


# ------------------------------------------------------------------ domains

def test_acs_domain_has_the_two_stored_lists(acs):
    assert [f.name for f in acs.stored_fluents] == ["agenda_list", "tempagn_list"]
    assert acs.validity == "VA"
    assert {p.kind for p in acs.policies} == {"add", "delete"}


def test_blocks_world_has_one_derived_fluent(blocks):
    derived = [f for f in blocks.fluents if f.derived]
    assert [f.name for f in derived] == ["clear"]
    assert isinstance(derived[0].definition, Quant)


def test_empty_input():
    assert codes("") == ["EmptyDomain"]
    assert codes("  # only a comment\n") == ["EmptyDomain"]


def test_all_errors_are_collected():
    found = codes("fluent { }\naction 3\nconst = 1\n")
    assert len(found) >= 3


def test_errors_carry_spans():
    with pytest.raises(DomainSyntaxError) as info:
        parse_domain("const a = 1\nconst b = (", "x.domain")
    d = info.value.diagnostics[0]
    assert d.span is not None and d.span.line == 2 and d.span.file == "x.domain"


def test_policy_diagnostics():
    assert "MissingRaw" in codes("policy p(x) { supplement = a }")
    assert "DuplicateSlot" in codes("policy p(x) { raw = a raw = b }")


def test_parse_is_deterministic():
    text = ACS_DOMAIN.read_text()
    assert parse_domain(text) == parse_domain(text)


# ---------------------------------------------------------------- scenarios

def test_scenario_in_order(acs):
    reqs = parse_scenario("add ev003; add ev004; delete ev001", acs)
    assert [(r.kind, r.args[0]["id"]) for r in reqs] == [("add", "ev003"), ("add", "ev004"), ("delete", "ev001")]


def test_shipped_scenario_matches(acs):
    assert [r.kind for r in parse_scenario(ACS_SCENARIO.read_text(), acs)] == ["add", "add", "delete"]


def test_empty_scenario(acs):
    assert parse_scenario("", acs) == []
    assert parse_scenario("\n# nothing\n", acs) == []


def test_scenario_errors(acs):
    assert codes("add ev003, ev004", lambda t: parse_scenario(t, acs)) == ["ArityMismatch"]
    assert codes("move ev003", lambda t: parse_scenario(t, acs)) == ["UnknownPolicy"]
    assert codes("add nosuch", lambda t: parse_scenario(t, acs)) == ["BadArgument"]


def test_scenario_accepts_labels_and_calls(acs):
    reqs = parse_scenario('"first": add(ev003)\nadd event{id = "x", start_time = 1, end_time = 2, '
                          'priority = 1, description = ""}', acs)
    assert reqs[0].label == "first" and reqs[1].args[0]["id"] == "x"


# ---------------------------------------------------------------- round trip

@pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.name)
def test_shipped_specs_round_trip(path):
    spec = parse_domain(path.read_text())
    text = print_domain(spec)
    assert parse_domain(text) == spec
    assert print_domain(parse_domain(text)) == text


@pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.name)
def test_shipped_specs_are_canonical(path):
    assert print_domain(parse_domain(path.read_text())) == path.read_text()


def test_minimal_spec_is_a_fixpoint():
    once = print_domain(parse_domain("action go"))
    assert once == "action go pre true\n"
    assert print_domain(parse_domain(once)) == once


@settings(max_examples=300, deadline=None)
@given(expressions())
def test_expression_round_trip(e):
    assert parse_expr(print_expr(e)) == e


@settings(max_examples=200, deadline=None)
@given(programs_over(["a", "b", "c"]))
def test_program_round_trip(p):
    assert parse_program(print_program(p)) == p


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow,
                                                                  HealthCheck.data_too_large])
@given(domains())
def test_fuzzed_specs_round_trip(spec):
    text = print_domain(spec)
    assert parse_domain(text) == spec
    assert print_domain(parse_domain(text)) == text
