from __future__ import annotations

import pytest

from sitcalc.parser import parse_domain
from sitcalc.validate import validate_domain

BASE = """
fluent n: int {
  init = 0
  after inc = n + 1
}
action inc pre n < 3
"""


def errors(text):
    return [d.code for d in validate_domain(parse_domain(text)) if d.is_error]


def infos(text):
    return [d.code for d in validate_domain(parse_domain(text)) if d.severity == "info"]


def test_shipped_domains_are_clean(acs, blocks, loop):
    assert validate_domain(acs) == []
    assert [d.code for d in validate_domain(blocks)] == []
    assert [d.code for d in validate_domain(loop)] == ["DerivationLoop"]


def test_base_is_clean():
    assert errors(BASE) == []


@pytest.mark.parametrize("text,code", [
    ("fluent m: int {\n init = 0\n after inc = m\n after nosuch = m\n}", "UnknownAction"),
    ("fluent m: int {\n after inc = m\n}", "MissingInit"),
    ("fluent m: int {\n init = 0\n}", "MissingSuccessorRule"),
    ("fluent m: int {\n init = n\n after inc = m\n}", "SituationDependentInit"),
    ("fluent m: int {\n init = 0\n after inc = m\n after inc = m\n}", "DuplicateRule"),
    ("fluent m: int {\n init = 0\n after inc(a, b) = m\n}", "RuleArity"),
    ("fluent m(x): bool {\n init = false\n after inc = m(x)\n}", "MissingDomain"),
    ("fluent m: bool {\n init = 0\n after inc = true\n}", "SortMismatch"),
    ("action inc pre true", "DuplicateName"),
    ("action size", "ReservedName"),
    ("action go pre n + 1", "SortMismatch"),
    ("action go pre nosuch", "UnboundName"),
    ("action go pre nosuch(1)", "UnknownFunction"),
    ("macro loopy(x: int): int = loopy(x)", "RecursiveMacro"),
    ("macro sd: int = n", "SituationDependentMacro"),
    ("const c = n", "SituationDependentConst"),
    ("derive n = nosuch", "UnboundName"),
    ("derive nosuch = n", "UnknownFluent"),
    ("derive n = n", "SelfDerivation"),
    ("proc p = go\nproc q = p", "UnknownAction"),
    ("proc p = q\nproc q = p", "RecursiveProc"),
    ("policy add(x: int) { raw = inc }", "MissingValidity"),
    ("validity n\npolicy add(x: int) { raw = inc }", "SortMismatch"),
    ("schema s { a: int  a: bool }", "DuplicateField"),
    ("const c: nosuch = 1", "UnknownSchema"),
    ("action go(x: int, x: int)", "DuplicateParameter"),
])
def test_diagnostics(text, code):
    found = errors(BASE + text)
    assert code in found, found


def test_derived_fluent_has_effect():
    import dataclasses
    from sitcalc.model import SuccessorRule
    from sitcalc.nodes import Lit

    spec = parse_domain(BASE + "derived d: int = n + 1")
    d = spec.fluent("d")
    broken = dataclasses.replace(d, rules=(SuccessorRule("inc", (), Lit(1)),))
    spec = dataclasses.replace(spec, fluents=tuple(broken if f.name == "d" else f for f in spec.fluents))
    assert "DerivedFluentHasEffect" in [x.code for x in validate_domain(spec)]
    broken = dataclasses.replace(d, init=Lit(0))
    spec = dataclasses.replace(spec, fluents=tuple(broken if f.name == "d" else f for f in spec.fluents))
    assert "DerivedFluentHasInit" in [x.code for x in validate_domain(spec)]


def test_logging_fluent_outside_pfb_is_reported(acs_logged):
    diags = validate_domain(acs_logged)
    assert [d.code for d in diags] == ["OutsidePFB"]
    assert "changes" in diags[0].message


def test_underivable_fluent():
    # g depends only on itself through a derivation: nothing stored can produce it
    text = BASE + "derived g: bool = h\nderived h: bool = g\ntest t = g"
    assert "Underivable" in errors(text)


def test_derivation_loop_is_information_only(loop):
    assert all(not d.is_error for d in validate_domain(loop))
