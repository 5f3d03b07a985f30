from __future__ import annotations

from hypothesis import given, settings, strategies as st

from sitcalc.analysis import (
    DECISIVE, NON_DECISIVE, STANDING, DerivationGraph, analyze, build_graph, check_closedness, closure,
    compute_decisive_set, compute_pfb, verify_minimal,
)
from sitcalc.parser import parse_domain


def test_acs_precondition_seed_set(acs):
    g = build_graph(acs)
    assert g.seeds["poss:add_to_agenda_list"] == [frozenset({"agenda_list", "tempagn_list"})]
    assert g.seeds["poss:del_fr_agenda_list"] == [frozenset({"agenda_list"})]
    assert g.seeds["VA"] == [frozenset({"VA1", "VA2"})]
    assert g.is_atomic("agenda_list") and not g.is_atomic("VA")


def test_blocks_clear_is_seeded_by_on(blocks):
    g = build_graph(blocks)
    assert g.seeds["clear"] == [frozenset({"on"})]


def test_no_fluents_means_empty_graph():
    g = build_graph(parse_domain("action go"))
    assert g.fluents == [] and compute_pfb(g) == frozenset()
    assert compute_decisive_set(g).df == []


def test_acs_pfb(acs):
    assert compute_pfb(build_graph(acs)) == {"agenda_list", "tempagn_list", "VA1", "VA2", "VA"}


def test_logging_fluent_is_not_in_pfb(acs_logged):
    pfb = compute_pfb(build_graph(acs_logged))
    assert "changes" not in pfb and "agenda_list" in pfb


def test_pfb_of_atomic_preconditions():
    spec = parse_domain("""
        fluent a: bool { init = true after go = a }
        fluent b: bool { init = true after go = b }
        fluent c: bool { init = true after go = c }
        action go pre a and b
    """)
    assert compute_pfb(build_graph(spec)) == {"a", "b"}


def test_acs_decisive_set(acs):
    report = analyze(acs)
    assert report.df == ["agenda_list", "tempagn_list"]
    assert report.marks["VA"] == NON_DECISIVE and report.marks["agenda_list"] == DECISIVE
    assert report.marks["poss:add_to_agenda_list"] == STANDING


def test_acs_rules_are_closed_and_incremental(acs):
    diags = check_closedness(acs, ["agenda_list", "tempagn_list"])
    assert all(d.code == "Incremental" for d in diags)
    assert len(diags) == 4


def test_derivation_loop_domain(loop):
    g = build_graph(loop)
    report = compute_decisive_set(g)
    assert set(report.df) in ({"F1", "F2"}, {"G1", "F2"})
    assert report.pfb == {"F1", "F2", "G1", "G2", "G3"}
    assert verify_minimal(g, report.pfb, report.df) == []
    # the alternative choice is accepted as well
    assert verify_minimal(g, report.pfb, ["G1", "F2"]) == []
    assert verify_minimal(g, report.pfb, ["F1", "G1", "F2"]) != []
    assert verify_minimal(g, report.pfb, ["F1"]) != []


def test_blocks_clear_is_not_decisive(blocks):
    report = analyze(blocks)
    assert report.marks["clear"] == NON_DECISIVE
    assert report.df == ["on", "ontable"]


def test_all_atomic_pfb_is_decisive():
    spec = parse_domain("""
        fluent a: int { init = 0 after go = a + 1 }
        fluent b: int { init = 0 after go = b }
        action go pre a < b
    """)
    report = analyze(spec)
    assert set(report.df) == report.pfb == {"a", "b"}


def test_rule_reading_non_decisive_derived_fluent():
    spec = parse_domain("""
        fluent a: int { init = 0 after go = a + d }
        fluent b: int { init = 1 after go = b }
        derived d: int = b * 2
        action go pre a < 10
    """)
    report = analyze(spec)
    assert report.df == ["a"]
    assert [d.code for d in report.closedness] == ["NotClosed"]


def test_employee_table_rule_is_incremental():
    spec = parse_domain("""
        fluent table_emp: set(string) { init = {} after hire(emp) = table_emp union {emp} }
        action hire(emp: string) pre emp notin table_emp
    """)
    assert [d.code for d in check_closedness(spec, ["table_emp"])] == ["Incremental"]


def test_report_json(acs):
    data = analyze(acs).to_json()
    assert data["df"] == ["agenda_list", "tempagn_list"]
    assert data["pfb"] == sorted(data["pfb"])


def test_analysis_is_deterministic(acs, loop):
    for spec in (acs, loop):
        assert analyze(spec).to_json() == analyze(spec).to_json()


# ---------------------------------------------------------- random graphs

NAMES = [f"f{i}" for i in range(6)]


@st.composite
def graphs(draw):
    g = DerivationGraph()
    for name in NAMES:
        g.fluents.append(name)
        others = [n for n in NAMES if n != name]
        n_seeds = draw(st.integers(0, 2))
        g.seeds[name] = [frozenset(draw(st.lists(st.sampled_from(others), min_size=1, max_size=3)))
                         for _ in range(n_seeds)]
        if not g.seeds[name] or draw(st.booleans()):
            g.stored.add(name)
    for i in range(draw(st.integers(1, 3))):
        node = f"poss:a{i}"
        g.synthetic.append(node)
        g.seeds[node] = [frozenset(draw(st.lists(st.sampled_from(NAMES), max_size=3)))]
    return g


@settings(max_examples=300, deadline=None)
@given(graphs())
def test_decisive_set_is_sufficient_and_minimal(g):
    pfb = compute_pfb(g)
    report = compute_decisive_set(g, pfb)
    assert set(report.df) <= pfb
    assert verify_minimal(g, pfb, report.df) == []
    assert pfb <= closure(g, report.df)


@settings(max_examples=300, deadline=None)
@given(graphs())
def test_atomic_pfb_fluents_are_always_decisive(g):
    pfb = compute_pfb(g)
    report = compute_decisive_set(g, pfb)
    assert {f for f in pfb if g.is_atomic(f)} <= set(report.df)


@settings(max_examples=100, deadline=None)
@given(graphs())
def test_decisive_set_is_deterministic(g):
    assert compute_decisive_set(g).df == compute_decisive_set(g).df
