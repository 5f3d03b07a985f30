"""Acceptance suite: one PASS/FAIL line per criterion, printed to the terminal."""

from __future__ import annotations

import random
import time

from hypothesis import Phase, given, settings

from sitcalc.acs import ACS_DOMAIN, BLOCKS_DOMAIN, LOOP_DOMAIN, acs_engine, acs_requests, event, promotable
from sitcalc.analysis import analyze, build_graph, check_closedness, NON_DECISIVE, verify_minimal
from sitcalc.interpreter import df_json
from sitcalc.model import Request
from sitcalc.oracle import check_composition_rules, check_markov
from sitcalc.parser import parse_domain
from sitcalc.printer import print_domain
from sitcalc.validity import Branch, run_scenario, serve, situation_valid

from .conftest import FIXTURES, df_ids, load
from .specgen import domains

SHIPPED = [ACS_DOMAIN, BLOCKS_DOMAIN, LOOP_DOMAIN, FIXTURES / "adversarial.domain", FIXTURES / "acs_logged.domain"]
SUPPLEMENTED = {Branch.RAW_PLUS_SUPPLEMENT, Branch.ALTERN_PLUS_SUPPLEMENT}


def report(capsys, number: int, title: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\ncriterion {number} {title}: {'PASS' if ok else 'FAIL'} ({detail})")


# ---------------------------------------------------------------- 1

def test_criterion_1_golden_scenario(capsys):
    t0 = time.perf_counter()
    engine = acs_engine()
    s0 = engine.initial()
    outcomes = run_scenario(engine, acs_requests(), s0)
    elapsed = time.perf_counter() - t0
    dfs = [df_ids(s0)] + [df_ids(o.situation) for o in outcomes]
    branches = [o.branch.value for o in outcomes]
    ok = (dfs == [(["ev001", "ev002"], []),
                  (["ev001", "ev002"], ["ev003"]),
                  (["ev001", "ev002"], ["ev003", "ev004"]),
                  (["ev002", "ev004"], ["ev003"])]
          and branches == ["Altern", "Altern", "RawPlusSupplement"] and elapsed < 1.0)
    report(capsys, 1, "golden scenario", ok, f"branches {branches}, {elapsed:.3f}s")
    assert ok, dfs


# ---------------------------------------------------------------- 2

def test_criterion_2_decisive_fluents(capsys):
    t0 = time.perf_counter()
    acs = load(ACS_DOMAIN)
    acs_report = analyze(acs)
    incremental = [d for d in check_closedness(acs, acs_report.df) if d.code == "Incremental"]
    loop = load(LOOP_DOMAIN)
    loop_report = analyze(loop)
    loop_minimal = verify_minimal(build_graph(loop), loop_report.pfb, loop_report.df) == []
    blocks_report = analyze(load(BLOCKS_DOMAIN))
    elapsed = time.perf_counter() - t0
    ok = (acs_report.df == ["agenda_list", "tempagn_list"] and len(incremental) == 4
          and set(loop_report.df) in ({"F1", "F2"}, {"G1", "F2"}) and loop_minimal
          and blocks_report.marks["clear"] == NON_DECISIVE and elapsed < 1.0)
    report(capsys, 2, "decisive-fluent analysis", ok,
           f"acs {acs_report.df}, loop {loop_report.df}, {elapsed:.3f}s")
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_3_markov_and_composition(capsys):
    t0 = time.perf_counter()
    results = {}
    for name, path in (("acs", ACS_DOMAIN), ("blocks", BLOCKS_DOMAIN)):
        spec = load(path)
        results[name] = (check_markov(spec, samples=200, depth=2, seed=42),
                         check_composition_rules(spec, cases=1000, seed=42))
    adversarial = check_markov(load(FIXTURES / "adversarial.domain"), samples=200, depth=2, seed=42,
                               require_closed=False)
    elapsed = time.perf_counter() - t0
    clean = all(r.passed for pair in results.values() for r in pair)
    ok = clean and adversarial.verdict == "fail" and elapsed < 30.0
    report(capsys, 3, "markov and composition", ok,
           f"acs/blocks clean={clean}, adversarial={adversarial.verdict}, {elapsed:.1f}s")
    assert ok, [str(r) for pair in results.values() for r in pair]


# ---------------------------------------------------------------- 4 and 5

STREAMS = 500
MAX_LEN = 20


def _stream(rng: random.Random, known: list) -> list[Request]:
    out = []
    for i in range(rng.randint(1, MAX_LEN)):
        if known and rng.random() < 0.3:
            out.append(Request("delete", (rng.choice(known),)))
            continue
        start = rng.randrange(480, 1080, 10)
        e = event(f"r{i:02d}", start, start + rng.randrange(10, 130, 10), rng.randint(1, 4))
        known.append(e)
        out.append(Request("add", (e,)))
    return out


def _run_streams():
    engine = acs_engine()
    stats = {"steps": 0, "unsafe": 0, "moved_on_reject": 0, "supplements": 0, "promotable": 0}
    t0 = time.perf_counter()
    for seed in range(STREAMS):
        rng = random.Random(seed)
        sit = engine.initial()
        known = sorted(sit["agenda_list"], key=lambda v: v["id"])
        for r in _stream(rng, known):
            out = serve(engine, r, sit, trace=False)
            stats["steps"] += 1
            if not situation_valid(engine, out.situation):
                stats["unsafe"] += 1
            if out.branch is Branch.REJECTED and df_json(out.situation) != df_json(sit):
                stats["moved_on_reject"] += 1
            if out.branch in SUPPLEMENTED:
                stats["supplements"] += 1
                stats["promotable"] += len(promotable(engine, out.situation))
            sit = out.situation
    stats["elapsed"] = time.perf_counter() - t0
    return stats


_STATS: dict = {}


def stream_stats():
    if not _STATS:
        _STATS.update(_run_streams())
    return _STATS


def test_criterion_4_validity_safety(capsys):
    s = stream_stats()
    ok = s["unsafe"] == 0 and s["moved_on_reject"] == 0 and s["elapsed"] < 30.0
    report(capsys, 4, "validity safety", ok,
           f"{STREAMS} streams, {s['steps']} requests, {s['unsafe']} invalid, "
           f"{s['moved_on_reject']} rejections with changes, {s['elapsed']:.1f}s")
    assert ok, s


def test_criterion_5_supplement_leaves_nothing_promotable(capsys):
    s = stream_stats()
    ok = s["supplements"] > 0 and s["promotable"] == 0
    report(capsys, 5, "supplement completeness", ok,
           f"{s['supplements']} supplement runs, {s['promotable']} promotable events left")
    assert ok, s


# ---------------------------------------------------------------- 6

def test_criterion_6_round_trip(capsys):
    failures = []
    for path in SHIPPED:
        spec = parse_domain(path.read_text())
        text = print_domain(spec)
        if parse_domain(text) != spec or print_domain(parse_domain(text)) != text:
            failures.append(path.name)
    fuzzed = []

    @settings(max_examples=100, deadline=None, derandomize=True, phases=[Phase.generate])
    @given(domains())
    def fuzz(spec):
        text = print_domain(spec)
        again = parse_domain(text)
        if again != spec or print_domain(again) != text:
            failures.append(text)
        fuzzed.append(spec)

    fuzz()
    ok = not failures and len(fuzzed) >= 100
    report(capsys, 6, "parser round-trip", ok,
           f"{len(SHIPPED)} shipped and {len(fuzzed)} fuzzed specs, {len(failures)} failures")
    assert ok, failures[:3]
