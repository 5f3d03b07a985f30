"""Bounded, brute-force checks of situation equivalence.

Two situations are evolutionally equivalent when no complex action can tell
them apart by the possibility of a primitive action or the value of a test
afterwards; functional equivalence additionally compares every fluent.  The
checks below falsify these properties on finite samples; they prove nothing.

Complex actions are enumerated over a pool of ``n`` leaves (ground primitive
actions and ground tests) plus ``m`` argument-choice templates.  The set of
programs of depth ``k`` is::

    D0 = leaves                                  |D0| = n
    Dk = leaves + Seq(l, d) + Choice(l, d)        |Dk| = n + 2n|Dk-1|
         + Iter(d) + templates   (k >= 2 only)          + |Dk-1| + m
    for l in leaves, d in Dk-1

so depth 1 gives ``n + 2n^2`` programs.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import BudgetExceeded, EvalError, IterationBudgetExceeded, SpecError
from .interpreter import Engine, GroundAction, Situation
from .model import DomainSpec
from .nodes import (
    ArgChoice, Call, Choice, Expr, Iter, Lit, Name, Prim, Program, RecordLit, Seq, SetLit, Sort, Test,
    TupleLit,
)
from .printer import print_expr, print_program
from .values import Record, Table, Value, sort_name, sorted_values

DEFAULT_CAP = 250_000
ORACLE_BUDGET = 2_000
DIVERGES = "diverges"


# ------------------------------------------------------------------ reports

@dataclass(frozen=True)
class Counterexample:
    history1: tuple[str, ...]
    history2: tuple[str, ...]
    delta: str
    observable: str
    values: tuple[str, str] = ("", "")

    def to_json(self) -> dict:
        return {"history1": list(self.history1), "history2": list(self.history2),
                "delta": self.delta, "observable": self.observable, "values": list(self.values)}


@dataclass
class EquivalenceReport:
    kind: str
    checked: int = 0
    depth: int = 0
    counterexample: Optional[Counterexample] = None
    seed: Optional[int] = None
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if self.counterexample is None else "fail"

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def to_json(self) -> dict:
        return {"kind": self.kind, "verdict": self.verdict, "checked": self.checked, "depth": self.depth,
                "seed": self.seed, "counterexample": self.counterexample and self.counterexample.to_json(),
                "notes": list(self.notes)}

    def __str__(self) -> str:
        head = f"{self.kind}: {self.verdict} ({self.checked} checks, depth {self.depth}"
        head += f", seed {self.seed})" if self.seed is not None else ")"
        if self.counterexample is None:
            return head
        c = self.counterexample
        return (f"{head}\n  situation 1: {'; '.join(c.history1) or '(initial)'}"
                f"\n  situation 2: {'; '.join(c.history2) or '(initial)'}"
                f"\n  program: {c.delta}\n  observable: {c.observable} = {c.values[0]} vs {c.values[1]}")


# --------------------------------------------------------------------- pools

def value_expr(v: Value, names: Optional[dict] = None) -> Expr:
    """An expression denoting ``v``; named constants are referred to by name."""
    if names:
        name = names.get(v)
        if name is not None and not isinstance(v, bool):
            return Name(name)
    if isinstance(v, Record):
        return RecordLit(v.schema, tuple((k, value_expr(x, names)) for k, x in v.fields))
    if isinstance(v, frozenset):
        return SetLit(tuple(value_expr(x, names) for x in sorted_values(v)))
    if isinstance(v, tuple):
        return TupleLit(tuple(value_expr(x, names) for x in v))
    return Lit(v)


def _matches(v: Value, sort: Optional[Sort]) -> bool:
    if sort is None or sort.kind == "any":
        return True
    if sort.kind == "record":
        return isinstance(v, Record) and v.schema == sort.name
    if sort.kind in ("bool", "int", "string"):
        return sort_name(v) == sort.kind
    if sort.kind == "set":
        return isinstance(v, frozenset) and all(_matches(x, sort.elem) for x in v)
    if sort.kind == "tuple":
        return isinstance(v, tuple) and len(v) == len(sort.args) and all(
            _matches(x, s) for x, s in zip(v, sort.args))
    return False


def _objects(v: Value, out: set) -> None:
    if isinstance(v, Table):
        for _, x in v.entries:
            _objects(x, out)
        return
    out.add(v)
    if isinstance(v, frozenset):
        for x in v:
            _objects(x, out)


@dataclass
class Pool:
    """Ground material for building programs."""

    prims: list[Prim]
    tests: list[Test]
    picks: list[ArgChoice]
    actions: list[GroundAction]

    @property
    def leaves(self) -> list[Program]:
        return [*self.prims, *self.tests]


def build_pool(engine: Engine, extra: Iterable[Value] = ()) -> Pool:
    """Ground actions and tests over the objects of the constants and the initial state."""
    spec, ev = engine.spec, engine.evaluator
    objects: set = set()
    for c in spec.consts:
        _objects(ev.const_value(c.name), objects)
    init = engine.initial()
    for v in init.state.values:
        _objects(v, objects)
    for v in extra:
        _objects(v, objects)
    objects = sorted_values(objects)
    names = engine.names

    def candidates(owner: str, p) -> list[Value]:
        if p.domain is not None:
            return sorted_values(ev.param_domain(owner, p))
        return [v for v in objects if _matches(v, p.sort)]

    prims, actions = [], []
    for a in spec.actions:
        for args in itertools.product(*(candidates(a.name, p) for p in a.params)):
            actions.append(GroundAction(a.name, tuple(args)))
            prims.append(Prim(a.name, tuple(value_expr(x, names) for x in args)))
    tests = []
    for t in spec.tests:
        for args in itertools.product(*(candidates(t.name, p) for p in t.params)):
            tests.append(Test(Call(t.name, tuple(value_expr(x, names) for x in args))))
    if spec.validity is not None:
        tests.append(Test(Name(spec.validity)))

    picks = []
    set_fluents = [f for f in spec.fluents if not f.params and f.sort is not None and f.sort.kind == "set"]
    for a in spec.actions:
        if not a.params:
            continue
        first, rest = a.params[0], a.params[1:]
        fixed = []
        for p in rest:
            vals = candidates(a.name, p)
            if not vals:
                break
            fixed.append(value_expr(vals[0], names))
        else:
            domains: list[Expr] = [SetLit(tuple(value_expr(x, names) for x in candidates(a.name, first)))]
            domains += [Name(f.name) for f in set_fluents
                        if first.sort is None or f.sort.elem == first.sort or f.sort.elem.kind == "any"]
            for d in domains:
                picks.append(ArgChoice("v", d, Name("v"), Prim(a.name, (Name("v"), *fixed))))
    return Pool(prims, tests, picks, actions)


# --------------------------------------------------------------- enumeration

def delta_count(n: int, m: int, depth: int) -> int:
    size = n
    for k in range(1, depth + 1):
        size = n + 2 * n * size + ((size + m) if k >= 2 else 0)
    return size


def enumerate_deltas(pool: Pool, depth: int, cap: int = DEFAULT_CAP) -> list[Program]:
    if depth < 0:
        raise ValueError("depth must be non-negative")
    leaves = pool.leaves
    total = delta_count(len(leaves), len(pool.picks), depth)
    if total > cap:
        raise BudgetExceeded(f"{total} programs at depth {depth} exceed the cap of {cap}")
    level: list[Program] = list(leaves)
    for k in range(1, depth + 1):
        nxt: list[Program] = list(leaves)
        nxt += [Seq(a, b) for a in leaves for b in level]
        nxt += [Choice(a, b) for a in leaves for b in level]
        if k >= 2:
            nxt += [Iter(d) for d in level]
            nxt += pool.picks
        level = nxt
    return level


def sample_deltas(pool: Pool, depth: int, limit: int, rng: random.Random,
                  cap: int = DEFAULT_CAP) -> list[Program]:
    """All programs when there are at most ``limit`` of them, else the leaves plus a seeded sample."""
    leaves = pool.leaves
    total = delta_count(len(leaves), len(pool.picks), depth)
    if total <= limit:
        return enumerate_deltas(pool, depth, cap)
    everything = enumerate_deltas(pool, depth, cap)
    rest = everything[len(leaves):]
    chosen = sorted(rng.sample(range(len(rest)), max(0, min(len(rest), limit - len(leaves)))))
    return leaves + [rest[i] for i in chosen]


# -------------------------------------------------------------- observation

def _attempt(fn):
    try:
        return fn()
    except IterationBudgetExceeded:
        return DIVERGES
    except EvalError as exc:
        return f"error: {type(exc).__name__}"


def _observe(engine: Engine, sit: Situation, pool: Pool, fluents: bool) -> list[tuple[str, object]]:
    out: list[tuple[str, object]] = []
    for a in pool.actions:
        out.append((f"Poss({engine.format_action(a)})", _attempt(lambda a=a: engine.poss_prim(a, sit))))
    for t in pool.tests:
        out.append((f"test {print_expr(t.cond)}", _attempt(lambda t=t: engine.eval(t.cond, sit))))
    if fluents:
        for name, args in _fluent_terms(engine):
            label = name + ("(" + ", ".join(engine.format_value(x) for x in args) + ")" if args else "")
            out.append((label, _attempt(lambda n=name, a=args: engine.eval_fluent(n, a, sit))))
    return out


def _fluent_terms(engine: Engine) -> list[tuple[str, tuple]]:
    terms = []
    for f in engine.spec.fluents:
        if f.name not in engine.model.readable:
            continue
        if any(p.domain is None for p in f.params):
            continue
        doms = [sorted_values(engine.evaluator.param_domain(f.name, p)) for p in f.params]
        terms += [(f.name, tuple(args)) for args in itertools.product(*doms)]
    return terms


def _run(engine: Engine, delta: Optional[Program], sit: Situation):
    """``(success, situation)``; a diverging or erroring run is reported as a string."""
    if delta is None:
        return True, sit
    try:
        out = engine.simulate(delta, sit)
    except IterationBudgetExceeded:
        return DIVERGES, None
    except EvalError as exc:
        return f"error: {type(exc).__name__}", None
    return out.success, out.situation


def _history(engine: Engine, sit: Situation) -> tuple[str, ...]:
    return tuple(engine.format_action(a) for a in sit.history)


def _show(v: object, engine: Engine) -> str:
    if isinstance(v, str) and (v == DIVERGES or v.startswith("error")):
        return v
    return engine.format_value(v)


def _compare(engine: Engine, sit1: Situation, sit2: Situation, deltas: Sequence[Optional[Program]],
             pool: Pool, fluents: bool, report: EquivalenceReport,
             engine2: Optional[Engine] = None, h2: Optional[tuple[str, ...]] = None) -> bool:
    engine2 = engine2 or engine
    for delta in deltas:
        label = "(empty)" if delta is None else print_program(delta)
        ok1, s1 = _run(engine, delta, sit1)
        ok2, s2 = _run(engine2, delta, sit2)
        report.checked += 1
        pairs = [("success", ok1, ok2)]
        if ok1 is True and ok2 is True:
            o1 = _observe(engine, s1, pool, fluents)
            o2 = _observe(engine2, s2, pool, fluents)
            pairs += [(k, a, b) for (k, a), (_, b) in zip(o1, o2)]
        for key, a, b in pairs:
            if a != b or type(a) is not type(b):
                report.counterexample = Counterexample(
                    _history(engine, sit1), h2 if h2 is not None else _history(engine2, sit2),
                    label, key, (_show(a, engine), _show(b, engine2)))
                return False
    return True


# -------------------------------------------------------------------- checks

def check_evolutional_equiv(sit1: Situation, sit2: Situation, engine: Engine, depth: int = 2,
                            pool: Optional[Pool] = None, deltas: Optional[Sequence[Program]] = None,
                            cap: int = DEFAULT_CAP) -> EquivalenceReport:
    pool = pool or build_pool(engine)
    deltas = enumerate_deltas(pool, depth, cap) if deltas is None else deltas
    report = EquivalenceReport("evolutional", depth=depth)
    _compare(engine, sit1, sit2, [None, *deltas], pool, False, report)
    return report


def check_functional_equiv(sit1: Situation, sit2: Situation, engine: Engine, depth: int = 2,
                           pool: Optional[Pool] = None, deltas: Optional[Sequence[Program]] = None,
                           cap: int = DEFAULT_CAP) -> EquivalenceReport:
    pool = pool or build_pool(engine)
    deltas = enumerate_deltas(pool, depth, cap) if deltas is None else deltas
    report = EquivalenceReport("functional", depth=depth)
    _compare(engine, sit1, sit2, [None, *deltas], pool, True, report)
    return report


def sample_histories(engine: Engine, pool: Pool, samples: int, rng: random.Random,
                     max_len: int = 8) -> list[Situation]:
    """Seeded random walks from the initial situation through possible ground actions."""
    out = []
    for _ in range(samples):
        sit = engine.initial()
        for _ in range(rng.randint(0, max_len)):
            possible = [a for a in pool.actions if _attempt(lambda a=a: engine.poss_prim(a, sit)) is True]
            if not possible:
                break
            a = rng.choice(possible)
            try:
                sit = engine.step(a, sit)
            except EvalError:
                break
        out.append(sit)
    return out


def _engines(spec: DomainSpec, require_closed: bool, budget: int) -> tuple[Engine, Engine]:
    full = Engine(spec, tracked=[f.name for f in spec.stored_fluents], budget=budget, require_closed=False)
    if require_closed:
        bad = [d for d in full.report.closedness if d.is_error]
        if bad:
            raise SpecError(bad)
    df = Engine(spec, budget=budget, require_closed=require_closed, report=full.report)
    return full, df


def check_markov(spec: DomainSpec, samples: int = 200, depth: int = 2, seed: int = 0,
                 max_deltas: int = 400, require_closed: bool = True, budget: int = ORACLE_BUDGET,
                 cap: int = DEFAULT_CAP) -> EquivalenceReport:
    """Sampled check that the decisive fluents determine the future.

    Histories are sampled on a reference engine that keeps every stored
    fluent.  Situations agreeing on the decisive fluents must be
    evolutionally equivalent, and every program must behave the same when
    run on a fresh situation rebuilt from the decisive values alone.
    """
    rng = random.Random(seed)
    full, dfe = _engines(spec, require_closed, budget)
    pool = build_pool(full)
    deltas = sample_deltas(pool, depth, max_deltas, rng, cap)
    report = EquivalenceReport("markov", depth=depth, seed=seed)
    sits = sample_histories(full, pool, samples, rng)

    # distinct full states, shortest history first
    unique: dict = {}
    for s in sorted(sits, key=lambda s: len(s.history)):
        unique.setdefault(s.state, s)
    buckets: dict[tuple, list[Situation]] = {}
    for s in unique.values():
        buckets.setdefault(tuple(s[f] for f in dfe.tracked), []).append(s)
    report.notes.append(f"{len(sits)} histories, {len(unique)} distinct states, {len(buckets)} decisive valuations")

    for key in sorted(buckets, key=repr):
        group = buckets[key]
        for other in group[1:]:
            sub = check_evolutional_equiv(group[0], other, full, depth, pool, deltas, cap)
            report.checked += sub.checked
            if not sub.passed:
                report.counterexample = sub.counterexample
                return report

    # rebuilt from the decisive values alone
    for s in unique.values():
        fresh = dfe.situation({f: s[f] for f in dfe.tracked})
        if not _compare_df(full, s, dfe, fresh, [None, *deltas], pool, report):
            return report
    return report


def _compare_df(full: Engine, s: Situation, dfe: Engine, fresh: Situation,
                deltas: Sequence[Optional[Program]], pool: Pool, report: EquivalenceReport) -> bool:
    h1 = _history(full, s)
    for delta in deltas:
        label = "(empty)" if delta is None else print_program(delta)
        ok1, s1 = _run(full, delta, s)
        ok2, s2 = _run(dfe, delta, fresh)
        report.checked += 1
        pairs = [("success", ok1, ok2)]
        if ok1 is True and ok2 is True:
            pairs += [(f, s1[f], s2[f]) for f in dfe.tracked]
            o1 = _observe(full, s1, pool, False)
            o2 = _observe(dfe, s2, pool, False)
            pairs += [(k, a, b) for (k, a), (_, b) in zip(o1, o2)]
        for key, a, b in pairs:
            if a != b or type(a) is not type(b):
                report.counterexample = Counterexample(
                    h1, ("(rebuilt from decisive fluents)",), label, key,
                    (_show(a, full), _show(b, dfe)))
                return False
    return True


def check_composition_rules(spec: DomainSpec, cases: int = 1000, seed: int = 0, samples: int = 50,
                            budget: int = ORACLE_BUDGET, engine: Optional[Engine] = None) -> EquivalenceReport:
    """Sampled check of how Seq and Choice compose possibility and successor states."""
    rng = random.Random(seed)
    engine = engine or Engine(spec, tracked=[f.name for f in spec.stored_fluents], budget=budget,
                              require_closed=False)
    pool = build_pool(engine)
    report = EquivalenceReport("composition", depth=1, seed=seed)
    programs = [*pool.leaves, *pool.picks]
    if not programs:
        report.notes.append("no ground programs")
        return report
    sits = sample_histories(engine, pool, samples, rng)

    def outcome(p: Program, s: Situation):
        ok, after = _run(engine, p, s)
        return ok, (after.state if ok is True else None)

    for _ in range(cases):
        d1, d2 = rng.choice(programs), rng.choice(programs)
        s = rng.choice(sits)
        seq, cho = Seq(d1, d2), Choice(d1, d2)
        r1 = outcome(d1, s)
        r2 = outcome(d2, s)
        mid = Situation(s.history, r1[1]) if r1[0] is True else None
        chained = outcome(d2, mid) if mid is not None else (False, None)
        p1 = _attempt(lambda: engine.poss(d1, s))
        p2 = _attempt(lambda: engine.poss(d2, s))
        pmid = _attempt(lambda: engine.poss(d2, mid)) if mid is not None else False
        checks = [
            ("Poss agrees with execution", p1, r1[0]),
            ("Poss of sequence", _attempt(lambda: engine.poss(seq, s)), p1 is True and pmid is True),
            ("Poss of choice", _attempt(lambda: engine.poss(cho, s)), p1 is True or p2 is True),
            ("successor of sequence", outcome(seq, s), chained if r1[0] is True else (False, None)),
            ("successor of choice", outcome(cho, s), r1 if r1[0] is True else r2),
        ]
        report.checked += 1
        for name, got, want in checks:
            if got != want:
                report.counterexample = Counterexample(
                    _history(engine, s), _history(engine, s),
                    f"{print_program(d1)} / {print_program(d2)}", name, (repr(got), repr(want)))
                return report
    return report
