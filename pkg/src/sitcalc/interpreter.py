"""Situations and deterministic execution of complex actions.

A :class:`Situation` pairs a ground action history with the valuation of the
tracked fluents (by default the decisive set).  Execution is big-step and
deterministic; a failed run never leaks partial effects.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .analysis import DecisiveReport, analyze
from .errors import (
    Diagnostic, EvalError, IterationBudgetExceeded, PreconditionViolated, SortMismatch, SpecError,
    QuantifierDomainNotSet,
)
from .evaluator import EMPTY_STATE_FOR, State, get_evaluator
from .model import DomainSpec
from .nodes import ArgChoice, Choice, Expr, Iter, Prim, Program, Seq, Test
from .printer import print_expr
from .validate import validate_domain
from .values import Table, Value, format_value, to_json, value_key

DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Situation:
    history: tuple[GroundAction, ...]
    state: State

    @property
    def df(self) -> dict[str, Value]:
        return dict(self.state)

    def __getitem__(self, fluent: str) -> Value:
        return self.state[fluent]


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # PrimExecuted | TestPassed | TestFailed | ChoiceBranch | ArgChosen | IterCount | Failure
    detail: tuple = ()

    def as_dict(self) -> dict:
        return dict(self.detail)


@dataclass
class ExecOutcome:
    success: bool
    situation: Situation
    trace: list[TraceEvent] = field(default_factory=list)
    reason: Optional[str] = None


@dataclass
class _Run:
    """Result of running a program fragment: new state or ``None`` on failure."""

    state: Optional[State]
    actions: tuple[GroundAction, ...]
    events: tuple[TraceEvent, ...]
    reason: Optional[str] = None


class Engine:
    """Executes one domain.

    ``tracked`` names the stored fluents kept in each situation; it defaults
    to the decisive set found by the analysis.  ``require_closed`` makes
    loading fail when some tracked fluent's successor rule needs a fluent that
    cannot be computed from the tracked ones.
    """

    def __init__(self, spec: DomainSpec, tracked: Optional[Iterable[str]] = None,
                 budget: int = DEFAULT_BUDGET, require_closed: bool = True,
                 report: Optional[DecisiveReport] = None):
        if budget < 1:
            raise ValueError("iteration budget must be at least 1")
        errors = [d for d in validate_domain(spec) if d.is_error]
        if errors:
            raise SpecError(errors)
        self.spec = spec
        self.budget = budget
        self.report = report or analyze(spec)
        self.tracked = tuple(self.report.df if tracked is None else tracked)
        bad = [n for n in self.tracked if spec.fluent(n) is None or spec.fluent(n).derived]
        if bad:
            raise SpecError([Diagnostic("DerivedDecisive",
                                        f"cannot store {', '.join(bad)}: only stored fluents can be tracked")])
        self.evaluator = get_evaluator(spec)
        self.model = self.evaluator.state_model(self.tracked)
        if require_closed:
            problems = self._unclosed()
            if problems:
                raise SpecError(problems)
        self.names = {self.evaluator.const_value(c.name): c.name for c in spec.consts}
        self._memo: dict = {}
        self._steps = 0
        self._rules = self._compile_rules()
        self._pres = {a.name: (tuple(p.name for p in a.params),
                               self.evaluator.compile(a.pre, frozenset(p.name for p in a.params)))
                      for a in spec.actions}
        self._labels: dict[int, str] = {}

    # -- loading

    def _unclosed(self) -> list[Diagnostic]:
        out = []
        readable = self.model.readable
        for name in self.tracked:
            f = self.spec.fluent(name)
            scope = frozenset(p.name for p in f.params)
            for r in f.rules:
                if r.unchanged:
                    continue
                stray = sorted(self.spec.fluents_in(r.expr, scope | frozenset(r.params)) - readable)
                if stray:
                    out.append(Diagnostic("NotClosed", f"rule {name} after {r.action} reads "
                                          f"{', '.join(stray)}, which the tracked fluents cannot supply"))
        return out

    def _compile_rules(self):
        rules: dict[str, list] = {a.name: [] for a in self.spec.actions}
        for i, name in enumerate(self.tracked):
            f = self.spec.fluent(name)
            fparams = tuple(p.name for p in f.params)
            for r in f.rules:
                if r.unchanged or r.action not in rules:
                    continue
                fn = self.evaluator.compile(r.expr, frozenset(fparams) | frozenset(r.params))
                rules[r.action].append((i, fparams, r.params, fn))
        return rules

    def _domain_tuples(self, fluent) -> list[tuple]:
        doms = [self.evaluator.param_domain(fluent.name, p) for p in fluent.params]
        return list(itertools.product(*doms))

    # -- situations

    def initial(self) -> Situation:
        empty = EMPTY_STATE_FOR(self.evaluator)
        values = []
        for name in self.tracked:
            f = self.spec.fluent(name)
            fn = self.evaluator.compile(f.init, frozenset(p.name for p in f.params))
            if f.params:
                names = [p.name for p in f.params]
                values.append(Table((args, fn(dict(zip(names, args)), empty))
                                    for args in self._domain_tuples(f)))
            else:
                values.append(fn({}, empty))
        return Situation((), self.model.make(tuple(values)))

    def situation(self, df: Mapping[str, Value], history: Iterable[GroundAction] = ()) -> Situation:
        """A situation with the given tracked-fluent values (used to rebuild from DF alone)."""
        missing = set(self.tracked) - set(df)
        if missing:
            raise ValueError(f"missing values for {sorted(missing)}")
        return Situation(tuple(history), self.model.make(tuple(df[n] for n in self.tracked)))

    def replay(self, history: Iterable[GroundAction]) -> Situation:
        sit = self.initial()
        for a in history:
            sit = self.step(a, sit)
        return sit

    # -- primitive actions

    def poss_prim(self, action: GroundAction, sit: Situation) -> bool:
        return self._poss_state(action, sit.state)

    def _poss_state(self, action: GroundAction, state: State) -> bool:
        entry = self._pres.get(action.name)
        if entry is None:
            raise EvalError(f"unknown action '{action.name}'")
        params, fn = entry
        if len(params) != len(action.args):
            raise SortMismatch(f"{action.name} takes {len(params)} argument(s), got {len(action.args)}")
        v = fn(dict(zip(params, action.args)), state)
        if not isinstance(v, bool):
            raise SortMismatch(f"precondition of {action.name} is not boolean")
        return v

    def step(self, action: GroundAction, sit: Situation) -> Situation:
        if not self.poss_prim(action, sit):
            raise PreconditionViolated(f"{self.format_action(action)} is not possible here")
        return Situation(sit.history + (action,), self._successor(action, sit.state))

    def _successor(self, action: GroundAction, state: State) -> State:
        values = list(state.values)
        for i, fparams, rparams, fn in self._rules.get(action.name, ()):
            env = dict(zip(rparams, action.args))
            old = state.values[i]
            if fparams:
                entries = []
                for args, _ in old.entries:
                    env.update(zip(fparams, args))
                    entries.append((args, fn(env, state)))
                values[i] = Table(entries)
            else:
                values[i] = fn(env, state)
        return self.model.make(tuple(values))

    # -- complex actions

    def eval(self, expr: Expr, sit: Situation, env: Optional[Mapping[str, Value]] = None) -> Value:
        return self.evaluator.evaluate(expr, env or {}, sit.state)

    def eval_fluent(self, name: str, args: Iterable[Value], sit: Situation) -> Value:
        return sit.state.read(name, tuple(args))

    def poss(self, delta: Program, sit: Situation, env: Optional[Mapping[str, Value]] = None) -> bool:
        """Possibility of a complex action, defined by structural recursion."""
        env = dict(env or {})
        self._steps = 0
        return self._poss(delta, sit.state, env)

    def _poss(self, p: Program, state: State, env: dict) -> bool:
        if isinstance(p, Prim):
            proc = self.spec.proc(p.name)
            if proc is not None and self.spec.action(p.name) is None:
                return self._poss(proc.body, state, {})
            return self._poss_state(self._ground(p, state, env), state)
        if isinstance(p, Test):
            return self._truth(p.cond, state, env)
        if isinstance(p, Seq):
            if not self._poss(p.first, state, env):
                return False
            mid = self._run(p.first, state, env, False)
            return mid.state is not None and self._poss(p.second, mid.state, env)
        if isinstance(p, Choice):
            return self._poss(p.first, state, env) or self._poss(p.second, state, env)
        if isinstance(p, ArgChoice):
            return any(self._poss(p.body, state, {**env, p.var: v}) for v in self._candidates(p, state, env))
        if isinstance(p, Iter):
            return True
        raise TypeError(f"not a program: {p!r}")

    def execute(self, delta: Program, sit: Situation, env: Optional[Mapping[str, Value]] = None,
                trace: bool = True) -> ExecOutcome:
        self._steps = 0
        run = self._run(delta, sit.state, dict(env or {}), trace)
        if run.state is None:
            return ExecOutcome(False, sit, list(run.events), run.reason)
        return ExecOutcome(True, Situation(sit.history + run.actions, run.state), list(run.events))

    def simulate(self, delta: Program, sit: Situation, env: Optional[Mapping[str, Value]] = None,
                 trace: bool = False) -> ExecOutcome:
        """Hypothetical execution; identical to :meth:`execute` (situations are immutable)."""
        return self.execute(delta, sit, env, trace)

    # internals

    def _ground(self, p: Prim, state: State, env: dict) -> GroundAction:
        return GroundAction(p.name, tuple(self.evaluator.compile(a, frozenset(env))(env, state) for a in p.args))

    def _truth(self, cond: Expr, state: State, env: dict) -> bool:
        v = self.evaluator.compile(cond, frozenset(env))(env, state)
        if not isinstance(v, bool):
            raise SortMismatch("test condition is not boolean")
        return v

    def _candidates(self, p: ArgChoice, state: State, env: dict) -> list[Value]:
        dom = self.evaluator.compile(p.domain, frozenset(env))(env, state)
        if not isinstance(dom, frozenset):
            raise QuantifierDomainNotSet(f"pick domain is not a set: {dom!r}")
        key = self.evaluator.compile(p.key, frozenset(env) | {p.var})
        keyed = []
        for v in dom:
            inner = dict(env)
            inner[p.var] = v
            keyed.append((value_key(key(inner, state)), value_key(v), v))
        keyed.sort(key=lambda t: (t[0], t[1]))
        return [v for _, _, v in keyed]

    def _label(self, cond: Expr) -> str:
        key = id(cond)
        if key not in self._labels:
            self._labels[key] = print_expr(cond)
        return self._labels[key]

    def format_value(self, v: Value) -> str:
        return format_value(v, self.names)

    def format_action(self, a: GroundAction) -> str:
        if not a.args:
            return a.name
        return a.name + "(" + ", ".join(self.format_value(x) for x in a.args) + ")"

    def _run(self, p: Program, state: State, env: dict, trace: bool) -> _Run:
        if not trace:
            key = (id(p), state, frozenset(env.items()))
            hit = self._memo.get(key)
            if hit is not None and hit[0] is p:
                return hit[1]
            result = self._run_uncached(p, state, env, False)
            if len(self._memo) > 500_000:
                self._memo.clear()
            self._memo[key] = (p, result)
            return result
        return self._run_uncached(p, state, env, True)

    def _run_uncached(self, p: Program, state: State, env: dict, trace: bool) -> _Run:
        if isinstance(p, Prim):
            proc = self.spec.proc(p.name)
            if proc is not None and self.spec.action(p.name) is None:
                return self._run(proc.body, state, {}, trace)
            action = self._ground(p, state, env)
            if not self._poss_state(action, state):
                reason = f"precondition of {self.format_action(action)} is false"
                return _Run(None, (), (TraceEvent("Failure", (("reason", reason),)),) if trace else (), reason)
            ev = (TraceEvent("PrimExecuted", (("action", self.format_action(action)),)),) if trace else ()
            return _Run(self._successor(action, state), (action,), ev)

        if isinstance(p, Test):
            ok = self._truth(p.cond, state, env)
            if ok:
                ev = (TraceEvent("TestPassed", (("test", self._label(p.cond)),)),) if trace else ()
                return _Run(state, (), ev)
            reason = f"test failed: {self._label(p.cond)}"
            ev = (TraceEvent("TestFailed", (("test", self._label(p.cond)),)),
                  TraceEvent("Failure", (("reason", reason),))) if trace else ()
            return _Run(None, (), ev, reason)

        if isinstance(p, Seq):
            first = self._run(p.first, state, env, trace)
            if first.state is None:
                return first
            second = self._run(p.second, first.state, env, trace)
            if second.state is None:
                return _Run(None, (), first.events + second.events, second.reason)
            return _Run(second.state, first.actions + second.actions, first.events + second.events)

        if isinstance(p, Choice):
            left = self._run(p.first, state, env, trace)
            if left.state is not None:
                ev = (TraceEvent("ChoiceBranch", (("branch", "left"),)),) if trace else ()
                return _Run(left.state, left.actions, ev + left.events)
            right = self._run(p.second, state, env, trace)
            if right.state is not None:
                ev = (TraceEvent("ChoiceBranch", (("branch", "right"),)),) if trace else ()
                return _Run(right.state, right.actions, ev + right.events)
            reason = "no branch of the choice is possible"
            return _Run(None, (), (TraceEvent("Failure", (("reason", reason),)),) if trace else (), reason)

        if isinstance(p, ArgChoice):
            for v in self._candidates(p, state, env):
                inner = dict(env)
                inner[p.var] = v
                body = self._run(p.body, state, inner, trace)
                if body.state is not None:
                    ev = (TraceEvent("ArgChosen", (("var", p.var), ("value", self.format_value(v)))),) \
                        if trace else ()
                    return _Run(body.state, body.actions, ev + body.events)
            reason = f"no value of {p.var} makes the pick possible"
            return _Run(None, (), (TraceEvent("Failure", (("reason", reason),)),) if trace else (), reason)

        if isinstance(p, Iter):
            actions: tuple[GroundAction, ...] = ()
            events: tuple[TraceEvent, ...] = ()
            count = 0
            cur = state
            while True:
                self._steps += 1
                if self._steps > self.budget:
                    raise IterationBudgetExceeded(f"iteration budget of {self.budget} exhausted")
                body = self._run(p.body, cur, env, trace)
                if body.state is None:
                    break
                if body.state == cur:
                    # deterministic body, same input: it would repeat forever
                    raise IterationBudgetExceeded("iteration makes no progress and would never stop")
                cur = body.state
                actions += body.actions
                events += body.events
                count += 1
            if trace:
                events += (TraceEvent("IterCount", (("count", count),)),)
            return _Run(cur, actions, events)

        raise TypeError(f"not a program: {p!r}")


def trace_json(event: TraceEvent) -> dict:
    return {"kind": event.kind, **event.as_dict()}


def df_json(sit: Situation) -> dict:
    return {name: to_json(v) for name, v in sit.state.items()}
