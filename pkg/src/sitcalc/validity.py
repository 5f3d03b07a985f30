"""Situation validity and the validity-assured service policy.

A request is served by trying candidate complex actions in a fixed order
(raw, raw followed by the supplement, the alternative, the alternative
followed by the supplement) and committing the first one whose execution
succeeds and ends in a valid situation.  If none does, the request is
rejected and the situation is left as it was.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import MissingAltern, MissingSupplement, PolicyError, UnknownPolicy
from .interpreter import Engine, Situation, TraceEvent
from .model import PolicyBinding, Request
from .nodes import Program, Seq
from .values import Value


class Branch(str, enum.Enum):
    RAW = "Raw"
    RAW_PLUS_SUPPLEMENT = "RawPlusSupplement"
    ALTERN = "Altern"
    ALTERN_PLUS_SUPPLEMENT = "AlternPlusSupplement"
    REJECTED = "Rejected"

    def __str__(self) -> str:
        return self.value


@dataclass
class Outcome:
    branch: Branch
    situation: Situation
    trace: list[TraceEvent] = field(default_factory=list)


def situation_valid(engine: Engine, sit: Situation) -> bool:
    name = engine.spec.validity
    if name is None:
        raise PolicyError("the domain declares no validity fluent")
    return engine.eval_fluent(name, (), sit) is True


def action_valid(engine: Engine, delta: Program, sit: Situation,
                 env: Optional[dict[str, Value]] = None) -> bool:
    """Predicted validity: simulate ``delta`` and test the resulting situation."""
    out = engine.simulate(delta, sit, env)
    return out.success and situation_valid(engine, out.situation)


# composed candidates are cached so that repeated requests reuse the
# engine's memo (which is keyed on program identity)
_composed: dict[tuple[int, str], tuple[PolicyBinding, Program]] = {}


def _compose(binding: PolicyBinding, which: str) -> Program:
    key = (id(binding), which)
    hit = _composed.get(key)
    if hit is not None and hit[0] is binding:
        return hit[1]
    first = binding.raw if which == "raw" else binding.altern
    prog = Seq(first, binding.supplement)
    _composed[key] = (binding, prog)
    return prog


def _candidates(binding: PolicyBinding, order: Sequence[Branch]) -> list[tuple[Branch, Optional[Program]]]:
    out: list[tuple[Branch, Optional[Program]]] = []
    for b in order:
        if b is Branch.RAW:
            out.append((b, binding.raw))
        elif b is Branch.RAW_PLUS_SUPPLEMENT:
            out.append((b, _compose(binding, "raw") if binding.supplement is not None else None))
        elif b is Branch.ALTERN:
            out.append((b, binding.altern))
        elif b is Branch.ALTERN_PLUS_SUPPLEMENT:
            ok = binding.altern is not None and binding.supplement is not None
            out.append((b, _compose(binding, "altern") if ok else None))
    return out


def _serve(engine: Engine, binding: PolicyBinding, args: Sequence[Value], sit: Situation,
           order: Sequence[Branch], trace: bool) -> Outcome:
    if len(args) != len(binding.params):
        raise PolicyError(f"policy {binding.kind} takes {len(binding.params)} argument(s), got {len(args)}")
    env = {p.name: v for p, v in zip(binding.params, args)}
    events: list[TraceEvent] = []
    for branch, prog in _candidates(binding, order):
        if prog is None:
            if trace:
                events.append(TraceEvent("Candidate", (("branch", branch.value), ("result", "absent"))))
            continue
        run = engine.execute(prog, sit, env, trace=trace)
        valid = run.success and situation_valid(engine, run.situation)
        if trace:
            result = "valid" if valid else ("invalid" if run.success else "impossible")
            events.append(TraceEvent("Candidate", (("branch", branch.value), ("result", result))))
        if valid:
            return Outcome(branch, run.situation, events + run.trace)
    if trace:
        label = binding.reject_label or f"{binding.kind} rejected"
        events.append(TraceEvent("Reject", (("label", label),)))
    return Outcome(Branch.REJECTED, sit, events)


def valid_reject(engine: Engine, binding: PolicyBinding, args: Sequence[Value], sit: Situation,
                 trace: bool = True) -> Outcome:
    return _serve(engine, binding, args, sit, (Branch.RAW,), trace)


def valid_supplement(engine: Engine, binding: PolicyBinding, args: Sequence[Value], sit: Situation,
                     trace: bool = True) -> Outcome:
    if binding.supplement is None:
        raise MissingSupplement(f"policy {binding.kind} has no supplement")
    return _serve(engine, binding, args, sit, (Branch.RAW, Branch.RAW_PLUS_SUPPLEMENT), trace)


def valid_substitute(engine: Engine, binding: PolicyBinding, args: Sequence[Value], sit: Situation,
                     trace: bool = True) -> Outcome:
    if binding.altern is None:
        raise MissingAltern(f"policy {binding.kind} has no alternative")
    return _serve(engine, binding, args, sit, (Branch.RAW, Branch.ALTERN), trace)


SERVICE_ORDER = (Branch.RAW, Branch.RAW_PLUS_SUPPLEMENT, Branch.ALTERN, Branch.ALTERN_PLUS_SUPPLEMENT)


def valid_service(engine: Engine, binding: PolicyBinding, args: Sequence[Value], sit: Situation,
                  trace: bool = True) -> Outcome:
    """Full policy; candidates missing from the binding are skipped."""
    return _serve(engine, binding, args, sit, SERVICE_ORDER, trace)


def serve(engine: Engine, request: Request, sit: Situation, trace: bool = True) -> Outcome:
    binding = engine.spec.policy(request.kind)
    if binding is None:
        raise UnknownPolicy(f"no policy for request kind '{request.kind}'")
    return valid_service(engine, binding, request.args, sit, trace)


def run_scenario(engine: Engine, requests: Sequence[Request], sit: Optional[Situation] = None,
                 trace: bool = True) -> list[Outcome]:
    sit = engine.initial() if sit is None else sit
    out = []
    for r in requests:
        o = serve(engine, r, sit, trace)
        out.append(o)
        sit = o.situation
    return out
