"""The bundled calendar domain and its reference scenario."""

from __future__ import annotations

import functools
from pathlib import Path
from typing import Optional

from .interpreter import Engine, Situation
from .model import DomainSpec, Request
from .parser import parse_domain, parse_expr, parse_scenario
from .validity import Outcome, run_scenario
from .values import Record, Value, sorted_values

DOMAIN_DIR = Path(__file__).parent / "domains"
ACS_DOMAIN = DOMAIN_DIR / "acs.domain"
ACS_SCENARIO = DOMAIN_DIR / "acs.scen"
BLOCKS_DOMAIN = DOMAIN_DIR / "blocks.domain"
LOOP_DOMAIN = DOMAIN_DIR / "loop.domain"

# an event in the temporary list could be moved to the agenda right away
_PROMOTABLE = parse_expr(
    "not collide_with_list(ev, agenda_list) and "
    "(not collide_with_list(ev, tempagn_list) or highest_prio(ev, collide_sublist(ev, tempagn_list)))"
)


@functools.lru_cache(maxsize=None)
def acs_spec() -> DomainSpec:
    return parse_domain(ACS_DOMAIN.read_text(), str(ACS_DOMAIN.name))


@functools.lru_cache(maxsize=None)
def acs_engine() -> Engine:
    return Engine(acs_spec())


def acs_requests(text: Optional[str] = None) -> list[Request]:
    text = ACS_SCENARIO.read_text() if text is None else text
    return parse_scenario(text, acs_spec(), ACS_SCENARIO.name)


def run_reference_scenario(trace: bool = True) -> list[Outcome]:
    engine = acs_engine()
    return run_scenario(engine, acs_requests(), trace=trace)


def event(ident: str, start: int, end: int, priority: int = 1, description: str = "") -> Record:
    if start >= end:
        raise ValueError("an event must end after it starts")
    return Record("event", (("id", ident), ("start_time", start), ("end_time", end),
                            ("priority", priority), ("description", description)))


def promotable(engine: Engine, sit: Situation) -> list[Value]:
    """Events of the temporary list the supplement would still promote."""
    return [ev for ev in sorted_values(sit["tempagn_list"])
            if engine.eval(_PROMOTABLE, sit, {"ev": ev}) is True]
