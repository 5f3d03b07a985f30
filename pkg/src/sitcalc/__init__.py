"""A deterministic situation-calculus engine.

Domains are written in a small text language, analysed for the fluents that
decide every precondition, executed as deterministic complex actions, and
served through a validity-preserving request policy.
"""

from __future__ import annotations

from .analysis import analyze
from .errors import Diagnostic, DomainSyntaxError, SitCalcError, SpecError
from .interpreter import Engine, GroundAction, Situation
from .parser import parse_domain, parse_expr, parse_program, parse_scenario
from .printer import print_domain
from .validate import validate_domain
from .validity import Branch, Outcome, valid_service

__version__ = "0.1.0"

__all__ = [
    "Branch", "Diagnostic", "DomainSyntaxError", "Engine", "GroundAction", "Outcome", "SitCalcError",
    "Situation", "SpecError", "analyze", "parse_domain", "parse_expr", "parse_program", "parse_scenario",
    "print_domain", "valid_service", "validate_domain",
]
