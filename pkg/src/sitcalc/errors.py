from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start: int
    end: int
    line: int
    column: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start after end")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    severity: str = "error"  # error | warning | info
    span: Optional[SourceSpan] = field(default=None, compare=False)

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.severity}: {self.code}: {self.message}"


class SitCalcError(Exception):
    """Base class for everything the engine raises."""


class DomainSyntaxError(SitCalcError):
    """Raised by the parsers; carries every diagnostic collected."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics) or "syntax error")

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


class SpecError(SitCalcError):
    """The domain cannot be loaded into an engine (validation errors)."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class EvalError(SitCalcError):
    code = "EvalError"


class UnboundVariable(EvalError):
    code = "UnboundVariable"


class SortMismatch(EvalError):
    code = "SortMismatch"


class UnknownFluent(EvalError):
    code = "UnknownFluent"


class QuantifierDomainNotSet(EvalError):
    code = "QuantifierDomainNotSet"


class ArgumentOutOfDomain(EvalError):
    code = "ArgumentOutOfDomain"


class PreconditionViolated(SitCalcError):
    pass


class IterationBudgetExceeded(SitCalcError):
    pass


class BudgetExceeded(SitCalcError):
    """An oracle enumeration grew past its configured cap."""


class PolicyError(SitCalcError):
    pass


class UnknownPolicy(PolicyError):
    pass


class MissingSupplement(PolicyError):
    pass


class MissingAltern(PolicyError):
    pass
