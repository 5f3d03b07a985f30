"""Command-line interface.

Exit codes: 0 success, 1 parse or validation failure (and ``fmt --check``
finding a difference), 2 runtime failure, 3 counterexample found by
``check``.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .analysis import analyze, build_graph, verify_minimal
from .errors import DomainSyntaxError, SitCalcError, SpecError
from .interpreter import DEFAULT_BUDGET, Engine
from .oracle import check_composition_rules, check_markov
from .parser import parse_domain, parse_scenario
from .printer import print_domain
from .trace import dumps, header, scenario_events
from .validate import validate_domain

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME, EXIT_COUNTEREXAMPLE = 0, 1, 2, 3
BUDGET_ENV = "SITCALC_BUDGET"


@dataclass
class RunConfig:
    domain: Path
    scenario: Optional[Path] = None
    output: Optional[Path] = None
    budget: int = DEFAULT_BUDGET
    depth: int = 2
    samples: int = 200
    seed: int = 42
    cases: int = 1000
    format: str = "text"
    check: bool = False

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        _err(f"error: cannot read {path}: {exc.strerror or exc}")
        return None
    try:
        return parse_domain(text, str(path))
    except DomainSyntaxError as exc:
        for d in exc.diagnostics:
            _err(str(d))
        return None


def _valid(spec) -> bool:
    ok = True
    for d in validate_domain(spec):
        if d.is_error:
            _err(str(d))
            ok = False
    return ok


def _open_out(cfg: RunConfig):
    return open(cfg.output, "w", encoding="utf-8") if cfg.output else sys.stdout


def cmd_run(cfg: RunConfig) -> int:
    spec = _load(cfg.domain)
    if spec is None or not _valid(spec):
        return EXIT_INPUT
    if cfg.scenario is None:
        _err("error: run needs a scenario file")
        return EXIT_INPUT
    try:
        requests = parse_scenario(cfg.scenario.read_text(), spec, str(cfg.scenario))
    except OSError as exc:
        _err(f"error: cannot read {cfg.scenario}: {exc.strerror or exc}")
        return EXIT_INPUT
    except DomainSyntaxError as exc:
        for d in exc.diagnostics:
            _err(str(d))
        return EXIT_INPUT
    try:
        engine = Engine(spec, budget=cfg.budget)
    except SpecError as exc:
        for d in exc.diagnostics:
            _err(str(d))
        return EXIT_INPUT
    out = _open_out(cfg)
    try:
        if cfg.format == "jsonl":
            out.write(dumps(header(cfg.domain.name)) + "\n")
        for record, outcome in scenario_events(engine, requests):
            if cfg.format == "jsonl":
                out.write(dumps(record) + "\n")
            elif outcome is not None:
                df = ", ".join(f"{k} = {engine.format_value(v)}" for k, v in outcome.situation.state.items())
                out.write(f"{record['request']}: {outcome.branch.value}  ->  {df}\n")
    except SitCalcError as exc:
        _err(f"error: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_analyze(cfg: RunConfig) -> int:
    spec = _load(cfg.domain)
    if spec is None or not _valid(spec):
        return EXIT_INPUT
    report = analyze(spec)
    problems = verify_minimal(build_graph(spec), report.pfb, report.df)
    if cfg.format == "jsonl":
        data = report.to_json()
        data["minimal"] = not problems
        print(json.dumps(data))
    else:
        print("PFB: " + ", ".join(sorted(report.pfb)))
        print("DF:  " + ", ".join(report.df))
        print("marks:")
        for name, mark in sorted(report.marks.items()):
            print(f"  {name}: {mark}")
        print("minimal: " + ("yes" if not problems else "no (" + "; ".join(problems) + ")"))
        for d in report.closedness:
            print(f"{d.severity}: {d.code}: {d.message}")
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    spec = _load(cfg.domain)
    if spec is None or not _valid(spec):
        return EXIT_INPUT
    try:
        # closedness is what the oracle tests, so it is not a load-time gate here
        reports = [check_markov(spec, cfg.samples, cfg.depth, cfg.seed, require_closed=False),
                   check_composition_rules(spec, cfg.cases, cfg.seed)]
    except SpecError as exc:
        for d in exc.diagnostics:
            _err(str(d))
        return EXIT_INPUT
    except SitCalcError as exc:
        _err(f"error: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    for r in reports:
        print(json.dumps(r.to_json()) if cfg.format == "jsonl" else str(r))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_COUNTEREXAMPLE


def cmd_fmt(cfg: RunConfig) -> int:
    spec = _load(cfg.domain)
    if spec is None:
        return EXIT_INPUT
    text = print_domain(spec)
    if cfg.check:
        if cfg.domain.read_text() != text:
            _err(f"{cfg.domain}: not in canonical form")
            return EXIT_INPUT
        return EXIT_OK
    out = _open_out(cfg)
    try:
        out.write(text)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_BUDGET


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sitcalc",
        description="Run, analyze, check and format situation-calculus domains.",
        epilog="Exit codes: 0 ok, 1 parse/validation failure, 2 runtime failure, 3 counterexample.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("domain", type=Path, help="domain file")
        sp.add_argument("--format", choices=("text", "jsonl"), default="text", help="output format")
        return sp

    run = common(sub.add_parser("run", help="serve a scenario through the validity policy",
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter))
    run.add_argument("scenario", type=Path, help="scenario file (one request per line)")
    run.add_argument("-o", "--output", type=Path, help="write the trace here instead of stdout")
    run.add_argument("--budget", type=_positive, default=_default_budget(),
                     help=f"iteration budget (default from ${BUDGET_ENV} if set)")

    common(sub.add_parser("analyze", help="print the fluent base, decisive set and closedness",
                          formatter_class=argparse.ArgumentDefaultsHelpFormatter))

    chk = common(sub.add_parser("check", help="search for counterexamples to the decisive-set properties",
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter))
    chk.add_argument("--depth", type=_non_negative, default=2, help="program depth")
    chk.add_argument("--samples", type=_positive, default=200, help="sampled histories")
    chk.add_argument("--seed", type=int, default=42, help="random seed")
    chk.add_argument("--cases", type=_positive, default=1000, help="composition-law cases")

    fmt = sub.add_parser("fmt", help="print a domain in canonical form",
                         formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    fmt.add_argument("domain", type=Path, help="domain file")
    fmt.add_argument("--check", action="store_true", help="exit 1 if the file is not canonical")
    fmt.add_argument("-o", "--output", type=Path, help="write here instead of stdout")
    return p


COMMANDS = {"run": cmd_run, "analyze": cmd_analyze, "check": cmd_check, "fmt": cmd_fmt}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**fields)
    return COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
