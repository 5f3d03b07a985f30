"""JSONL traces of scenario runs.

The first line is a header naming the schema and its version.  Every other
line is one event with the keys ``seq``, ``kind``, and where relevant
``request``, ``branch``, ``df_before``, ``df_after`` and ``detail``.  Sets are
written as sorted arrays, so traces are byte-stable across runs.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator, Optional, Sequence, TextIO

from .interpreter import Engine, Situation, df_json
from .model import Request
from .validity import Outcome, serve

SCHEMA = "sitcalc-trace"
VERSION = 1


def request_label(engine: Engine, request: Request) -> str:
    if not request.args:
        return request.kind
    return request.kind + " " + ", ".join(engine.format_value(a) for a in request.args)


def header(domain: Optional[str] = None) -> dict:
    out = {"schema": SCHEMA, "version": VERSION}
    if domain is not None:
        out["domain"] = domain
    return out


def _event(seq: int, kind: str, request: Optional[str] = None, branch: Optional[str] = None,
           df_before: Optional[dict] = None, df_after: Optional[dict] = None,
           detail: Optional[dict] = None) -> dict:
    out: dict = {"seq": seq, "kind": kind}
    if request is not None:
        out["request"] = request
    if branch is not None:
        out["branch"] = branch
    if df_before is not None:
        out["df_before"] = df_before
    if df_after is not None:
        out["df_after"] = df_after
    out["detail"] = detail or {}
    return out


def scenario_events(engine: Engine, requests: Sequence[Request],
                    sit: Optional[Situation] = None) -> Iterator[tuple[dict, Optional[Outcome]]]:
    """Serve ``requests`` in order, yielding trace records as they happen.

    Each record is paired with the request's outcome on the closing
    ``Outcome`` record and ``None`` elsewhere.
    """
    sit = engine.initial() if sit is None else sit
    seq = 0
    yield _event(seq, "Initial", df_after=df_json(sit)), None
    for r in requests:
        label = request_label(engine, r)
        seq += 1
        yield _event(seq, "Request", label, df_before=df_json(sit)), None
        outcome = serve(engine, r, sit)
        for ev in outcome.trace:
            seq += 1
            yield _event(seq, ev.kind, label, detail=ev.as_dict()), None
        seq += 1
        yield _event(seq, "Outcome", label, outcome.branch.value, df_json(sit), df_json(outcome.situation)), outcome
        sit = outcome.situation


def dumps(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False)


def write_trace(engine: Engine, requests: Sequence[Request], out: TextIO,
                domain: Optional[str] = None) -> list[Outcome]:
    out.write(dumps(header(domain)) + "\n")
    outcomes = []
    for record, outcome in scenario_events(engine, requests):
        out.write(dumps(record) + "\n")
        if outcome is not None:
            outcomes.append(outcome)
    return outcomes


def read_trace(lines: Iterable[str]) -> tuple[dict, list[dict]]:
    """Parse a trace; returns the header and the event records."""
    records = [json.loads(line) for line in lines if line.strip()]
    if not records or records[0].get("schema") != SCHEMA:
        raise ValueError("not a trace: missing header line")
    if records[0].get("version") != VERSION:
        raise ValueError(f"unsupported trace version {records[0].get('version')}")
    return records[0], records[1:]
