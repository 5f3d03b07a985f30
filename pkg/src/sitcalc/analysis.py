"""Fluent dependency analysis.

The derivation graph has one node per fluent plus a synthetic node for every
action precondition (``poss:<action>``), every declared test
(``test:<name>``), the validity check used by policies (``test:validity``),
and every inline test, pick domain/key or action argument found in
procedures and policies (``test:<owner>#<k>``).  Each node owns a list of
seed sets: sets of fluents it can be computed from.

From the graph we compute the precondition fluent base (every fluent that
feeds some synthetic node) and a decisive set: a subset of it from which
everything else can be derived, and from which nothing can be dropped.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import Diagnostic
from .model import DomainSpec
from .nodes import program_exprs

DECISIVE = "decisive"
NON_DECISIVE = "non-decisive"
STANDING = "standing"


@dataclass
class DerivationGraph:
    fluents: list[str] = field(default_factory=list)
    synthetic: list[str] = field(default_factory=list)
    seeds: dict[str, list[frozenset[str]]] = field(default_factory=dict)
    stored: set[str] = field(default_factory=set)

    @property
    def nodes(self) -> list[str]:
        return self.fluents + self.synthetic

    def is_atomic(self, fluent: str) -> bool:
        return not self.seeds.get(fluent)

    def dependents(self, fluent: str) -> int:
        return sum(1 for n in self.nodes for s in self.seeds.get(n, ()) if fluent in s)


@dataclass
class DecisiveReport:
    pfb: frozenset[str]
    df: list[str]
    marks: dict[str, str]
    closedness: list[Diagnostic] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "pfb": sorted(self.pfb),
            "df": list(self.df),
            "marks": dict(sorted(self.marks.items())),
            "closedness": [
                {"code": d.code, "severity": d.severity, "message": d.message} for d in self.closedness
            ],
        }


def build_graph(spec: DomainSpec) -> DerivationGraph:
    g = DerivationGraph()
    for f in spec.fluents:
        g.fluents.append(f.name)
        seeds: list[frozenset[str]] = []
        if f.derived:
            seeds.append(spec.fluents_in(f.definition, frozenset(p.name for p in f.params)))
        else:
            g.stored.add(f.name)
        for d in spec.derivations_of(f.name):
            seeds.append(spec.fluents_in(d.expr, frozenset(d.params)))
        g.seeds[f.name] = seeds

    def synthetic(name: str, mentions: Iterable[str]) -> None:
        g.synthetic.append(name)
        g.seeds[name] = [frozenset(mentions)]

    for a in spec.actions:
        synthetic(f"poss:{a.name}", spec.fluents_in(a.pre, frozenset(p.name for p in a.params)))
    for t in spec.tests:
        synthetic(f"test:{t.name}", spec.fluents_in(t.body, frozenset(p.name for p in t.params)))
    if spec.validity is not None and spec.policies:
        synthetic("test:validity", [spec.validity] if spec.fluent(spec.validity) else [])

    owners = [(f"proc:{p.name}", (p.body,)) for p in spec.procs]
    owners += [(f"policy:{b.kind}", tuple(x for x in (b.raw, b.supplement, b.altern) if x is not None))
               for b in spec.policies]
    for owner, programs in owners:
        k = 0
        for prog in programs:
            for _, expr, bound in program_exprs(prog):
                mentions = spec.fluents_in(expr, bound)
                if mentions:
                    synthetic(f"test:{owner}#{k}", mentions)
                    k += 1
    return g


def compute_pfb(graph: DerivationGraph) -> frozenset[str]:
    """Fluents reachable from any synthetic node through seed sets."""
    seen: set[str] = set()
    todo = deque(graph.synthetic)
    while todo:
        node = todo.popleft()
        for seed in graph.seeds.get(node, ()):
            for f in seed:
                if f not in seen:
                    seen.add(f)
                    todo.append(f)
    return frozenset(seen)


def closure(graph: DerivationGraph, base: Iterable[str]) -> set[str]:
    """Every node computable from ``base`` by repeatedly applying seed sets."""
    known = set(base)
    changed = True
    while changed:
        changed = False
        for node in graph.nodes:
            if node not in known and any(seed <= known for seed in graph.seeds.get(node, ())):
                known.add(node)
                changed = True
    return known


def _covers(graph: DerivationGraph, pfb: frozenset[str], df: Iterable[str]) -> bool:
    got = closure(graph, df)
    return pfb <= got and all(s in got for s in graph.synthetic)


def verify_minimal(graph: DerivationGraph, pfb: frozenset[str], df: Iterable[str]) -> list[str]:
    """Problems with ``df`` as a decisive set; empty means it is sufficient and minimal."""
    df = list(df)
    problems: list[str] = []
    outside = [f for f in df if f not in pfb]
    if outside:
        problems.append(f"not in PFB: {', '.join(outside)}")
    got = closure(graph, df)
    missing = sorted((pfb | set(graph.synthetic)) - got)
    if missing:
        problems.append(f"not derivable: {', '.join(missing)}")
    for f in df:
        rest = [x for x in df if x != f]
        if f in closure(graph, rest):
            problems.append(f"redundant: {f} is derivable from the others")
    return problems


def compute_decisive_set(graph: DerivationGraph, pfb: Optional[frozenset[str]] = None) -> DecisiveReport:
    if pfb is None:
        pfb = compute_pfb(graph)
    marks: dict[str, str] = {}

    # step 1
    for node in graph.synthetic:
        marks[node] = STANDING

    # step 2: walk seed sets outwards from the standing nodes
    queue = deque(sorted(graph.synthetic))
    expanded: set[str] = set()
    while queue:
        node = queue.popleft()
        if node in expanded:
            continue
        expanded.add(node)
        for seed in graph.seeds.get(node, ()):
            for f in sorted(seed):
                if graph.is_atomic(f):
                    marks[f] = DECISIVE
                else:
                    marks.setdefault(f, NON_DECISIVE)
                    queue.append(f)

    order = {name: i for i, name in enumerate(graph.fluents)}
    df = {f for f, m in marks.items() if m == DECISIVE}

    # step 3: promote until every non-decisive fluent derives from the decisive ones
    while not _covers(graph, pfb, df):
        got = closure(graph, df)
        candidates = [f for f in pfb if f not in df and f not in got]
        best = min(candidates, key=lambda f: (f not in graph.stored, graph.dependents(f), f))
        df.add(best)
        marks[best] = DECISIVE

    # drop members the rest already derives; derived ones are tried first
    for f in sorted(df, key=lambda f: (graph.is_atomic(f), f in graph.stored, -order.get(f, 0))):
        if graph.is_atomic(f):
            continue
        rest = df - {f}
        if _covers(graph, pfb, rest):
            df = rest
            marks[f] = NON_DECISIVE

    return DecisiveReport(pfb=pfb, df=sorted(df, key=lambda f: order.get(f, len(order))), marks=marks)


def check_closedness(spec: DomainSpec, df: Iterable[str]) -> list[Diagnostic]:
    """Check that successor rules of ``df`` fluents read only ``df`` fluents."""
    df = set(df)
    out: list[Diagnostic] = []
    for f in spec.fluents:
        if f.name not in df or f.derived:
            continue
        scope = frozenset(p.name for p in f.params)
        for r in f.rules:
            if r.unchanged:
                continue
            reads = spec.fluents_in(r.expr, scope | frozenset(r.params))
            stray = sorted(reads - df)
            if stray:
                out.append(Diagnostic(
                    "NotClosed",
                    f"rule {f.name} after {r.action} reads {', '.join(stray)}, outside the decisive set",
                    span=f.span))
            elif reads <= {f.name}:
                out.append(Diagnostic(
                    "Incremental", f"rule {f.name} after {r.action} is incremental", "info", span=f.span))
    return out


def analyze(spec: DomainSpec) -> DecisiveReport:
    graph = build_graph(spec)
    report = compute_decisive_set(graph, compute_pfb(graph))
    report.closedness = check_closedness(spec, report.df)
    return report

