"""Result records: JSON for machines, indented text for people."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from . import concrete as C
from . import smtlib
from .logic import Formula, render_formula
from .net import instantiate
from .smt import QE_TACTIC
from .symbolic import concretize


def solution_trace(solution, net, solver, init, global_time: bool = False):
    """Concretize a symbolic solution and replay it through the concrete
    R1 semantics: (valuation, Trace or None, ok)."""
    valuation, events, _ = concretize(solution, net, solver, init)
    ground = instantiate(net, valuation) if net.params else net
    start = C.initial_state(ground, mode=C.R2 if global_time else C.R1)
    try:
        trace = C.replay(start, events, ground)
    except C.NotApplicable:
        return valuation, None, False
    return valuation, trace, C.verify_trace(trace, ground)


@dataclass
class Report:
    kind: str
    model: str
    engine: str
    verdict: str = "inconclusive"
    conclusive: bool = False
    constraint: Optional[Formula] = None
    status: str = ""
    params: tuple = ()
    trace: list = field(default_factory=list)
    events: list = field(default_factory=list)
    valuation: dict = field(default_factory=dict)
    replayed: Optional[bool] = None
    lasso: Optional[dict] = None
    stats: dict = field(default_factory=dict)
    reason: str = ""
    tactic: str = QE_TACTIC

    # -- filling in

    def add_search(self, res):
        st = res.stats
        self.stats.update(states=st.states, generated=st.generated, subsumed=st.subsumed,
                          unknown=st.unknown, depth=st.depth, complete=res.complete)
        if getattr(res, "visited", None):
            self.stats["visited"] = res.visited

    def attach_solution(self, solution, net, solver, init, global_time=False):
        valuation, trace, ok = solution_trace(solution, net, solver, init, global_time)
        self.valuation = {k: str(v) for k, v in valuation.items()}
        self.replayed = ok
        if trace is not None:
            self.events = [[k, str(a)] for k, a in trace.events]
            self.trace = trace.render(instantiate(net, valuation) if net.params else net)

    def synthesis(self, res):
        self.constraint = res.constraint
        self.status = res.status
        self.params = tuple(getattr(v, "name", str(v)) for v in res.params)
        self.reason = res.reason
        for s in res.searches:
            self.add_search(s)
        self.stats["iterations"] = res.iterations
        self.stats["witnesses"] = len(res.witnesses)
        # an under-approximation is still a verdict for EF; an unknown is not
        self.conclusive = res.status != "unknown"
        self.verdict = "synthesized" if self.conclusive else "inconclusive"

    # -- output

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "model": self.model,
            "engine": self.engine,
            "verdict": self.verdict,
            "conclusive": self.conclusive,
            "stats": self.stats,
        }
        if self.constraint is not None:
            d["constraint"] = smtlib.formula(self.constraint)
            d["constraint_infix"] = render_formula(self.constraint)
            d["status"] = self.status
            d["params"] = list(self.params)
            d["tactic"] = self.tactic
        if self.valuation:
            d["valuation"] = self.valuation
        if self.events:
            d["events"] = self.events
        if self.trace:
            d["trace"] = self.trace
        if self.replayed is not None:
            d["replayed"] = self.replayed
        if self.lasso is not None:
            d["lasso"] = self.lasso
        if self.reason:
            d["reason"] = self.reason
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def render_text(self) -> str:
        lines = [f"{self.kind} on {self.model} ({self.engine}): {self.verdict}"]
        if self.constraint is not None:
            lines.append(f"  constraint [{self.status}]: {render_formula(self.constraint)}")
        if self.valuation:
            vals = ", ".join(f"{k} = {v}" for k, v in sorted(self.valuation.items()))
            lines.append(f"  valuation: {vals}")
        if self.trace:
            lines.append("  trace:")
            lines.extend("  " + t for t in self.trace)
        if self.replayed is not None:
            lines.append(f"  witness replays concretely: {'yes' if self.replayed else 'NO'}")
        if self.lasso is not None:
            lines.append(f"  lasso stem: {', '.join(self.lasso['stem']) or '-'}")
            lines.append(f"  lasso cycle: {', '.join(self.lasso['cycle']) or '-'}")
        if self.reason:
            lines.append(f"  reason: {self.reason}")
        stats = ", ".join(f"{k} {v}" for k, v in self.stats.items())
        lines.append(f"  stats: {stats}")
        return "\n".join(lines)

    def render(self, fmt: str = "text") -> str:
        return self.to_json() if fmt == "json" else self.render_text()
