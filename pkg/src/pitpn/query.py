"""Query files and their execution.

A query file is a list of ``key: value`` lines (``#`` starts a comment)::

    kind: ef-synth
    init: a >= 0
    goal: not k-safe(1)
    engine: folded
    timeout: 60

Inline queries separate lines with ``;``.  Recognised keys:

=================  ==========================================================
kind               simulate, search-ef, check-ag, mc-ltl, ef-synth, ag-synth,
                   ef-timed, bounded-response
init               parameter constraint phi0 (default ``true``)
goal               state predicate (EF target, AG invariant, simulate stop)
formula            LTL formula for mc-ltl
engine             concrete, symbolic or folded
timeout            wall-clock budget in seconds
max-states         state budget
max-depth          depth bound (symbolic engines)
solutions          number of solutions to collect
step               time step of the concrete engine (default 1)
time-bound         global-time bound of the concrete engine
window             ``lo, hi`` global-time window for ef-timed (``inf`` allowed)
new-params         comma separated fresh real parameters used in a window
keep               comma separated variables kept in the ef-timed projection
trigger, response  phi and psi of bounded-response
bound              time bound of bounded-response
strategy           ``strategy s = prefer(t3) or-else all``
params             valuation ``a = 5, b = 7`` for the concrete engine
existential        ``yes`` asks mc-ltl whether some run satisfies the formula
steps, seed        length and RNG seed of simulate
=================  ==========================================================
"""

from __future__ import annotations

import os
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import concrete as C
from .folding import folded_search
from .logic import REAL, Var, conj
from .ltl import model_check, parse_ltl
from .net import INF, Net, NetError, instantiate
from .predicate import parse_predicate, resolver
from .report import Report
from .smt import SolverError
from .strategy import parse_strategy
from .symbolic import SolverUnknown, SymbolicEngine
from .synthesis import (
    FOLDED,
    UNFOLDED,
    SolverConfig,
    ag_synth,
    bounded_response,
    ef_synth,
    ef_timed,
)
from .syntax import SyntaxError_, parse_expr, parse_formula

KINDS = ("simulate", "search-ef", "check-ag", "mc-ltl", "ef-synth", "ag-synth",
         "ef-timed", "bounded-response")
ENGINES = ("concrete", "symbolic", "folded")
_DEFAULT_ENGINE = {
    "simulate": "concrete", "search-ef": "folded", "check-ag": "folded", "mc-ltl": "concrete",
    "ef-synth": "folded", "ag-synth": "folded", "ef-timed": "symbolic",
    "bounded-response": "folded",
}
_KEYS = {"kind", "init", "goal", "formula", "engine", "timeout", "max-states", "max-depth",
         "solutions", "step", "time-bound", "window", "new-params", "keep", "trigger",
         "response", "bound", "strategy", "params", "existential", "steps", "seed"}


class QueryError(Exception):
    """A query that cannot be run on the given net."""


@dataclass
class QueryFile:
    kind: str
    init: str = "true"
    goal: Optional[str] = None
    formula: Optional[str] = None
    engine: Optional[str] = None
    timeout: Optional[float] = None
    max_states: Optional[int] = None
    max_depth: Optional[int] = None
    solutions: Optional[int] = None
    step: Fraction = Fraction(1)
    time_bound: Optional[Fraction] = None
    window: Optional[tuple] = None
    new_params: tuple = ()
    keep: Optional[tuple] = None
    trigger: Optional[str] = None
    response: Optional[str] = None
    bound: Optional[str] = None
    strategy: Optional[str] = None
    params: dict = field(default_factory=dict)
    existential: bool = False
    steps: int = 20
    seed: int = 0

    @property
    def effective_engine(self) -> str:
        return self.engine or _DEFAULT_ENGINE[self.kind]


def _split_list(text: str) -> tuple:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def parse_query(text: str) -> QueryFile:
    lines = text.splitlines() if "\n" in text else text.split(";")
    raw = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise QueryError(f"line {n}: expected 'key: value'")
        key, value = (s.strip() for s in line.split(":", 1))
        key = key.lower()
        if key not in _KEYS:
            raise QueryError(f"line {n}: unknown key {key!r}")
        raw[key] = value
    kind = raw.pop("kind", None)
    if kind not in KINDS:
        raise QueryError(f"query kind must be one of {', '.join(KINDS)}; got {kind!r}")
    q = QueryFile(kind)
    try:
        for key, value in raw.items():
            if key in ("timeout",):
                q.timeout = float(value)
            elif key in ("max-states", "max-depth", "solutions", "steps", "seed"):
                setattr(q, key.replace("-", "_"), int(value))
            elif key == "step":
                q.step = Fraction(value)
            elif key == "time-bound":
                q.time_bound = Fraction(value)
            elif key == "window":
                parts = _split_list(value)
                if len(parts) != 2:
                    raise QueryError("window expects 'lo, hi'")
                q.window = parts
            elif key in ("new-params", "keep"):
                setattr(q, key.replace("-", "_"), _split_list(value))
            elif key == "params":
                for item in _split_list(value):
                    name, _, v = item.partition("=")
                    q.params[name.strip()] = Fraction(v.strip())
            elif key == "existential":
                q.existential = value.lower() in ("yes", "true", "1")
            elif key == "engine":
                if value not in ENGINES:
                    raise QueryError(f"engine must be one of {', '.join(ENGINES)}")
                q.engine = value
            else:
                setattr(q, key, value)
    except (ValueError, ZeroDivisionError) as exc:
        raise QueryError(f"bad value: {exc}") from None
    if q.kind == "mc-ltl" and not q.formula:
        raise QueryError("mc-ltl needs a formula")
    if q.kind == "bounded-response" and not (q.trigger and q.response and q.bound):
        raise QueryError("bounded-response needs trigger, response and bound")
    if q.kind in ("search-ef", "check-ag", "ef-synth", "ag-synth", "ef-timed") and not q.goal:
        raise QueryError(f"{q.kind} needs a goal")
    if q.kind == "ef-timed" and q.window is None:
        raise QueryError("ef-timed needs a window")
    return q


def load_query(source: str) -> QueryFile:
    """``source`` is a path to a query file or inline query text."""
    if os.path.isfile(source):
        with open(source, encoding="utf-8") as fh:
            return parse_query(fh.read())
    return parse_query(source)


# --------------------------------------------------------------------------
# execution


def _formula(text: str, net: Net, extra=()):
    resolve, call = resolver(net, extra)
    return parse_formula(text, resolve, call)


def _param_expr(text: str, net: Net, extra=()):
    if text.strip().lower() == "inf":
        return INF
    resolve, call = resolver(net, extra)
    return parse_expr(text, resolve, call)


def pick_valuation(net: Net, phi0, solver) -> dict:
    """Parameter values satisfying phi0 and the net's initial constraint."""
    if not net.params:
        return {}
    r = solver.check_sat(conj(phi0, net.init_constraint), want_model=True)
    if not r.is_sat:
        raise QueryError("no parameter valuation satisfies the initial constraint")
    return {p: Fraction(r.model.get(p, 0)) for p in net.params}


def run_query(net: Net, q: QueryFile, solver_path: Optional[str] = None,
              model_name: str = "") -> Report:
    """Execute ``q`` on ``net``; input problems raise QueryError."""
    engine = q.effective_engine
    start = time.monotonic()
    report = Report(q.kind, model_name or net.name, engine)
    config = SolverConfig(path=solver_path)
    solver = None
    try:
        solver = config.open(stats=None)
        extra = q.new_params
        phi0 = _formula(q.init, net, extra)
        strategy = parse_strategy(q.strategy, net) if q.strategy else None
        if q.kind in ("simulate", "mc-ltl") or engine == "concrete":
            _run_concrete(net, q, phi0, strategy, solver, report)
        else:
            _run_symbolic(net, q, phi0, strategy, solver, config, report, engine)
    except (SyntaxError_, NetError, ValueError) as exc:
        raise QueryError(str(exc)) from None
    except (SolverUnknown, SolverError) as exc:
        report.verdict = "inconclusive"
        report.reason = f"solver: {exc}"
    finally:
        if solver is not None:
            report.stats["solver_calls"] = solver.stats.calls
            report.stats["solver_time"] = round(solver.stats.time, 3)
            solver.close()
    report.stats["wall_time"] = round(time.monotonic() - start, 3)
    return report


def _ground(net: Net, q: QueryFile, phi0, solver):
    valuation = dict(q.params) or pick_valuation(net, phi0, solver)
    return (instantiate(net, valuation) if net.params else net), valuation


def _run_concrete(net, q, phi0, strategy, solver, report):
    ground, valuation = _ground(net, q, phi0, solver)
    report.valuation = {k: str(v) for k, v in valuation.items()}
    budget = q.max_states or 1_000_000
    needs_gt = q.time_bound is not None or bool(q.goal and "GT" in q.goal)
    init = C.initial_state(ground, mode=C.R0, global_time=needs_gt)
    cn = C.compile_net(ground)
    if q.kind == "simulate":
        rng = random.Random(q.seed)
        goal = parse_predicate(q.goal, net) if q.goal else None
        s, states, events = init, [init], []
        for _ in range(q.steps):
            if goal is not None and goal.holds(s, cn, valuation):
                break
            succ = C.sampled_successors(s, cn, q.step, strategy, q.time_bound)
            if not succ:
                break
            ev, s = rng.choice(succ)
            events.append(ev)
            states.append(s)
        report.verdict = "simulated"
        report.conclusive = True
        report.trace = C.Trace(states, events).render(cn)
        report.stats["states"] = len(states)
        return
    if q.kind == "mc-ltl":
        res = model_check(init, cn, parse_ltl(q.formula, cn.places), step=q.step,
                          strategy=strategy, max_states=budget, existential=q.existential)
        report.stats["states"] = res.states
        report.stats["product_states"] = res.product_states
        if res.holds is None:
            report.verdict, report.reason = "inconclusive", res.reason
            return
        report.verdict = "holds" if res.holds else "violated"
        report.conclusive = True
        if res.stem or res.cycle:
            report.lasso = {"stem": [f"{k} {a}" for k, a in res.stem_events],
                            "cycle": [f"{k} {a}" for k, a in res.cycle_events]}
        return
    if q.kind in ("search-ef", "check-ag"):
        pred = parse_predicate(q.goal, net).concrete(valuation)
        fn = C.search_ef if q.kind == "search-ef" else C.check_ag
        res = fn(init, cn, pred, step=q.step, time_bound=q.time_bound, strategy=strategy,
                 max_states=budget, max_depth=q.max_depth)
        report.stats["states"] = res.states
        if res.status == C.INCONCLUSIVE:
            report.verdict, report.reason = "inconclusive", "state budget or depth bound reached"
            return
        report.conclusive = True
        found = res.status == C.FOUND
        if q.kind == "search-ef":
            report.verdict = "found" if found else "not-found"
        else:
            report.verdict = "violated" if found else "holds"
        if res.trace is not None:
            report.trace = res.trace.render(cn)
            report.replayed = C.verify_trace(res.trace, cn)
        return
    raise QueryError(f"{q.kind} needs a symbolic engine")


def _run_symbolic(net, q, phi0, strategy, solver, config, report, engine):
    mode = FOLDED if engine == "folded" else UNFOLDED
    extra = q.new_params
    if q.kind in ("search-ef", "check-ag"):
        goal = parse_predicate(q.goal, net, extra)
        target = goal if q.kind == "search-ef" else goal.negated()
        needs_gt = goal.holes(net)["gt"]
        eng = SymbolicEngine(net, solver, global_clock=needs_gt, strategy=strategy)
        init = eng.init_state(phi0)
        n = q.solutions or 1
        if mode == FOLDED:
            res = folded_search(eng, init, target, n_solutions=n, max_depth=q.max_depth,
                                max_states=q.max_states, time_budget=q.timeout)
        else:
            res = eng.search(init, target, n_solutions=n, max_depth=q.max_depth,
                             max_states=q.max_states, time_budget=q.timeout)
        report.add_search(res)
        if res.solutions:
            report.conclusive = True
            report.verdict = "found" if q.kind == "search-ef" else "violated"
            report.attach_solution(res.solutions[0], net, solver, init, needs_gt)
        elif res.complete and not res.stats.unknown:
            report.conclusive = True
            report.verdict = "not-found" if q.kind == "search-ef" else "holds"
        else:
            report.verdict, report.reason = "inconclusive", res.reason or "search incomplete"
        return
    if q.kind == "ef-synth":
        goal = parse_predicate(q.goal, net, extra)
        res = ef_synth(net, phi0, goal, mode=mode, n_solutions=q.solutions,
                       max_depth=q.max_depth, max_states=q.max_states, time_budget=q.timeout,
                       solver=solver, global_clock=goal.holes(net)["gt"], strategy=strategy)
        report.synthesis(res)
        return
    if q.kind == "ag-synth":
        goal = parse_predicate(q.goal, net, extra)
        res = ag_synth(net, phi0, goal, mode=mode, config=config, max_states=q.max_states,
                       time_budget=q.timeout, strategy=strategy)
        report.synthesis(res)
        return
    if q.kind == "ef-timed":
        goal = parse_predicate(q.goal, net, extra)
        lo = _param_expr(q.window[0], net, extra)
        hi = _param_expr(q.window[1], net, extra)
        keep = None
        if q.keep:
            known = {v.name: v for v in net.param_vars}
            known.update({n: Var(n, REAL) for n in extra})
            missing = [k for k in q.keep if k not in known]
            if missing:
                raise QueryError(f"keep names unknown variables: {', '.join(missing)}")
            keep = [known[k] for k in q.keep]
        res = ef_timed(net, phi0, goal, window=(lo, hi), mode=mode,
                       n_solutions=q.solutions if q.solutions is not None else 1,
                       solver=solver, max_depth=q.max_depth, max_states=q.max_states,
                       time_budget=q.timeout, keep=keep, strategy=strategy)
        report.synthesis(res)
        return
    if q.kind == "bounded-response":
        trig = parse_predicate(q.trigger, net)
        resp = parse_predicate(q.response, net)
        bound = _param_expr(q.bound, net)
        if bound is INF:
            raise QueryError("bounded-response needs a finite bound")
        res = bounded_response(net, phi0, trig, resp, bound, solver=solver,
                               max_states=q.max_states, time_budget=q.timeout)
        if res.search is not None:
            report.add_search(res.search)
        if res.holds is None:
            report.verdict, report.reason = "inconclusive", res.reason
        else:
            report.conclusive = True
            report.verdict = "holds" if res.holds else "violated"
        return
    raise QueryError(f"{q.kind} is not supported by the {engine} engine")
