"""Symbolic semantics of parametric nets: constrained states whose markings,
clocks and global clock are linear expressions over parameters and fresh
tick variables, with a satisfiable constraint, plus breadth-first symbolic
search without folding."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .logic import (
    FALSE,
    REAL,
    TRUE,
    Formula,
    LinExpr,
    Var,
    conj,
    const,
    ge,
    implies,
    ite,
    le,
    negate,
    substitute,
)
from .net import (
    INF,
    Net,
    NetError,
    active,
    enabled,
    fire_marking,
    intermediate_marking,
    well_formedness,
)
from .predicate import GT, StatePredicate, clock_var, place_var
from .smt import SmtLibProcess


class Inapplicable(Exception):
    """The rule yields no satisfiable successor."""


class SolverUnknown(Exception):
    """The solver could not decide a constraint; the analysis is inconclusive."""


class _NoClock:
    def __repr__(self):
        return "noClock"


NO_CLOCK = _NoClock()


@dataclass(frozen=True)
class SymbolicState:
    tick_ok: bool
    marking: tuple  # LinExpr per place, net order
    clocks: tuple  # LinExpr per transition, net order
    time: Optional[LinExpr]  # global clock, None when not tracked
    constraint: Formula
    counter: int = 0
    response: object = None  # None (unused), NO_CLOCK or LinExpr

    def marking_dict(self, net: Net) -> dict:
        return dict(zip(net.places, self.marking))

    def clocks_dict(self, net: Net) -> dict:
        return dict(zip(net.transition_ids, self.clocks))


@dataclass
class Step:
    kind: str  # "tick" or "fire"
    arg: object  # tick variable or transition id

    def __str__(self):
        return f"{self.kind} {self.arg.name if isinstance(self.arg, Var) else self.arg}"


def tick_var(counter: int) -> Var:
    return Var(f"#tick-T-{counter}", REAL)


@dataclass
class SearchStats:
    states: int = 0
    generated: int = 0
    subsumed: int = 0
    unknown: int = 0
    depth: int = 0
    time: float = 0.0


@dataclass
class Solution:
    state: SymbolicState
    witness: Formula
    path: list  # list of (Step, SymbolicState) from init
    depth: int = 0


@dataclass
class SearchResult:
    solutions: list
    complete: bool
    stats: SearchStats
    reason: str = ""
    visited: int = 0

    @property
    def found(self) -> bool:
        return bool(self.solutions)


class SymbolicEngine:
    """Rule applications for one net and one solver session.

    ``global_clock`` adds the global clock component; ``response`` is a pair
    (phi, psi) of state predicates enabling the response-clock augmentation
    used for bounded response checking.
    """

    def __init__(self, net: Net, solver: SmtLibProcess, global_clock: bool = False,
                 strategy=None, response=None, check_constraints: bool = True):
        self.net = net
        self.solver = solver
        self.global_clock = global_clock
        self.strategy = strategy
        self.response = response
        self.check_constraints = check_constraints
        self.places = net.places
        self.tids = net.transition_ids
        self.trans = net.transitions
        self.param_vars = set(net.param_vars)

    # -- helpers

    def marking_map(self, s: SymbolicState) -> dict:
        return dict(zip(self.places, s.marking))

    def _sat(self, f: Formula) -> bool:
        r = self.solver.check_sat(f, want_model=False)
        if r.is_unknown:
            raise SolverUnknown(getattr(r, "reason", "unknown"))
        return r.is_sat

    def predicate(self, pred, s: SymbolicState) -> Formula:
        """Instantiate a state predicate on a symbolic state."""
        if callable(pred):
            return pred(s)
        f = pred.formula if isinstance(pred, StatePredicate) else pred
        mapping = {place_var(p): e for p, e in zip(self.places, s.marking)}
        mapping.update({clock_var(t): c for t, c in zip(self.tids, s.clocks)})
        if s.time is not None:
            mapping[GT] = s.time
        return substitute(f, mapping)

    # -- rules

    def init_state(self, phi0: Formula = TRUE, m0: Optional[dict] = None) -> SymbolicState:
        m = dict(self.net.init_marking)
        if m0:
            m.update({p: LinExpr.of(v) for p, v in m0.items()})
        marking = tuple(m[p] for p in self.places)
        constraint = conj(self.net.init_constraint, phi0, well_formedness(self.net),
                          *[ge(e, 0) for e in marking])
        s = SymbolicState(True, marking, tuple(const(0) for _ in self.tids),
                          const(0) if self.global_clock else None, constraint, 0,
                          NO_CLOCK if self.response is not None else None)
        if not self._sat(constraint):
            raise NetError("initial constraint is unsatisfiable")
        if self.response is not None:
            s = self._response_after_fire(s)
            if s is None:
                raise NetError("initial constraint is unsatisfiable")
        return s

    def mte_predicate(self, s: SymbolicState, T: LinExpr) -> Formula:
        m = self.marking_map(s)
        parts = []
        for t, c in zip(self.trans, s.clocks):
            if t.interval.hi is INF:
                continue
            parts.append(implies(active(m, t), le(T, t.interval.hi - c)))
        return conj(parts)

    def sym_tick(self, s: SymbolicState) -> SymbolicState:
        if not s.tick_ok:
            raise Inapplicable("tick right after a tick")
        v = tick_var(s.counter)
        T = LinExpr.of(v)
        m = self.marking_map(s)
        cond = conj(ge(T, 0), self.mte_predicate(s, T))
        clocks = tuple(ite(active(m, t), c + T, c) for t, c in zip(self.trans, s.clocks))
        gt = None if s.time is None else s.time + T
        resp = s.response
        if isinstance(resp, LinExpr):
            resp = resp + T
        constraint = conj(s.constraint, cond)
        if self.check_constraints and not self._sat(constraint):
            raise Inapplicable("time cannot elapse")
        return SymbolicState(False, s.marking, clocks, gt, constraint, s.counter + 1, resp)

    def fire_condition(self, s: SymbolicState, tid: str) -> Formula:
        t = self.net.transition(tid)
        m = self.marking_map(s)
        c = s.clocks[self.tids.index(tid)]
        parts = [active(m, t), le(t.interval.lo, c)]
        if t.interval.hi is not INF:
            parts.append(le(c, t.interval.hi))
        return conj(parts)

    def sym_fire(self, s: SymbolicState, tid: str) -> SymbolicState:
        t = self.net.transition(tid)
        m = self.marking_map(s)
        cond = self.fire_condition(s, tid)
        constraint = conj(s.constraint, cond)
        if constraint == FALSE:
            raise Inapplicable(f"{tid} cannot fire")
        inter = intermediate_marking(m, t)
        after = fire_marking(m, t)
        clocks = []
        for u, c in zip(self.trans, s.clocks):
            if u.id == t.id:
                clocks.append(const(0))
            else:
                clocks.append(ite(enabled(inter, u), c, 0))
        marking = tuple(LinExpr.of(after[p]) for p in self.places)
        nxt = SymbolicState(True, marking, tuple(clocks), s.time, constraint, s.counter, s.response)
        if self.response is not None:
            nxt = self._response_after_fire(nxt)
            if nxt is None:
                raise Inapplicable(f"{tid} cannot fire")
            constraint = nxt.constraint
        if self.check_constraints and not self._sat(constraint):
            raise Inapplicable(f"{tid} cannot fire")
        return nxt

    def _response_after_fire(self, s: SymbolicState):
        """Response-clock update on the state reached by a firing (or the
        initial state): a psi-state stops the clock, a phi-and-not-psi
        state with no running clock starts one.  The branch is chosen by
        splitting the constraint; branches whose constraint is unsatisfiable
        are dropped.  Returns None if no branch is satisfiable, otherwise the
        unique surviving state or raises for a genuine split (handled by
        ``successors``)."""
        options = self.response_branches(s)
        if not options:
            return None
        if len(options) == 1:
            return options[0]
        raise _Split(options)

    def response_branches(self, s: SymbolicState) -> list:
        phi, psi = self.response
        f_phi = self.predicate(phi, s)
        f_psi = self.predicate(psi, s)
        branches = [(f_psi, NO_CLOCK)]
        if s.response is NO_CLOCK:
            branches.append((conj(f_phi, negate(f_psi)), const(0)))
            branches.append((conj(negate(f_phi), negate(f_psi)), NO_CLOCK))
        else:
            branches.append((negate(f_psi), s.response))
        out = []
        for cond, resp in branches:
            c = conj(s.constraint, cond)
            if self._sat(c):
                out.append(SymbolicState(s.tick_ok, s.marking, s.clocks, s.time, c, s.counter, resp))
        return out

    # -- successor generation

    def fire_successors(self, s: SymbolicState) -> list:
        out = []
        for t in self.trans:
            try:
                out.extend((Step("fire", t.id), n) for n in self._fire_all(s, t.id))
            except Inapplicable:
                continue
        return out

    def _fire_all(self, s: SymbolicState, tid: str) -> list:
        try:
            return [self.sym_fire(s, tid)]
        except _Split as split:
            return split.options

    def successors(self, s: SymbolicState) -> list:
        fires = self.fire_successors(s)
        tick = None
        if s.tick_ok:
            try:
                tick = (Step("tick", tick_var(s.counter)), self.sym_tick(s))
            except Inapplicable:
                tick = None
        if self.strategy is not None:
            applicable = [st.arg for st, _ in fires]
            keep, tick_allowed = self.strategy.filter(list(dict.fromkeys(applicable)),
                                                      tick is not None, lambda tid: True)
            keep = set(keep)
            fires = [(st, n) for st, n in fires if st.arg in keep]
            if not tick_allowed:
                tick = None
        return fires + ([tick] if tick is not None else [])

    # -- unfolded search

    def search(self, init: SymbolicState, goal, n_solutions: Optional[int] = None,
               max_depth: Optional[int] = None, max_states: Optional[int] = None,
               time_budget: Optional[float] = None, visited=None) -> SearchResult:
        """Breadth-first symbolic search.  With ``visited`` (a folding
        visited set) successors subsumed by a visited state are dropped."""
        start = time.monotonic()
        stats = SearchStats()
        solutions = []
        parent = {}
        queue = deque([(init, 0)])
        parent[id(init)] = None
        keep = {id(init): init}
        if visited is not None:
            visited.add(init)
        truncated = False
        reason = ""

        def path_to(s):
            out = []
            while parent[id(s)] is not None:
                step, prev = parent[id(s)]
                out.append((step, s))
                s = prev
            out.reverse()
            return out

        while queue:
            if time_budget is not None and time.monotonic() - start > time_budget:
                truncated, reason = True, f"time budget of {time_budget}s exhausted"
                break
            s, d = queue.popleft()
            stats.states += 1
            stats.depth = max(stats.depth, d)
            g = self.predicate(goal, s)
            w = conj(s.constraint, g)
            try:
                hit = self._sat(w)
            except SolverUnknown:
                stats.unknown += 1
                truncated, reason = True, "solver returned unknown"
                hit = False
            if hit:
                solutions.append(Solution(s, w, path_to(s), d))
                if n_solutions is not None and len(solutions) >= n_solutions:
                    truncated = bool(queue) or truncated
                    reason = reason or "solution limit reached"
                    break
            if max_depth is not None and d >= max_depth:
                truncated = True
                reason = reason or f"depth bound {max_depth} reached"
                continue
            if max_states is not None and stats.states >= max_states:
                truncated, reason = True, f"state budget of {max_states} exhausted"
                break
            try:
                succ = self.successors(s)
            except SolverUnknown:
                stats.unknown += 1
                truncated, reason = True, "solver returned unknown"
                continue
            for step, n in succ:
                stats.generated += 1
                if visited is not None:
                    try:
                        if visited.subsumed(n):
                            stats.subsumed += 1
                            continue
                    except SolverUnknown:
                        stats.unknown += 1
                    visited.add(n)
                parent[id(n)] = (step, s)
                keep[id(n)] = n
                queue.append((n, d + 1))
        stats.time = time.monotonic() - start
        complete = not truncated and not queue
        return SearchResult(solutions, complete, stats, reason)


class _Split(Exception):
    def __init__(self, options):
        super().__init__("response-clock split")
        self.options = options


def concretize(solution: Solution, net: Net, solver: SmtLibProcess, init: SymbolicState):
    """Extract a model of the witness and rebuild the concrete R1 run it
    describes: returns (valuation, events) with events ("tick", value) /
    ("fire", tid)."""
    r = solver.check_sat(solution.witness, want_model=True)
    if not r.is_sat:
        raise SolverUnknown(f"witness not satisfiable: {r}")
    model = r.model
    valuation = {p: Fraction(model.get(p, 0)) for p in net.params}
    events = []
    for step, _ in solution.path:
        if step.kind == "tick":
            events.append(("tick", Fraction(model.get(step.arg.name, 0))))
        else:
            events.append(("fire", step.arg))
    return valuation, events, model
