"""Subsumption between symbolic states and folded symbolic search.

A state is projected onto canonical variables (one per place, per clock,
plus the global clock and response clock when present); everything else
(tick variables) is existentially bound.  ``u`` is subsumed by ``v`` when
the projection of ``u`` implies the projection of ``v``, i.e. every
concrete state denoted by ``u`` is also denoted by ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .logic import (
    INT,
    REAL,
    Formula,
    LinExpr,
    Var,
    conj,
    eq,
    exists,
    free_vars,
    implies,
)
from .net import Net, NetError
from .smt import SolverError, Unsupported
from .symbolic import NO_CLOCK, SearchResult, SymbolicEngine, SymbolicState


def place_key(p: str) -> Var:
    return Var(f"$m:{p}", INT)


def clock_key(t: str) -> Var:
    return Var(f"$c:{t}", REAL)


GT_KEY = Var("$gt", REAL)
RESP_KEY = Var("$resp", REAL)


@dataclass
class ProjectedState:
    net_name: str
    tick_ok: bool
    has_gt: bool
    resp_kind: str  # "none", "noClock" or "clock"
    ground_marking: Optional[tuple]  # marking when all entries are constants
    closure: Formula  # exists X. (constraint and Psi)
    keys: tuple
    qf: Optional[Formula] = None  # quantifier-free equivalent, computed lazily

    @property
    def partition(self) -> tuple:
        return (self.tick_ok, self.has_gt, self.resp_kind)


def project_now(s: SymbolicState, net: Net) -> ProjectedState:
    """Replace marking, clocks and global clock by canonical variables tied
    to the state's expressions, binding every other non-parameter variable."""
    eqs = []
    keys = []
    for p, e in zip(net.places, s.marking):
        k = place_key(p)
        keys.append(k)
        eqs.append(eq(LinExpr.of(k), e))
    for t, c in zip(net.transition_ids, s.clocks):
        k = clock_key(t)
        keys.append(k)
        eqs.append(eq(LinExpr.of(k), c))
    if s.time is not None:
        keys.append(GT_KEY)
        eqs.append(eq(LinExpr.of(GT_KEY), s.time))
    if s.response is None:
        resp_kind = "none"
    elif s.response is NO_CLOCK:
        resp_kind = "noClock"
    else:
        resp_kind = "clock"
        keys.append(RESP_KEY)
        eqs.append(eq(LinExpr.of(RESP_KEY), s.response))
    body = conj(s.constraint, *eqs)
    params = set(net.param_vars)
    bound = [v for v in free_vars(body) if v not in params and v not in keys]
    ground = tuple(e.const for e in s.marking) if all(e.is_const for e in s.marking) else None
    return ProjectedState(net.name, s.tick_ok, s.time is not None, resp_kind, ground,
                          exists(bound, body), tuple(keys))


def _qf(u: ProjectedState, solver) -> Formula:
    if u.qf is None:
        u.qf = solver.qe(u.closure) if solver.supports_qe else u.closure
    return u.qf


def subsumes(u: ProjectedState, v: ProjectedState, solver, use_qe: bool = True):
    """True when every concretization of ``u`` is one of ``v``; False or an
    Unknown result otherwise."""
    if u.net_name != v.net_name or len(u.keys) != len(v.keys):
        raise NetError("subsumption between states of different nets")
    if u.partition != v.partition:
        return False
    if u.ground_marking is not None and v.ground_marking is not None \
            and u.ground_marking != v.ground_marking:
        return False
    if use_qe and solver.supports_qe:
        return solver.check_valid(implies(_qf(u, solver), _qf(v, solver)))
    return solver.check_valid(implies(u.closure, v.closure))


class VisitedSet:
    """Projected visited states partitioned by tick flag, global-clock and
    response-clock presence; lookups go newest first."""

    def __init__(self, net: Net, solver, newest_first: bool = True, use_qe: bool = True):
        self.net = net
        self.solver = solver
        self.newest_first = newest_first
        self.use_qe = use_qe and solver.supports_qe
        self.parts: dict = {}
        self.unknown = 0
        self.checks = 0
        self._pending = {}

    def __len__(self):
        return sum(len(v) for v in self.parts.values())

    def project(self, s: SymbolicState) -> ProjectedState:
        key = id(s)
        hit = self._pending.get(key)
        if hit is not None and hit[0] is s:
            return hit[1]
        p = project_now(s, self.net)
        self._pending = {key: (s, p)}
        return p

    def subsumed(self, s: SymbolicState) -> bool:
        u = self.project(s)
        members = self.parts.get(u.partition, [])
        order = reversed(members) if self.newest_first else iter(members)
        for v in order:
            if u.ground_marking is not None and v.ground_marking is not None \
                    and u.ground_marking != v.ground_marking:
                continue
            self.checks += 1
            try:
                r = subsumes(u, v, self.solver, self.use_qe)
            except SolverError:
                r = None
            if r is True:
                return True
            if r is not False:
                self.unknown += 1  # Unknown: keep exploring
        return False

    def add(self, s: SymbolicState):
        u = self.project(s)
        self.parts.setdefault(u.partition, []).append(u)


def folded_search(engine: SymbolicEngine, init: SymbolicState, goal,
                  n_solutions: Optional[int] = None, max_depth: Optional[int] = None,
                  max_states: Optional[int] = None, time_budget: Optional[float] = None,
                  use_qe: bool = True) -> SearchResult:
    if not engine.solver.supports_quantifiers:
        raise Unsupported(f"folding needs a quantifier-capable solver, not {engine.solver.name}")
    visited = VisitedSet(engine.net, engine.solver, use_qe=use_qe)
    result = engine.search(init, goal, n_solutions=n_solutions, max_depth=max_depth,
                           max_states=max_states, time_budget=time_budget, visited=visited)
    result.stats.unknown += visited.unknown
    result.visited = len(visited)
    return result
