"""Parameter synthesis and timed properties on top of symbolic search."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .folding import folded_search
from .logic import (
    FALSE,
    INT,
    REAL,
    TRUE,
    And,
    Cmp,
    Formula,
    LinExpr,
    Not,
    Or,
    Var,
    conj,
    const,
    disj,
    eq,
    exists,
    free_vars,
    ge,
    gt,
    implies,
    le,
    lt,
    negate,
    substitute,
)
from .net import INF, Net, well_formedness
from .predicate import GT, StatePredicate
from .smt import DEFAULT_TIMEOUT, SolverError, open_solver
from .symbolic import SearchResult, SolverUnknown, SymbolicEngine

EXACT, UNDERAPPROX, UNKNOWN = "exact", "underapprox", "unknown"
FOLDED, UNFOLDED = "folded", "unfolded"


@dataclass
class SynthesisResult:
    constraint: Formula
    status: str
    iterations: int = 0
    witnesses: list = field(default_factory=list)
    searches: list = field(default_factory=list)
    params: tuple = ()
    time: float = 0.0
    reason: str = ""


@dataclass
class SolverConfig:
    path: Optional[str] = None
    timeout: float = DEFAULT_TIMEOUT
    kind: str = "z3"

    def open(self, stats=None):
        return open_solver(self.path, self.timeout, self.kind, stats)


def project(f: Formula, keep, solver) -> Formula:
    """Quantifier-free equivalent of f with every variable outside ``keep``
    existentially eliminated."""
    keep = {v.name for v in keep}
    bound = [v for v in free_vars(f) if v.name not in keep]
    return solver.qe(exists(bound, f))


def _nnf(f: Formula) -> Formula:
    """Push negations into the comparison atoms."""
    if isinstance(f, And):
        return conj([_nnf(a) for a in f.args])
    if isinstance(f, Or):
        return disj([_nnf(a) for a in f.args])
    if not isinstance(f, Not):
        return f
    g = f.arg
    if isinstance(g, Not):
        return _nnf(g.arg)
    if isinstance(g, And):
        return disj([_nnf(negate(a)) for a in g.args])
    if isinstance(g, Or):
        return conj([_nnf(negate(a)) for a in g.args])
    if isinstance(g, Cmp):
        if g.op == "<=":
            return gt(g.expr, 0)
        if g.op == "<":
            return ge(g.expr, 0)
        if g.op == "=":
            return disj(lt(g.expr, 0), gt(g.expr, 0))
    return f


def _dnf(f: Formula, limit: int = 256):
    """Disjunctive normal form as a list of conjunct lists; None if larger
    than ``limit`` disjuncts."""
    if isinstance(f, Or):
        out = []
        for a in f.args:
            d = _dnf(a, limit)
            if d is None:
                return None
            out.extend(d)
            if len(out) > limit:
                return None
        return out
    if isinstance(f, And):
        out = [[]]
        for a in f.args:
            d = _dnf(a, limit)
            if d is None:
                return None
            out = [x + y for x in out for y in d]
            if len(out) > limit:
                return None
        return out
    return [[f]]


def _single_var_union(f: Formula):
    """For a formula over one variable, the union of its disjuncts' intervals
    rebuilt as a minimal disjunction; None when not applicable."""
    found = _intervals(f)
    if found is None:
        return None
    v, merged = found
    x = LinExpr.of(v)
    parts = []
    for lo, ls, hi, hs in merged:
        c = []
        if lo is not None and hi is not None and lo == hi:
            c.append(eq(x, lo))
        else:
            if lo is not None:
                c.append(gt(x, lo) if ls else ge(x, lo))
            if hi is not None:
                c.append(lt(x, hi) if hs else le(x, hi))
        parts.append(conj(c))
    return disj(parts)


def _intervals(f: Formula):
    """(v, sorted disjoint intervals) for a formula over the single variable
    v; intervals are (lo, lo_strict, hi, hi_strict) with None for infinite."""
    vs = free_vars(f)
    if len(vs) != 1:
        return None
    (v,) = vs
    dnf = _dnf(_nnf(f))
    if dnf is None:
        return None
    ivs = []
    for d in dnf:
        lo, lo_strict, hi, hi_strict = None, False, None, False
        for atom in d:
            if not isinstance(atom, Cmp):
                return None
            coef = dict(atom.expr.terms).get(v)
            if coef is None or len(atom.expr.terms) != 1:
                return None
            bound = -atom.expr.const / coef
            strict = atom.op == "<"
            if atom.op == "=":
                lo2, hi2 = (bound, False), (bound, False)
            elif coef > 0:  # v op bound  (upper bound)
                lo2, hi2 = None, (bound, strict)
            else:
                lo2, hi2 = (bound, strict), None
            if lo2 is not None and (lo is None or lo2[0] > lo or (lo2[0] == lo and lo2[1])):
                lo, lo_strict = lo2
            if hi2 is not None and (hi is None or hi2[0] < hi or (hi2[0] == hi and hi2[1])):
                hi, hi_strict = hi2
        if lo is not None and hi is not None and (lo > hi or (lo == hi and (lo_strict or hi_strict))):
            continue
        ivs.append((lo, lo_strict, hi, hi_strict))
    ivs.sort(key=lambda iv: (iv[0] is not None, iv[0] if iv[0] is not None else 0, iv[1]))
    merged = []
    for iv in ivs:
        if merged:
            lo, ls, hi, hs = merged[-1]
            nlo, nls, nhi, nhs = iv
            touching = hi is None or nlo is None or nlo < hi or (nlo == hi and not (hs and nls))
            if touching:
                if hi is None or (nhi is not None and (nhi < hi or (nhi == hi and not hs))):
                    pass
                else:
                    hi, hs = nhi, nhs
                merged[-1] = (lo, ls, hi, hs)
                continue
        merged.append(iv)
    return v, merged


_SPLIT_LIMIT = 64


def _int_domains(f: Formula, solver) -> dict:
    """Contiguous finite value ranges entailed by f for its integer
    variables, as long as the product of their sizes stays small."""
    doms = {}
    total = 1
    for v in sorted((v for v in free_vars(f) if v.sort == INT), key=lambda v: v.name):
        found = _intervals(project(f, [v], solver))
        if found is None:
            continue
        _, ivs = found
        if not ivs or ivs[0][0] is None or ivs[-1][2] is None:
            continue
        lo, ls, _, _ = ivs[0]
        _, _, hi, hs = ivs[-1]
        first = math.floor(lo) + 1 if ls and lo == math.floor(lo) else math.ceil(lo)
        last = math.ceil(hi) - 1 if hs and hi == math.ceil(hi) else math.floor(hi)
        values = list(range(first, last + 1))
        if not values or len(ivs) > 1 and any(
                not any(_in_interval(n, iv) for iv in ivs) for n in values):
            continue
        if total * len(values) > _SPLIT_LIMIT:
            continue
        total *= len(values)
        doms[v] = values
    return doms


def _in_interval(x, iv) -> bool:
    lo, ls, hi, hs = iv
    if lo is not None and (x < lo or (ls and x == lo)):
        return False
    if hi is not None and (x > hi or (hs and x == hi)):
        return False
    return True


def _cubes(points, domains) -> list:
    """Cover a set of value tuples by cubes whose coordinates are a value or
    None (any value of that variable's domain)."""
    cubes = set(points)
    changed = True
    while changed:
        changed = False
        for i, dom in enumerate(domains):
            buckets = {}
            for c in cubes:
                buckets.setdefault(c[:i] + c[i + 1:], set()).add(c[i])
            merged = set()
            for key, vals in buckets.items():
                if None not in vals and set(dom) <= vals:
                    merged.add(key[:i] + (None,) + key[i:])
                    changed = True
                else:
                    merged.update(key[:i] + (x,) + key[i:] for x in vals)
            cubes = merged
    return sorted(cubes, key=lambda c: tuple((x is None, x or 0) for x in c))


def _finite_split(f: Formula, solver):
    """Case split over the bounded integer variables of f: each assignment's
    residual constraint is tidied, equal residuals are grouped and their
    assignments merged into cubes.  None when no variable qualifies."""
    doms = _int_domains(f, solver)
    if not doms:
        return None
    names = list(doms)
    groups = []  # [residual, points]
    for values in itertools.product(*(doms[v] for v in names)):
        r = substitute(f, {v: const(x) for v, x in zip(names, values)})
        if solver.check_sat(r, want_model=False).is_unsat:
            continue
        r = tidy(r, solver, split=False)
        for g in groups:
            if g[0] == r or solver.equiv(g[0], r) is True:
                g[1].append(values)
                break
        else:
            groups.append([r, [values]])
    bounds = []
    for v in names:
        x = LinExpr.of(v)
        bounds += [ge(x, doms[v][0]), le(x, doms[v][-1])]
    parts = []
    for r, points in groups:
        for cube in _cubes(points, [doms[v] for v in names]):
            lits = [eq(LinExpr.of(v), x) for v, x in zip(names, cube) if x is not None]
            parts.append(conj(lits + [r]))
    return conj(*bounds, disj(parts))


def tidy(f: Formula, solver, split: bool = True) -> Formula:
    """Equivalence-preserving clean-up of a quantifier-free constraint: merge
    intervals of one-variable constraints, otherwise drop conjuncts implied
    by their siblings and disjuncts covered by the others."""
    if f in (TRUE, FALSE):
        return f
    if solver.check_sat(f, want_model=False).is_unsat:
        return FALSE
    if solver.check_valid(f) is True:
        return TRUE
    single = _single_var_union(f)
    if single is not None:
        return single
    if split and getattr(solver, "supports_qe", False):
        g = _finite_split(f, solver)
        if g is not None:
            f = g
    if getattr(solver, "supports_qe", False):
        try:
            g = solver.simplify(f)
        except SolverError:
            g = f
        if len(str(g)) < len(str(f)):
            f = g
            single = _single_var_union(f)
            if single is not None:
                return single
    dnf = _dnf(_nnf(f))
    if dnf is None:
        return f
    out = []
    for parts in dnf:
        parts = list(dict.fromkeys(parts))
        i = 0
        while i < len(parts):
            rest = conj(parts[:i] + parts[i + 1:])
            if solver.check_valid(implies(rest, parts[i])) is True:
                parts.pop(i)
            else:
                i += 1
        d2 = conj(parts)
        if solver.check_sat(d2, want_model=False).is_unsat:
            continue
        out.append(d2)
    i = 0
    while i < len(out):
        others = disj(out[:i] + out[i + 1:])
        if solver.check_valid(implies(out[i], others)) is True:
            out.pop(i)
        else:
            i += 1
    g = disj(out)
    # factor atoms common to every disjunct
    if isinstance(g, Or):
        common = set(_conjuncts(g.args[0]))
        for d in g.args[1:]:
            common &= set(_conjuncts(d))
        if common:
            rest = [conj([a for a in _conjuncts(d) if a not in common]) for d in g.args]
            g = conj(*sorted(common, key=str), disj(rest))
    return g


def _conjuncts(f: Formula) -> list:
    return list(f.args) if isinstance(f, And) else [f]


def _engine(net, solver, global_clock=False, strategy=None, response=None):
    return SymbolicEngine(net, solver, global_clock=global_clock, strategy=strategy,
                          response=response)


def _run(engine, init, goal, mode, n_solutions, max_depth, max_states, time_budget) -> SearchResult:
    if mode == FOLDED:
        return folded_search(engine, init, goal, n_solutions=n_solutions, max_depth=max_depth,
                             max_states=max_states, time_budget=time_budget)
    return engine.search(init, goal, n_solutions=n_solutions, max_depth=max_depth,
                         max_states=max_states, time_budget=time_budget)


def ef_synth(net: Net, phi0: Formula = TRUE, pred=None, mode: str = FOLDED,
             n_solutions: Optional[int] = None, max_depth: Optional[int] = None,
             max_states: Optional[int] = None, time_budget: Optional[float] = None,
             solver=None, global_clock: bool = False, strategy=None, m0=None,
             extra_params=()) -> SynthesisResult:
    """Parameter values for which some run reaches a state satisfying pred:
    the union over solutions of the parameter projection of their witness
    constraints.  Exact only when a folded search exhausted its frontier."""
    start = time.monotonic()
    own = solver is None
    solver = solver or SolverConfig().open()
    params = tuple(net.param_vars) + tuple(extra_params)
    try:
        engine = _engine(net, solver, global_clock, strategy)
        init = engine.init_state(phi0, m0)
        res = _run(engine, init, pred, mode, n_solutions, max_depth, max_states, time_budget)
        regions = [project(sol.witness, params, solver) for sol in res.solutions]
        constraint = tidy(disj(regions), solver) if regions else FALSE
        if res.stats.unknown:
            status = UNKNOWN
        elif res.complete and mode == FOLDED:
            status = EXACT
        else:
            status = UNDERAPPROX
        return SynthesisResult(constraint, status, 1, res.solutions, [res], params,
                               time.monotonic() - start, res.reason)
    except SolverUnknown as exc:
        return SynthesisResult(FALSE, UNKNOWN, 1, [], [], params, time.monotonic() - start, str(exc))
    finally:
        if own:
            solver.close()


def ag_synth(net: Net, phi0: Formula = TRUE, safe=None, max_iters: int = 64,
             mode: str = FOLDED, config: Optional[SolverConfig] = None,
             max_states: Optional[int] = None, time_budget: Optional[float] = None,
             strategy=None, m0=None, global_clock: bool = False) -> SynthesisResult:
    """Parameter values for which every reachable state satisfies ``safe``.

    Repeatedly searches for an unsafe state under the current constraint K
    and removes the parameter region of the counterexample from K.  Each
    iteration runs in a fresh solver session.
    """
    start = time.monotonic()
    config = config or SolverConfig()
    bad = safe.negated() if isinstance(safe, StatePredicate) else negate(safe)
    params = tuple(net.param_vars)
    K = phi0
    witnesses, searches = [], []
    status, reason = UNDERAPPROX, f"iteration cap {max_iters} reached"
    iterations = 0
    final = None
    bad_formula = bad.formula if isinstance(bad, StatePredicate) else bad
    if bad_formula == FALSE:
        status, reason, max_iters = EXACT, "", 0
    for it in range(max_iters):
        iterations = it + 1
        solver = config.open()
        try:
            engine = _engine(net, solver, global_clock, strategy)
            try:
                init = engine.init_state(K, m0)
            except Exception:
                status, reason = EXACT, ""
                final = FALSE
                break
            remaining = None
            if time_budget is not None:
                remaining = time_budget - (time.monotonic() - start)
                if remaining <= 0:
                    reason = f"time budget of {time_budget}s exhausted"
                    break
            res = _run(engine, init, bad, mode, 1, None, max_states, remaining)
            searches.append(res)
            if res.solutions:
                sol = res.solutions[0]
                witnesses.append(sol)
                rho = tidy(project(sol.witness, params, solver), solver)
                K = conj(K, negate(rho))
                continue
            if res.complete and not res.stats.unknown:
                status, reason = EXACT, ""
            else:
                status = UNKNOWN if res.stats.unknown else UNDERAPPROX
                reason = res.reason or "search incomplete"
            break
        except SolverUnknown as exc:
            status, reason = UNKNOWN, str(exc)
            break
        finally:
            solver.close()
    solver = config.open()
    try:
        base = conj(K, net.init_constraint, well_formedness(net))
        if final is None:
            final = tidy(project(base, params, solver), solver)
    finally:
        solver.close()
    return SynthesisResult(final, status, iterations, witnesses, searches, params,
                           time.monotonic() - start, reason)


def ag_check(net: Net, phi0: Formula = TRUE, safe=None, solver=None, mode: str = FOLDED,
             max_states: Optional[int] = None, time_budget: Optional[float] = None,
             strategy=None, m0=None):
    """(verdict, SearchResult): verdict True when no unsafe state is
    reachable and the search was complete, False with a counterexample,
    None when inconclusive."""
    own = solver is None
    solver = solver or SolverConfig().open()
    bad = safe.negated() if isinstance(safe, StatePredicate) else negate(safe)
    try:
        engine = _engine(net, solver, False, strategy)
        init = engine.init_state(phi0, m0)
        res = _run(engine, init, bad, mode, 1, None, max_states, time_budget)
        if res.solutions:
            return False, res
        if res.complete and not res.stats.unknown:
            return True, res
        return None, res
    finally:
        if own:
            solver.close()


def window_goal(pred, lo, hi):
    """pred and lo <= GT <= hi (hi may be INF)."""
    base = pred.formula if isinstance(pred, StatePredicate) else pred
    parts = [base, le(LinExpr.of(lo), LinExpr.of(GT))]
    if hi is not INF and hi is not None:
        parts.append(le(LinExpr.of(GT), LinExpr.of(hi)))
    return StatePredicate(conj(parts), "")


def ef_timed(net: Net, phi0: Formula = TRUE, pred=None, window=(0, INF), mode: str = UNFOLDED,
             n_solutions: Optional[int] = 1, solver=None, max_depth=None, max_states=None,
             time_budget=None, keep=None, strategy=None, m0=None) -> SynthesisResult:
    """EF restricted to states whose global time lies in ``window``.  Window
    endpoints may mention fresh real parameters; they are kept in the
    projection together with the net's parameters unless ``keep`` names the
    variables to retain."""
    lo, hi = window
    extra = set()
    for e in (lo, hi):
        if isinstance(e, LinExpr):
            extra |= {v for v in free_vars(e) if v not in set(net.param_vars)}
    goal = window_goal(pred, lo, hi)
    phi = conj(phi0, *[ge(LinExpr.of(v), 0) for v in sorted(extra)])
    res = ef_synth(net, phi, goal, mode=mode, n_solutions=n_solutions, max_depth=max_depth,
                   max_states=max_states, time_budget=time_budget, solver=solver,
                   global_clock=True, strategy=strategy, m0=m0, extra_params=tuple(sorted(extra)))
    if keep is not None:
        own = solver is None
        s = solver or SolverConfig().open()
        try:
            res.constraint = tidy(project(res.constraint, keep, s), s)
            res.params = tuple(keep)
        finally:
            if own:
                s.close()
    return res


@dataclass
class ResponseResult:
    holds: Optional[bool]
    search: Optional[SearchResult] = None
    witness: object = None
    reason: str = ""


def bounded_response(net: Net, phi0: Formula, phi_p, psi_p, bound, solver=None,
                     max_states=None, time_budget=None, m0=None) -> ResponseResult:
    """Every phi-state is followed by a psi-state within ``bound`` time units:
    a folded search for a running response clock exceeding the bound."""
    own = solver is None
    solver = solver or SolverConfig().open()
    b = LinExpr.of(bound)

    def late(s):
        if isinstance(s.response, LinExpr):
            return gt(s.response, b)
        return FALSE

    try:
        engine = _engine(net, solver, False, None, (phi_p, psi_p))
        init = engine.init_state(phi0, m0)
        res = folded_search(engine, init, late, n_solutions=1, max_states=max_states,
                            time_budget=time_budget)
        if res.solutions:
            return ResponseResult(False, res, res.solutions[0])
        if res.complete and not res.stats.unknown:
            return ResponseResult(True, res)
        return ResponseResult(None, res, reason=res.reason or "inconclusive")
    finally:
        if own:
            solver.close()


def fresh_param(name: str) -> LinExpr:
    return LinExpr.of(Var(name, REAL))
