import itertools
import random
from collections import deque
from fractions import Fraction

import pytest

from pitpn.folding import VisitedSet, folded_search, project_now, subsumes
from pitpn.logic import TRUE, LinExpr, conj, eq, eval_term, evaluate, free_vars, ge, lt, real
from pitpn.models import load_model, net3
from pitpn.predicate import k_safe, place_var
from pitpn.smt import Unsupported, open_solver
from pitpn.symbolic import SymbolicEngine

a = real("a")
GRID = [Fraction(k, 2) for k in range(0, 17)]


def states_up_to(engine, init, depth):
    out, queue = [init], deque([(init, 0)])
    while queue:
        s, d = queue.popleft()
        if d == depth:
            continue
        for _, n in engine.successors(s):
            out.append(n)
            queue.append((n, d + 1))
    return out


def grid_points(s, net):
    """Concretizations of a symbolic state with every free variable drawn
    from GRID: (marking, clocks, parameter values) tuples."""
    exprs = list(s.marking) + list(s.clocks)
    vs = set(free_vars(s.constraint))
    for e in exprs:
        vs |= free_vars(conj(ge(e, 0)))
    vs = sorted(vs, key=lambda v: v.name)
    params = [v for v in vs if v.name in net.params]
    pts = set()
    for values in itertools.product(GRID, repeat=len(vs)):
        env = {v.name: x for v, x in zip(vs, values)}
        if evaluate(s.constraint, env):
            pts.add((tuple(eval_term(e, env) for e in exprs),
                     tuple(env[p.name] for p in params)))
    return pts


def oracle_subsumes(pu, pv):
    return pu <= pv


PC_REGIONS = [conj(ge(a, 0), lt(a, 8)), conj(ge(a, 4), lt(a, 8)), conj(ge(a, 0), lt(a, 4)),
              eq(a, 5)]


@pytest.mark.parametrize("net,regions,depth,n_pairs", [
    (net3(3, 4), [TRUE], 7, 40),
    (load_model("producer_consumer"), PC_REGIONS, 6, 120),
], ids=["net3(3,4)", "producer_consumer"])
def test_subsumes_matches_grid_oracle(net, regions, depth, n_pairs, solver):
    eng = SymbolicEngine(net, solver)
    states = []
    for phi0 in regions:
        states += states_up_to(eng, eng.init_state(phi0), depth)
    states = [s for s in states if len(free_vars(s.constraint)) <= 3]
    proj = [project_now(s, net) for s in states]
    points = [grid_points(s, net) for s in states]
    pairs = [(i, j) for i in range(len(states)) for j in range(len(states))
             if states[i].tick_ok == states[j].tick_ok]
    random.Random(7).shuffle(pairs)
    pairs = pairs[:n_pairs]
    assert len(pairs) == n_pairs
    verdicts = []
    for i, j in pairs:
        got = subsumes(proj[i], proj[j], solver)
        assert got == oracle_subsumes(points[i], points[j]), (i, j)
        verdicts.append(got)
    assert True in verdicts and False in verdicts


def test_subsumption_is_reflexive_and_transitive(pc, solver):
    eng = SymbolicEngine(pc, solver)
    states = states_up_to(eng, eng.init_state(ge(a, 0)), 5)
    proj = [project_now(s, pc) for s in states][:24]
    rel = {(i, j): subsumes(u, v, solver) is True
           for i, u in enumerate(proj) for j, v in enumerate(proj)}
    n = len(proj)
    assert all(rel[i, i] for i in range(n))
    for i, j, k in itertools.product(range(n), repeat=3):
        if rel[i, j] and rel[j, k]:
            assert rel[i, k]


def test_stronger_parameter_constraint_is_subsumed(pc, solver):
    eng = SymbolicEngine(pc, solver)
    u = project_now(eng.init_state(ge(a, 4)), pc)
    v = project_now(eng.init_state(ge(a, 0)), pc)
    assert subsumes(u, v, solver) is True
    assert subsumes(v, u, solver) is False


def test_initial_marking_reached_twice_is_folded(pc, solver):
    eng = SymbolicEngine(pc, solver)
    init = eng.init_state(conj(ge(a, 0), lt(a, 4)))
    goal = conj(*[eq(LinExpr.of(place_var(p)), e) for p, e in pc.init_marking])
    r = eng.search(init, goal, n_solutions=8)
    again = [sol.state for sol in r.solutions if sol.depth > 0 and sol.state.tick_ok][:2]
    assert len(again) == 2
    u, v = (project_now(s, pc) for s in again)
    assert subsumes(u, v, solver) is True and subsumes(v, u, solver) is True
    # the plain implication between the raw constraints fails
    assert solver.entails(again[0].constraint, again[1].constraint) is False


def test_folded_search_terminates_on_a_below_4(pc, solver):
    eng = SymbolicEngine(pc, solver)
    init = eng.init_state(conj(ge(a, 0), lt(a, 4)))
    r = folded_search(eng, init, k_safe(pc, 1).negated())
    assert r.complete and not r.solutions
    goal = conj(*[eq(LinExpr.of(place_var(p)), e) for p, e in pc.init_marking])
    r = folded_search(eng, init, goal)
    assert r.complete and 1 <= len(r.solutions) < 10


def test_goal_true_at_init(pc, solver):
    eng = SymbolicEngine(pc, solver)
    r = folded_search(eng, eng.init_state(ge(a, 0)), TRUE, n_solutions=1)
    assert len(r.solutions) == 1 and r.solutions[0].depth == 0 and r.visited >= 1


def test_folded_solutions_exist_unfolded(n34, solver):
    eng = SymbolicEngine(n34, solver)
    init = eng.init_state()
    goal = k_safe(n34, 1).negated()
    folded = folded_search(eng, init, goal)
    assert folded.complete and folded.solutions
    for sol in folded.solutions:
        s = init
        for step, _ in sol.path:
            s = eng.sym_tick(s) if step.kind == "tick" else eng.sym_fire(s, step.arg)
        assert s == sol.state
        assert solver.check_sat(sol.witness, want_model=False).is_sat


def test_visited_set_partitions_by_tick_flag(pc, solver):
    eng = SymbolicEngine(pc, solver)
    init = eng.init_state(ge(a, 0))
    vs = VisitedSet(pc, solver)
    vs.add(init)
    assert vs.subsumed(init)
    assert not vs.subsumed(eng.sym_tick(init))


def test_folding_needs_quantifier_support(pc):
    qf = open_solver(kind="qf")
    try:
        eng = SymbolicEngine(pc, qf)
        with pytest.raises(Unsupported):
            folded_search(eng, eng.init_state(ge(a, 0)), TRUE)
    finally:
        qf.close()
