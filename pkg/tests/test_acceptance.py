"""Acceptance suite.  Each test carries a ``criterion`` marker; the terminal
summary prints one PASS/FAIL line per criterion.  Slow results are cached in
module-scoped fixtures so the witness replay check can reuse them."""

import random

import pytest

from pitpn import bench as B
from pitpn import concrete as C
from pitpn.folding import VisitedSet, folded_search, project_now, subsumes
from pitpn.logic import FALSE, TRUE, LinExpr, conj, eq, free_vars, ge, gt, le, lt, real
from pitpn.ltl import model_check
from pitpn.models import load_model, net3
from pitpn.net import k_safe as k_safe_formula
from pitpn.oracle import bisim_check
from pitpn.predicate import k_safe, place_var
from pitpn.report import solution_trace
from pitpn.strategy import prefer
from pitpn.symbolic import SymbolicEngine
from pitpn.synthesis import ag_synth, ef_synth, ef_timed, fresh_param
from test_folding import PC_REGIONS, grid_points, oracle_subsumes, states_up_to

a = real("a")
crit = pytest.mark.criterion

# exact equivalence targets
TARGET_1 = ge(a, 4)
TARGET_5 = conj(gt(a, 48), ge(a, 30), le(a, 70))


@pytest.fixture(scope="module")
def pc_model():
    return load_model("producer_consumer")


@pytest.fixture(scope="module")
def sched():
    return load_model("scheduling")


@pytest.fixture(scope="module")
def c1(pc_model, solver):
    return ef_synth(pc_model, ge(a, 0), k_safe(pc_model, 1).negated(), n_solutions=1,
                    solver=solver)


@pytest.fixture(scope="module")
def c4(solver):
    n = net3(3, 4)
    return ef_timed(n, TRUE, k_safe(n, 1).negated(), window=(5, 10), solver=solver)


@pytest.fixture(scope="module")
def c5(sched):
    return ag_synth(sched, conj(ge(a, 30), le(a, 70)), k_safe(sched, 1), time_budget=600)


@pytest.fixture(scope="module")
def c6(sched, solver):
    b = fresh_param("b")
    return ef_timed(sched, conj(ge(a, 30), le(a, 70)), k_safe(sched, 1).negated(),
                    window=(b, b), keep=[b.terms[0][0]], solver=solver), b


@pytest.fixture(scope="module")
def pcm():
    return load_model("producer_consumer_marking")


@pytest.fixture(scope="module")
def c7(pcm):
    return ag_synth(pcm, TRUE, k_safe(pcm, 1), time_budget=600)


@crit("1", "producer-consumer EF not 1-safe from a >= 0 is a >= 4")
def test_c1_unsafe_region(c1, solver):
    assert solver.equiv(c1.constraint, TARGET_1) is True


@crit("2", "folded AG 1-safe under 0 <= a < 4 completes, unfolded exhausts 30 s")
def test_c2_folded_completes_unfolded_times_out(pc_model, solver):
    eng = SymbolicEngine(pc_model, solver)
    init = eng.init_state(conj(ge(a, 0), lt(a, 4)))
    bad = k_safe(pc_model, 1).negated()
    folded = folded_search(eng, init, bad, time_budget=300)
    assert folded.complete and folded.solutions == []
    plain = eng.search(init, bad, time_budget=30)
    assert not plain.complete and not plain.solutions
    assert "budget" in plain.reason


@crit("3", "sampled verdicts on net3")
def test_c3_sampled_verdicts():
    n34, n23 = net3(3, 4), net3(2, 3)
    res = C.search_ef(C.initial_state(n34), n34, C.marking_pred(lambda m: m["p2"] >= 2))
    assert res.found and C.verify_trace(res.trace, n34)
    final, cn = res.trace.final, C.compile_net(n34)
    assert final.marking_dict(cn)["p2"] == 2
    assert final.clocks_dict(cn)["t3"] == 4
    r = C.check_ag(C.initial_state(n23), n23, C.k_safe_pred(1))
    assert r.status == C.NOT_FOUND and r.complete
    r = C.check_ag(C.initial_state(n34), n34, C.k_safe_pred(2))
    assert r.status == C.NOT_FOUND and r.complete


@crit("4", "time-bounded witness with GT in [5, 10] replays")
def test_c4_time_window(c4, solver):
    n = net3(3, 4)
    assert c4.witnesses
    sol = c4.witnesses[0]
    eng = SymbolicEngine(n, solver, global_clock=True)
    _, trace, ok = solution_trace(sol, n, solver, eng.init_state(), global_time=True)
    assert ok
    assert 5 <= trace.final.time <= 10
    assert max(trace.final.marking) > 1
    # sampled engine under the same horizon
    init = C.initial_state(n, C.R2)
    res = C.search_ef(init, n, lambda s, cn: max(s.marking) > 1, time_bound=10, window=(5, 10))
    assert res.found and 5 <= res.trace.final.time <= 10


@crit("5", "scheduling AG 1-safe under 30 <= a <= 70 is a > 48")
def test_c5_scheduling_ag(c5, solver):
    assert solver.equiv(c5.constraint, TARGET_5) is True


@crit("6", "scheduling EF_[b,b] not 1-safe projects to 60 <= b <= 96")
def test_c6_scheduling_window(c6, solver):
    r, b = c6
    assert free_vars(r.constraint) <= {b.terms[0][0]}
    assert solver.equiv(r.constraint, conj(ge(b, 60), le(b, 96))) is True


@crit("7", "parametric marking AG 1-safe is x1 = 0, x3 = 0, 0 <= x2 <= 1, a >= 0")
def test_c7_parametric_marking(c7, pcm, solver):
    x1, x2, x3 = (LinExpr.of(v) for v in pcm.param_vars if v.name != "a")
    target = conj(eq(x1, 0), eq(x3, 0), ge(x2, 0), le(x2, 1), ge(a, 0))
    assert solver.equiv(c7.constraint, target) is True


class RecordingVisitedSet(VisitedSet):
    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        self.states = []

    def add(self, s):
        self.states.append(s)
        super().add(s)


@crit("8", "prefer(t3) folded exploration terminates and stays 1-safe")
def test_c8_strategy_keeps_safe(pc_model, solver):
    eng = SymbolicEngine(pc_model, solver, strategy=prefer("t3"))
    init = eng.init_state(ge(a, 0))
    visited = RecordingVisitedSet(pc_model, solver)
    r = eng.search(init, FALSE, time_budget=300, visited=visited)
    assert r.complete and visited.states
    for s in visited.states:
        safe = k_safe_formula(1, s.marking_dict(pc_model))
        assert solver.entails(s.constraint, safe) is True


@crit("9", "LTL verdicts on net3(3,4)")
def test_c9_ltl():
    n = net3(3, 4)
    init = C.initial_state(n)
    assert model_check(init, n, "([] <> p3 = 0) /\\ ([] <> p3 = 1)").holds is True
    r = model_check(init, n, "<> p2 = 2")
    assert r.holds is False and r.cycle


@crit("10a", "bisimulation with the interval semantics to depth 6")
@pytest.mark.parametrize("name", ["fig1_pi", "net3"])
def test_c10a_bisimulation(name):
    n = net3(3, 4) if name == "net3" else load_model(name)
    rep = bisim_check(n, depth=6)
    assert rep.ok, rep.failures


@crit("10b", "every symbolic witness of criteria 1-8 concretizes and replays")
def test_c10b_witnesses_replay(c1, c4, c5, c6, c7, pc_model, sched, pcm, solver):
    cases = [(pc_model, c1, False), (net3(3, 4), c4, True), (sched, c5, False),
             (sched, c6[0], True), (pcm, c7, False)]
    n_checked = 0
    for net, res, timed in cases:
        eng = SymbolicEngine(net, solver, global_clock=timed)
        for sol in res.witnesses:
            _, trace, ok = solution_trace(sol, net, solver, eng.init_state(), global_time=timed)
            assert ok, (net.name, sol.path)
            n_checked += 1
    assert n_checked >= 5


@crit("10c", "every sampled marking of net3(3,4) is covered symbolically")
def test_c10c_completeness(solver):
    n = net3(3, 4)
    eng = SymbolicEngine(n, solver)
    init = eng.init_state()
    states, _ = C.reachable(C.initial_state(n), n)
    markings = {s.marking for s in states}
    assert len(markings) > 1
    for m in markings:
        goal = conj(*[eq(LinExpr.of(place_var(p)), v) for p, v in zip(n.places, m)])
        assert eng.search(init, goal, n_solutions=1, max_depth=20).found, m


@crit("10d", "subsumption agrees with the grid concretization oracle on >= 100 pairs")
def test_c10d_subsumption_oracle(pc_model, solver):
    eng = SymbolicEngine(pc_model, solver)
    states = []
    for phi0 in PC_REGIONS:
        states += states_up_to(eng, eng.init_state(phi0), 6)
    states = [s for s in states if len(free_vars(s.constraint)) <= 3]
    pairs = [(i, j) for i in range(len(states)) for j in range(len(states))
             if states[i].tick_ok == states[j].tick_ok]
    random.Random(11).shuffle(pairs)
    pairs = pairs[:150]
    assert len(pairs) >= 100
    proj = {}
    points = {}
    for i in {k for p in pairs for k in p}:
        proj[i] = project_now(states[i], pc_model)
        points[i] = grid_points(states[i], pc_model)
    for i, j in pairs:
        assert subsumes(proj[i], proj[j], solver) == oracle_subsumes(points[i], points[j]), (i, j)


@crit("10e", "folded search with goal false completes on the three benchmark models")
@pytest.mark.parametrize("name,phi0", [
    ("producer_consumer", conj(ge(a, 0), lt(a, 4))),
    ("scheduling", conj(ge(a, 30), le(a, 70))),
    ("tutorial", TRUE),
])
def test_c10e_folded_termination(name, phi0, solver):
    n = load_model(name)
    eng = SymbolicEngine(n, solver)
    r = folded_search(eng, eng.init_state(phi0), FALSE, time_budget=300)
    assert r.complete, r.reason


@crit("11", "bench EF(p > 0) finds a solution for every place with both engines")
def test_c11_bench_pattern():
    cells = B.suite(B.MODELS, ns=(0,), engines=B.ENGINES, safety=False)
    results = B.bench(cells, timeout=300, jobs=4)
    print(B.table(results))
    expected = {(r.cell.model, r.cell.place, r.cell.engine): B.YES for r in results}
    got = {(r.cell.model, r.cell.place, r.cell.engine): r.verdict for r in results}
    assert len(got) == 2 * 17
    assert got == expected
