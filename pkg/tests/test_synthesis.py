from fractions import Fraction

from hypothesis import given, settings

from pitpn import concrete as C
from pitpn.logic import FALSE, TRUE, conj, disj, eq, eval_term, free_vars, ge, gt, le, lt, real
from pitpn.net import INF, instantiate, well_formedness
from pitpn.predicate import FALSE_PRED, TRUE_PRED, k_safe, parse_predicate
from pitpn.synthesis import (EXACT, UNDERAPPROX, ag_check, ag_synth, bounded_response, ef_synth,
                             ef_timed, fresh_param, tidy)
from strategies import formulas

a = real("a")
AV = a.terms[0][0]


def unsafe_reachable(net, valuation, step=Fraction(1, 2)):
    g = instantiate(net, valuation)
    res = C.search_ef(C.initial_state(g), g, lambda s, cn: max(s.marking) > 1, step=step)
    return res.found


def test_ef_unsafe_region(pc, solver):
    r = ef_synth(pc, ge(a, 0), k_safe(pc, 1).negated(), n_solutions=1, solver=solver)
    assert solver.equiv(r.constraint, ge(a, 4)) is True
    assert r.status == UNDERAPPROX
    assert free_vars(r.constraint) <= {AV}
    for v in (4, Fraction(9, 2), 5, 6, 8):
        assert unsafe_reachable(pc, {"a": v})


def test_ef_true_predicate_gives_initial_region(pc, solver):
    phi0 = conj(ge(a, 1), le(a, 7))
    r = ef_synth(pc, phi0, TRUE_PRED, n_solutions=1, solver=solver)
    assert solver.equiv(r.constraint, phi0) is True


def test_ef_unreachable_is_exact_false(pc, solver):
    r = ef_synth(pc, conj(ge(a, 0), lt(a, 4)), k_safe(pc, 1).negated(), solver=solver)
    assert r.constraint == FALSE and r.status == EXACT


def test_ag_trivial_safety(pc):
    r = ag_synth(pc, ge(a, 1), TRUE_PRED)
    assert r.iterations == 0 and r.status == EXACT


def test_ag_region_and_soundness(pc, solver):
    phi0 = conj(ge(a, 0), le(a, 6))
    r = ag_synth(pc, phi0, k_safe(pc, 1))
    assert r.status == EXACT
    assert solver.equiv(r.constraint, conj(ge(a, 0), lt(a, 4))) is True
    for v in (0, 1, 2, Fraction(7, 2), Fraction(39, 10)):
        verdict, _ = ag_check(pc, eq(a, v), k_safe(pc, 1), solver=solver)
        assert verdict is True
    for v in (4, 5, 6):
        assert unsafe_reachable(pc, {"a": v})


def test_ef_and_ag_partition_the_parameter_space(fig1, solver):
    pred = parse_predicate("D >= 1", fig1)
    ef = ef_synth(fig1, TRUE, pred, solver=solver)
    ag = ag_synth(fig1, TRUE, pred.negated())
    assert ef.status == EXACT and ag.status == EXACT
    space = conj(fig1.init_constraint, well_formedness(fig1))
    assert solver.equiv(disj(ef.constraint, ag.constraint), space) is True
    assert solver.check_sat(conj(ef.constraint, ag.constraint), want_model=False).is_unsat


def test_ag_check_verdicts(pc, solver):
    assert ag_check(pc, conj(ge(a, 0), lt(a, 4)), k_safe(pc, 1), solver=solver)[0] is True
    verdict, res = ag_check(pc, ge(a, 0), k_safe(pc, 1), solver=solver)
    assert verdict is False and res.solutions
    assert ag_check(pc, conj(ge(a, 0), lt(a, 4)), TRUE_PRED, solver=solver)[0] is True


def test_timed_window_witness(n34, solver):
    r = ef_timed(n34, TRUE, k_safe(n34, 1).negated(), window=(5, 10), solver=solver)
    assert r.witnesses
    sol = r.witnesses[0]
    m = solver.check_sat(sol.witness).model
    env = {v.name: Fraction(0) for v in free_vars(sol.witness)}
    env.update(m)
    gt_value = eval_term(sol.state.time, env)
    assert 5 <= gt_value <= 10


def test_unbounded_window_equals_ef(pc, solver):
    phi0 = ge(a, 0)
    bad = k_safe(pc, 1).negated()
    timed = ef_timed(pc, phi0, bad, window=(0, INF), solver=solver)
    plain = ef_synth(pc, phi0, bad, mode="unfolded", n_solutions=1, solver=solver)
    assert solver.equiv(timed.constraint, plain.constraint) is True


def test_parametric_window_endpoints(n34, solver):
    lo = fresh_param("w")
    r = ef_timed(n34, TRUE, k_safe(n34, 1).negated(), window=(lo, lo), solver=solver,
                 keep=[lo.terms[0][0]])
    w = lo.terms[0][0]
    assert free_vars(r.constraint) <= {w}
    assert solver.check_sat(r.constraint, want_model=False).is_sat


def test_bounded_response(n34, solver):
    p2 = parse_predicate("p2 >= 1", n34)
    p3 = parse_predicate("p3 >= 1", n34)
    r = bounded_response(n34, TRUE, p2, p3, 0, solver=solver)
    assert r.holds is False
    assert bounded_response(n34, TRUE, p2, TRUE_PRED, 0, solver=solver).holds is True
    assert bounded_response(n34, TRUE, FALSE_PRED, p3, 0, solver=solver).holds is True


def test_bounded_response_agrees_with_sampled_graph(n34, solver):
    """Brute force on the step-1 graph.  With p2 marked and p3 empty, t3 is
    active and its clock is a lower bound on how long the response has been
    pending."""
    states, _ = C.reachable(C.initial_state(n34, C.R1), n34)
    worst = 0
    for s in states:
        if s.marking[1] >= 1 and s.marking[2] == 0:
            worst = max(worst, s.clocks[2])
    p2 = parse_predicate("p2 >= 1", n34)
    p3 = parse_predicate("p3 >= 1", n34)
    assert worst > 0
    assert bounded_response(n34, TRUE, p2, p3, worst - 1, solver=solver).holds is False


@settings(max_examples=40)
@given(formulas())
def test_tidy_preserves_meaning(solver, f):
    assert solver.equiv(tidy(f, solver), f) is True


def test_tidy_merges_intervals(solver):
    f = disj(conj(ge(a, 4), lt(a, 6)), eq(a, 6), gt(a, 6))
    assert tidy(f, solver) == ge(a, 4)
    assert tidy(conj(ge(a, 1), lt(a, 1)), solver) == FALSE
    assert tidy(disj(ge(a, 1), lt(a, 1)), solver) == TRUE
