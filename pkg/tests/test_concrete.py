from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pitpn import concrete as C
from pitpn.models import load_model, net3
from pitpn.net import INF, instantiate

FIG1_PI = {"l1_lo": 5, "l1_hi": 6, "l2_lo": 3, "l2_hi": 4, "l3_lo": 1, "l3_hi": 2}


def clocks(s, net):
    return {t: v for t, v in s.clocks_dict(C.compile_net(net)).items() if v}


def marking(s, net):
    return {p: v for p, v in s.marking_dict(C.compile_net(net)).items() if v}


def test_mte_examples(n34):
    s = C.initial_state(n34)
    assert C.mte(s, n34) == 6
    s = C.tick(s, 6, n34)
    assert C.mte(s, n34) == 0
    lazy = net3(3)
    s = C.fire(C.tick(C.initial_state(lazy), 2, lazy), "t1", lazy)
    s = C.fire(C.tick(s, 2, lazy), "t2", lazy)
    # only t1 (finite) and t3 (unbounded) are active now
    assert C.mte(s, lazy) == 6
    only_inf = net3(0)
    g = C.ConcreteState((0, 1, 0, 1, 0), (0, 0, 0, 0), None, None)
    assert C.mte(g, only_inf) is INF


def test_tick_advances_active_clocks_only(n34):
    s = C.tick(C.initial_state(n34), 2, n34)
    assert clocks(s, n34) == {"t1": 2}
    z = C.tick(C.initial_state(n34, C.R1), 0, n34)
    assert z.marking == C.initial_state(n34).marking and z.tick_ok is False


def test_tick_refusals(n34):
    s = C.initial_state(n34, C.R1)
    with pytest.raises(C.NotApplicable):
        C.tick(s, 7, n34)
    with pytest.raises(C.NotApplicable):
        C.tick(C.tick(s, 1, n34), 1, n34)
    with pytest.raises(C.NotApplicable):
        C.tick(s, -1, n34)


def test_inhibited_clock_is_frozen(fig1_pi):
    s = C.tick(C.initial_state(fig1_pi), 1, fig1_pi)
    assert clocks(s, fig1_pi) == {"t1": 1, "t3": 1}


def test_fire_resets_clocks(n34):
    s = C.fire(C.tick(C.initial_state(n34), 2, n34), "t1", n34)
    assert marking(s, n34) == {"p1": 1, "p4": 1}
    assert clocks(s, n34) == {}
    with pytest.raises(C.NotApplicable):
        C.fire(C.initial_state(n34), "t1", n34)


def test_firing_disables_competitor(fig1_pi):
    s = C.tick(C.initial_state(fig1_pi), 1, fig1_pi)
    s = C.fire(s, "t3", fig1_pi)
    assert s.clocks_dict(C.compile_net(fig1_pi))["t2"] == 0


def test_interval_membership_on_fig1(fig1_pi):
    # t3 must fire by time 2, so the run that lets t1 fire at 5 first drops B
    s = C.initial_state(fig1_pi)
    with pytest.raises(C.NotApplicable):
        C.tick(s, 5, fig1_pi)
    s = C.fire(C.tick(s, 2, fig1_pi), "t3", fig1_pi)
    s = C.tick(s, 3, fig1_pi)
    assert C.firable_ids(s, fig1_pi) == ["t1"]
    early = C.tick(C.fire(C.tick(C.initial_state(fig1_pi), 2, fig1_pi), "t3", fig1_pi), 2,
                   fig1_pi)
    with pytest.raises(C.NotApplicable):
        C.fire(early, "t1", fig1_pi)


def test_witness_for_two_tokens(n34):
    res = C.search_ef(C.initial_state(n34), n34, C.marking_pred(lambda m: m["p2"] >= 2))
    assert res.found
    final = res.trace.final
    assert marking(final, n34)["p2"] == 2
    assert clocks(final, n34) == {"t3": 4}
    assert C.verify_trace(res.trace, n34)


def test_exhaustive_safety_verdicts(n23, n34):
    r = C.check_ag(C.initial_state(n23), n23, C.k_safe_pred(1))
    assert r.status == C.NOT_FOUND and r.complete
    r = C.check_ag(C.initial_state(n34), n34, C.k_safe_pred(2))
    assert r.status == C.NOT_FOUND and r.complete


def test_time_window_witness(n34):
    init = C.initial_state(n34, C.R2)
    res = C.search_ef(init, n34, lambda s, cn: not C.k_safe_pred(1)(s, cn), time_bound=10,
                      window=(5, 10))
    assert res.found
    assert 5 <= res.trace.final.time <= 10
    ticks = sum(a for k, a in res.trace.events if k == "tick")
    assert res.trace.final.time == ticks


def test_depth_bound_is_inconclusive(n34):
    res = C.search_ef(C.initial_state(n34), n34, lambda s, cn: False, max_depth=2)
    assert res.status == C.INCONCLUSIVE


def test_successor_order_is_fire_then_tick(n34):
    s = C.tick(C.initial_state(n34), 2, n34)
    evs = [ev for ev, _ in C.sampled_successors(s, n34)]
    assert evs[0] == ("fire", "t1")
    assert all(k == "tick" for k, _ in evs[1:])


def proj(states):
    return {(s.marking, s.clocks) for s in states}


@pytest.mark.parametrize("net", [net3(3, 4), net3(2, 3), load_model("fig1_pi"),
                                 instantiate(load_model("producer_consumer"), {"a": 3})],
                         ids=["net3(3,4)", "net3(2,3)", "fig1_pi", "pc(a=3)"])
def test_r0_and_r1_reach_the_same_states(net):
    r0, _ = C.reachable(C.initial_state(net, C.R0), net)
    r1, _ = C.reachable(C.initial_state(net, C.R1), net)
    assert proj(r0) == proj(r1)


@pytest.mark.parametrize("net", [net3(3, 4), load_model("fig1_pi")], ids=["net3", "fig1_pi"])
def test_reachable_states_satisfy_clock_invariant(net):
    states, _ = C.reachable(C.initial_state(net, C.R1), net)
    for s in states:
        C.check_invariant(s, net)


@given(st.lists(st.integers(0, 50), min_size=1, max_size=25))
def test_random_runs(choices):
    """Global time is the sum of the ticks; replay reproduces the run."""
    net = net3(3, 4)
    s = C.initial_state(net, C.R2)
    states, events = [s], []
    for c in choices:
        succ = C.sampled_successors(s, net, step=Fraction(1, 2))
        if not succ:
            break
        ev, s = succ[c % len(succ)]
        C.check_invariant(s, net)
        states.append(s)
        events.append(ev)
    tr = C.Trace(states, events)
    assert s.time == sum(a for k, a in events if k == "tick")
    assert C.verify_trace(tr, net)
    assert C.replay(states[0], events, net).states == states
