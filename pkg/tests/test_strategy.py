import pytest

from pitpn import concrete as C
from pitpn.folding import folded_search
from pitpn.logic import FALSE, ge, real
from pitpn.models import load_model, net3
from pitpn.net import instantiate
from pitpn.strategy import ALL, parse_strategy, prefer
from pitpn.symbolic import SymbolicEngine
from pitpn.syntax import SyntaxError_


def test_preferred_tier_replaces_others():
    s = prefer("t3")
    assert s.filter(["t1", "t3"], True, lambda t: True) == (["t3"], True)


def test_fallback_when_preferred_is_inapplicable():
    s = prefer("t3")
    assert s.filter(["t1", "t3"], True, lambda t: t != "t3") == (["t1", "t3"], True)
    assert s.filter(["t1"], False, lambda t: True) == (["t1"], False)


def test_all_is_identity():
    assert ALL.filter(["t2", "t1"], True, lambda t: True) == (["t2", "t1"], True)


def test_tiers_are_tried_in_order():
    s = parse_strategy("strategy s = prefer(t4) or-else prefer(t2, t3) or-else all")
    assert s.name == "s"
    assert s.filter(["t1", "t2", "t3"], True, lambda t: True) == (["t2", "t3"], True)


def test_unknown_transition_rejected(pc):
    with pytest.raises(SyntaxError_):
        parse_strategy("prefer(t9) or-else all", pc)
    with pytest.raises(SyntaxError_):
        parse_strategy("all or-else prefer(t1)")
    with pytest.raises(SyntaxError_):
        parse_strategy("prefer() or-else all")


@pytest.mark.parametrize("net", [net3(3, 4),
                                 instantiate(load_model("producer_consumer"), {"a": 3}),
                                 load_model("fig1_pi")], ids=["net3", "pc(a=3)", "fig1_pi"])
@pytest.mark.parametrize("tid", ["t1", "t3"])
def test_restricted_reachable_set_is_a_subset(net, tid):
    init = C.initial_state(net, C.R1)
    full, _ = C.reachable(init, net)
    restricted, _ = C.reachable(init, net, strategy=prefer(tid))
    assert set(restricted) <= set(full)


def test_t3_first_keeps_producer_consumer_safe(pc, solver):
    eng = SymbolicEngine(pc, solver, strategy=prefer("t3"))
    init = eng.init_state(ge(real("a"), 0))
    r = folded_search(eng, init, FALSE)
    assert r.complete and r.visited > 1
