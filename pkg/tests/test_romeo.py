import pytest

from pitpn.models import load_model, romeo_path
from pitpn.native import print_native
from pitpn.net import INF, validate
from pitpn.romeo import RomeoError, load_romeo, parse_romeo


def counts(net):
    return len(net.places), len(net.transitions), net.arc_count()


def test_scheduling_import():
    net, diags = load_romeo(romeo_path("scheduling"))
    assert diags == []
    assert counts(net) == (6, 9, 15)
    assert net.params == ("a", "b", "c")
    assert validate(net) == []


def test_tutorial_import_matches_native_model():
    net, diags = load_romeo(romeo_path("tutorial"))
    assert diags == []
    assert counts(net) == (6, 5, 12)
    native = load_model("tutorial")
    assert net.places == native.places
    assert net.transitions == native.transitions
    assert net.init_marking == native.init_marking


def test_source_target_arcs_and_inhibitors():
    net, diags = parse_romeo("""
      <TPN name="st">
        <place id="0" label="A" initialMarking="1"/>
        <place id="1" label="B"/>
        <transition id="0" label="t" eft="1" lft="infini"/>
        <arc source="0" target="0" type="normal"/>
        <arc source="0" target="1"/>
        <arc place="1" transition="0" type="LogicalInhibitor" weight="2"/>
      </TPN>""")
    assert diags == []
    t = net.transition("t")
    assert t.pre == (("A", 1),) and t.post == (("B", 1),) and t.inhibit == (("B", 2),)
    assert t.interval.hi is INF


def test_implicit_parameters_and_parametric_marking():
    net, _ = parse_romeo("""
      <TPN>
        <place id="0" label="A" initialMarking="x"/>
        <transition id="0" label="t" eft="a" lft="2*a"/>
        <arc place="0" transition="0" type="PlaceTransition"/>
      </TPN>""")
    assert net.time_params == ("a",)
    assert net.marking_params == ("x",)


def test_unknown_element_is_reported_not_fatal():
    net, diags = parse_romeo("""
      <TPN>
        <place id="0" label="A" initialMarking="1"><graphics><position x="1"/></graphics></place>
        <transition id="0" label="t" eft="0" lft="1"/>
        <arc place="0" transition="0" type="PlaceTransition"/>
        <observer kind="x"/>
      </TPN>""")
    assert any("observer" in d for d in diags)
    assert len(diags) == 1
    assert "trans t : A ->" in print_native(net)


@pytest.mark.parametrize("text", [
    "<TPN><place id='0'",
    "<TPN><transition id='0' eft='0' lft='1'/></TPN>",
    "<TPN><place id='0'/></TPN>",
])
def test_malformed_or_empty_models(text):
    with pytest.raises(RomeoError):
        parse_romeo(text)


def test_unknown_arc_type():
    with pytest.raises(RomeoError, match="arc type"):
        parse_romeo("""
          <TPN>
            <place id="0" label="A"/>
            <transition id="0" label="t" eft="0" lft="1"/>
            <arc place="0" transition="0" type="Reset"/>
          </TPN>""")
