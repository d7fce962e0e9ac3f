"""Bundled benchmark models."""

from __future__ import annotations

from importlib import resources

from ..logic import const
from ..native import parse_native
from ..net import INF, Interval, Net, Transition

BUNDLED = ("producer_consumer", "producer_consumer_marking", "fig1", "fig1_pi",
           "scheduling", "tutorial")


def model_path(name: str):
    return resources.files(__name__).joinpath(f"{name}.pn")


def load_model(name: str) -> Net:
    if name not in BUNDLED:
        raise KeyError(f"no bundled model {name!r}; known: {', '.join(BUNDLED)}")
    return parse_native(model_path(name).read_text(encoding="utf-8"))


# display names used by the benchmark tables
PLACE_LABELS = {
    "producer_consumer": {"p1": "itemReady", "p2": "buffer", "p3": "itemReceived",
                          "p4": "readyConsumer", "p5": "readyProducer"},
}


def place_label(model: str, place: str) -> str:
    return PLACE_LABELS.get(model, {}).get(place, place)


def romeo_path(name: str):
    return resources.files(__name__).joinpath(f"{name}.xml")


def net3(lower, upper=INF) -> Net:
    """The ground producer-consumer net with t3's interval set to [lower, upper]."""
    hi = INF if upper is INF or upper is None else const(upper)
    ts = [
        Transition.make("t1", {"p5": 1}, {"p1": 1}, (), Interval.of(2, 6)),
        Transition.make("t2", {"p1": 1}, {"p2": 1, "p5": 1}, (), Interval.of(2, 4)),
        Transition.make("t3", {"p2": 1, "p4": 1}, {"p3": 1}, (), Interval(const(lower), hi)),
        Transition.make("t4", {"p3": 1}, {"p4": 1}, (), Interval.of(0, 0)),
    ]
    return Net.make(f"net3({lower},{upper})", ("p1", "p2", "p3", "p4", "p5"), ts,
                    {"p4": 1, "p5": 1})
