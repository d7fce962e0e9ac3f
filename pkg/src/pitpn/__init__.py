"""Parametric time Petri nets with inhibitor arcs: concrete and symbolic
analysis, parameter synthesis and LTL model checking."""

from .native import load_native, parse_native, print_native
from .net import INF, Interval, Net, NetError, Transition, instantiate, validate
from .romeo import load_romeo, parse_romeo

__all__ = [
    "INF",
    "Interval",
    "Net",
    "NetError",
    "Transition",
    "instantiate",
    "load_native",
    "load_romeo",
    "parse_native",
    "parse_romeo",
    "print_native",
    "validate",
]
