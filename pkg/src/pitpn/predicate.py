"""State predicates shared by the concrete and symbolic engines.

A predicate is a formula whose free variables are place names (token
counts), ``clock(t)`` terms, the global clock ``GT`` and net parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .logic import (
    FALSE,
    INT,
    REAL,
    TRUE,
    Formula,
    LinExpr,
    Var,
    conj,
    evaluate,
    free_vars,
    le,
    negate,
    render_formula,
)
from .net import Net
from .syntax import SyntaxError_, parse_formula

GT = Var("GT", REAL)


def place_var(p: str) -> Var:
    return Var(p, INT)


def clock_var(tid: str) -> Var:
    return Var(f"clock({tid})", REAL)


@dataclass(frozen=True)
class StatePredicate:
    formula: Formula
    text: str = field(default="", compare=False)

    def __str__(self):
        return self.text or render_formula(self.formula)

    def negated(self) -> "StatePredicate":
        return StatePredicate(negate(self.formula), f"not ({self})")

    def conj(self, other: "StatePredicate") -> "StatePredicate":
        return StatePredicate(conj(self.formula, other.formula), f"({self}) and ({other})")

    def holes(self, net: Net) -> dict:
        """Split free variables into places, clocks, GT and parameters."""
        out = {"places": set(), "clocks": set(), "gt": False, "params": set()}
        places = set(net.places)
        for v in free_vars(self.formula):
            if v.name == "GT":
                out["gt"] = True
            elif v.name.startswith("clock(") and v.name.endswith(")"):
                out["clocks"].add(v.name[6:-1])
            elif v.name in places:
                out["places"].add(v.name)
            else:
                out["params"].add(v.name)
        return out

    def holds(self, state, cn, valuation=None) -> bool:
        """Evaluate on a concrete state of a compiled net."""
        env = {p: Fraction(v) for p, v in zip(cn.places, state.marking)}
        for t, c in zip(cn.tids, state.clocks):
            env[f"clock({t})"] = c
        if state.time is not None:
            env["GT"] = state.time
        if valuation:
            env.update({k: Fraction(v) for k, v in valuation.items()})
        return evaluate(self.formula, env)

    def concrete(self, valuation=None):
        """Adapter to the ``pred(state, cn)`` callables of the concrete engine."""
        return lambda s, cn: self.holds(s, cn, valuation)


def k_safe(net: Net, k: int) -> StatePredicate:
    return StatePredicate(conj([le(LinExpr.of(place_var(p)), k) for p in net.places]), f"k-safe({k})")


def not_k_safe(net: Net, k: int) -> StatePredicate:
    return k_safe(net, k).negated()


TRUE_PRED = StatePredicate(TRUE, "true")
FALSE_PRED = StatePredicate(FALSE, "false")


def resolver(net: Net, extra_params=()):
    places = set(net.places)
    params = {v.name: v for v in net.param_vars}
    for name in extra_params:
        params.setdefault(name, Var(name, REAL))
    clash = places & set(params)
    if clash:
        raise SyntaxError_(f"names used both as place and parameter: {', '.join(sorted(clash))}")

    def resolve(name: str) -> LinExpr:
        if name in places:
            return LinExpr.of(place_var(name))
        if name in params:
            return LinExpr.of(params[name])
        if name == "GT":
            return LinExpr.of(GT)
        raise SyntaxError_(f"unknown identifier {name!r}")

    def call(name: str, args: list):
        if name == "k-safe":
            if len(args) != 1 or not isinstance(args[0], LinExpr) or not args[0].is_const:
                raise SyntaxError_("k-safe expects one numeric argument")
            return k_safe(net, int(args[0].const)).formula
        if name == "clock":
            tid = args[0] if isinstance(args[0], str) else None
            if tid is None and len(args) == 1 and isinstance(args[0], LinExpr):
                # a bare identifier that resolved as a place/param; recover its name
                atoms = [a for a, _ in args[0].terms]
                tid = atoms[0].name if len(atoms) == 1 and isinstance(atoms[0], Var) else None
            if tid not in net.transition_ids:
                raise SyntaxError_(f"clock() of unknown transition {args[0]!r}")
            return LinExpr.of(clock_var(tid))
        raise SyntaxError_(f"unknown function {name}")

    return resolve, call


def parse_predicate(text: str, net: Net, extra_params=()) -> StatePredicate:
    resolve, call = resolver(net, extra_params)
    return StatePredicate(parse_formula(text, resolve, call), text.strip())
